import os
import logging

from dotenv import load_dotenv

load_dotenv()


class SolverDefaults:
    tol: float = float(os.environ.get('GLOCAL_TOL', 1e-8))
    max_iter: int = int(os.environ.get('GLOCAL_MAX_ITER', 10000))
    # Residual growth beyond factor * ||r0|| is treated as divergence
    divergence_factor: float = float(os.environ.get('GLOCAL_DIVERGENCE_FACTOR', 1e6))
    omega_cap: float = float(os.environ.get('GLOCAL_OMEGA_CAP', 10.0))
    # Absolute convergence floor, relative to ||b^G||
    abs_tol_factor: float = float(os.environ.get('GLOCAL_ABS_TOL_FACTOR', 1e-12))


class AppConfig:
    # Geometric matching tolerance, relative to the interface extent
    geometry_tol: float = float(os.environ.get('GLOCAL_GEOMETRY_TOL', 1e-9))
    # Concurrent executor
    watchdog_seconds: float = float(os.environ.get('GLOCAL_WATCHDOG_SECONDS', 30.0))
    poll_seconds: float = float(os.environ.get('GLOCAL_POLL_SECONDS', 1e-4))
    # Output and desk-scale caps
    output_dir: str = os.environ.get('GLOCAL_OUTPUT_DIR', './runs')
    max_dofs: int = int(os.environ.get('GLOCAL_MAX_DOFS', 50000))
    max_cube_n: int = int(os.environ.get('GLOCAL_MAX_CUBE_N', 3))
    max_companion_size: int = int(os.environ.get('GLOCAL_MAX_COMPANION_SIZE', 5000))
    # Cache of built scenarios
    scenario_cache_size: int = int(os.environ.get('GLOCAL_SCENARIO_CACHE_SIZE', 16))

    solver = SolverDefaults()


settings = AppConfig()

# Set up logging
logging.basicConfig(
    level=os.environ.get("LOG_LEVEL", "INFO"),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

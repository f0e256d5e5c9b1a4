import logging
from abc import ABC, abstractmethod

import numpy as np

from glocal import settings
from glocal.coupling.topology import CouplingScenario
from glocal.errors import DivergenceError, InvalidArgumentError
from glocal.models import IterationRecord, SolveReport, TypeRelaxation
from glocal.solvers.relaxation import make_relaxation
from glocal.utils.dc import Stopwatch

__all__ = ["IterationMonitor", "BaseSolver", "global_solve", "relaxed_update"]

logger = logging.getLogger(__name__)


def global_solve(scenario: CouplingScenario, p_gamma: np.ndarray) -> np.ndarray:
    """Interface trace of the global solution under the immersed load: S^G^-1 (b^G + p)."""
    p = np.asarray(p_gamma, dtype=float)
    if p.shape != (scenario.interface_size,):
        raise InvalidArgumentError(f"Interface load has shape {p.shape}, expected ({scenario.interface_size},)")
    return scenario.solve_global(scenario.rhs_global + p)


def relaxed_update(p_gamma: np.ndarray, omega: float, residual: np.ndarray) -> np.ndarray:
    return p_gamma + omega * residual


class IterationMonitor:
    """
    Stopping rules shared by every driver: relative residual against |r0|
    with an absolute floor relative to |b^G|, and a divergence guard.
    """

    def __init__(self, scenario: CouplingScenario, tol: float | None = None, max_iter: int | None = None,
                 variant: str = ""):
        self.tol = settings.solver.tol if tol is None else float(tol)
        self.max_iter = settings.solver.max_iter if max_iter is None else int(max_iter)
        if not 0.0 < self.tol < 1.0:
            raise InvalidArgumentError(f"Tolerance must lie in (0, 1), got {self.tol}")
        if self.max_iter < 0:
            raise InvalidArgumentError(f"max_iter must be non-negative, got {self.max_iter}")
        self.variant = variant
        self.abs_floor = settings.solver.abs_tol_factor * float(np.linalg.norm(scenario.rhs_global))
        self.divergence_factor = settings.solver.divergence_factor
        self.history: list[IterationRecord] = []
        self.r0_norm: float | None = None
        self.stopwatch = Stopwatch()

    def converged(self, residual_norm: float) -> bool:
        if self.r0_norm is None:
            self.r0_norm = residual_norm
        return residual_norm <= self.tol * self.r0_norm or residual_norm <= self.abs_floor

    def record(self, j: int, p_gamma: np.ndarray, residual: np.ndarray, residual_norm: float,
               omega: float) -> IterationRecord:
        rec = IterationRecord(
            j=j,
            p_gamma=p_gamma.copy(),
            residual=residual.copy(),
            residual_norm=residual_norm,
            omega=omega,
            wall_time=self.stopwatch.elapsed,
        )
        self.history.append(rec)
        logger.debug(f"[{self.variant}] j={j} |r|={residual_norm:.6e} omega={omega:.6g}")
        return rec

    def diverged(self, residual_norm: float) -> bool:
        return bool(self.r0_norm) and residual_norm > self.divergence_factor * self.r0_norm

    def report(self, converged: bool, u_gamma: np.ndarray, global_solves: int, per_patch_solves,
               p_gamma: np.ndarray | None = None) -> SolveReport:
        return SolveReport(
            history=self.history,
            converged=converged,
            final_u_gamma=np.asarray(u_gamma, dtype=float).copy(),
            total_global_solves=int(global_solves),
            per_patch_solves=[int(v) for v in per_patch_solves],
            r0_norm=self.r0_norm or 0.0,
            variant=self.variant,
            final_p_gamma=None if p_gamma is None else p_gamma.copy(),
        )


class BaseSolver(ABC):
    """
    Stationary iteration on the interface load. Subclasses decide how the
    residual at step j is formed from the global solves.
    """
    variant = "base"

    def __init__(
            self,
            scenario: CouplingScenario,
            omega: float = 1.0,
            tol: float | None = None,
            max_iter: int | None = None,
            relaxation: TypeRelaxation = TypeRelaxation.Fixed,
    ):
        self.scenario = scenario
        self.omega = omega
        self.relaxation_kind = TypeRelaxation(relaxation)
        self.tol = tol
        self.max_iter = max_iter
        self.patch_ids = [sd.id for sd in scenario.subdomains if not sd.is_complement]
        self.p_gamma: np.ndarray | None = None
        self.u_gamma: np.ndarray | None = None
        self.global_solves = 0
        self.patch_solves: dict[int, int] = {}

    def __setup__(self):
        self.relaxation = make_relaxation(self.relaxation_kind, self.omega)
        self.monitor = IterationMonitor(self.scenario, self.tol, self.max_iter, self.variant)
        self.p_gamma = np.zeros(self.scenario.interface_size)
        self.global_solves = 0
        self.patch_solves = {s: 0 for s in self.patch_ids}

    @abstractmethod
    def __residual__(self, j: int, u_gamma: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __record__(self, j: int, residual_norm: float, omega: float):
        """Hook called after each recorded step."""
        pass

    def __step__(self, j: int) -> bool:
        """One global step; returns True once converged."""
        self.u_gamma = global_solve(self.scenario, self.p_gamma)
        self.global_solves += 1
        residual = self.__residual__(j, self.u_gamma)
        norm = float(np.linalg.norm(residual))
        converged = self.monitor.converged(norm)
        omega = self.relaxation.omega if converged else self.relaxation.next(residual)
        self.monitor.record(j, self.p_gamma, residual, norm, omega)
        self.__record__(j, norm, omega)
        if converged:
            return True
        if self.monitor.diverged(norm):
            raise DivergenceError(
                f"[{self.variant}] residual {norm:.3e} exceeds {self.monitor.divergence_factor:g} x |r0| "
                f"at iteration {j} (omega={omega:.4g})",
                report=self.__done__(False),
            )
        if j < self.monitor.max_iter:
            self.p_gamma = relaxed_update(self.p_gamma, omega, residual)
        return False

    def __done__(self, converged: bool) -> SolveReport:
        return self.monitor.report(
            converged,
            self.u_gamma,
            self.global_solves,
            [self.patch_solves[s] for s in self.patch_ids],
            self.p_gamma,
        )

    def run(self) -> SolveReport:
        self.__setup__()
        converged = False
        for j in range(self.monitor.max_iter + 1):
            if self.__step__(j):
                converged = True
                break
        report = self.__done__(converged)
        if converged:
            logger.info(f"[{self.variant}] converged: {report}")
        else:
            logger.warning(f"[{self.variant}] no convergence within {self.monitor.max_iter} iterations: {report}")
        return report

"""Sampling certificate of the asynchronous iteration and the empirically admissible relaxation."""
import logging
from concurrent.futures import Executor

import numpy as np

from glocal.coupling.topology import CouplingScenario
from glocal.errors import InvalidArgumentError
from glocal.models import CertificateReport
from glocal.spectral.bounds import spectral_bounds
from glocal.spectral.companion import build_companion, spectral_radius

__all__ = ["sample_partitions", "certify_paracontraction", "admissible_omega"]

logger = logging.getLogger(__name__)


def sample_partitions(scenario: CouplingScenario, max_delay: int, trials: int, seed: int) -> list[list[set[int]]]:
    """Independent delay draws in 0..D per patch; the complement stays fresh."""
    rng = np.random.default_rng(seed)
    ids = scenario.subdomain_ids
    partitions = []
    for _ in range(trials):
        sigma = rng.integers(0, max_delay + 1, size=len(ids))
        parts: list[set[int]] = [set() for _ in range(max_delay + 1)]
        for s, k in zip(ids, sigma):
            parts[0 if s == 0 else int(k)].add(s)
        partitions.append(parts)
    return partitions


def certify_paracontraction(
        scenario: CouplingScenario,
        omega: float,
        max_delay: int,
        trials: int,
        seed: int = 0,
        margin: float = 0.0,
        executor: Executor | None = None,
) -> CertificateReport:
    """
    Spectral radius of the companion matrix over `trials` random delay
    partitions. One radius at or above 1 - margin fails the certificate.
    """
    if trials < 1:
        raise InvalidArgumentError(f"trials must be >= 1, got {trials}")
    if omega <= 0:
        raise InvalidArgumentError(f"omega must be positive, got {omega}")
    partitions = sample_partitions(scenario, max_delay, trials, seed)

    def radius(partition):
        return spectral_radius(build_companion(scenario, partition, omega, max_delay))

    rhos = list(map(radius, partitions) if executor is None else executor.map(radius, partitions))
    report = CertificateReport(omega=float(omega), max_delay=max_delay, trials=trials, margin=margin, rhos=rhos)
    logger.info(f"{scenario.name}: {report}")
    return report


def admissible_omega(
        scenario: CouplingScenario,
        max_delay: int,
        trials: int = 20,
        seed: int = 0,
        rel_tol: float = 1e-3,
        max_doublings: int = 16,
) -> float:
    """
    Largest relaxation (to rel_tol) that passes the certificate on the same
    sampled partitions: doubling from the algebraic bound, then bisection.
    """
    bounds = spectral_bounds(scenario, max_delay)
    start = bounds.omega_sync if bounds.omega_async_factor is None else bounds.omega_async_factor

    def passes(omega: float) -> bool:
        return certify_paracontraction(scenario, omega, max_delay, trials, seed).passed

    lo, hi = 0.0, start
    for _ in range(max_doublings):
        if not passes(hi):
            break
        lo, hi = hi, 2.0 * hi
    else:
        logger.warning(f"{scenario.name}: certificate still passes at omega={hi:.4g}")
        return lo
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    logger.info(f"{scenario.name}: admissible omega {lo:.6g} for D={max_delay} (algebraic bound {start:.6g})")
    return lo

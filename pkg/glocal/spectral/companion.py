"""
History-space companion matrices of the relaxed iteration with delays.

With X_k = (sum of hat operators of the subdomains of delay k) S^G^-1, the
load update is p_{j+1} = (I - w X_0) p_j - w sum_{k>=1} X_k p_{j-k} + w c,
and B stacks the last D + 1 loads.
"""
import logging
import threading
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from cachetools import LRUCache, cached
from cachetools.keys import hashkey

from glocal import settings
from glocal.coupling.topology import CouplingScenario
from glocal.errors import ConfigurationError, InvalidArgumentError, NumericalError

__all__ = [
    "CompanionSystem",
    "subdomain_blocks",
    "build_companion",
    "companion_matrix",
    "companion_polynomial",
    "spectral_radius",
]

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class CompanionSystem:
    max_delay: int
    omega: float
    partition: list[set[int]]
    blocks: list[np.ndarray] = field(repr=False)
    matrix: np.ndarray = field(repr=False)
    # B stack(p) - w stack_0(shift) = stack(p) at the converged load
    shift: np.ndarray = field(repr=False)
    symmetrized: bool = False

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def interface_size(self) -> int:
        return self.blocks[0].shape[0]


def _cholesky(scenario: CouplingScenario) -> np.ndarray:
    try:
        return sla.cholesky(scenario.schur_global, lower=True)
    except sla.LinAlgError as e:
        raise ConfigurationError(f"{scenario.name}: global interface operator is not SPD: {e}")


@cached(cache=LRUCache(maxsize=settings.scenario_cache_size),
        key=lambda scenario, symmetrized=False: hashkey(scenario, symmetrized),
        lock=threading.Lock())
def subdomain_blocks(scenario: CouplingScenario, symmetrized: bool = False) -> dict[int, np.ndarray]:
    """
    Per-subdomain blocks: hat S^G^-1, or L^-1 hat L^-T with S^G = L L^T. The
    blocks are linear in the hat operators, so delay classes just sum them.
    """
    blocks = {}
    if symmetrized:
        lower = _cholesky(scenario)
        for sd, hat in zip(scenario.subdomains, scenario.hat_operators):
            half = sla.solve_triangular(lower, hat, lower=True)
            block = sla.solve_triangular(lower, half.T, lower=True)
            blocks[sd.id] = 0.5 * (block + block.T)
    else:
        for sd, hat in zip(scenario.subdomains, scenario.hat_operators):
            # hat symmetric and S^G symmetric: hat S^-1 = (S^-1 hat)^T
            blocks[sd.id] = sla.cho_solve(scenario.schur_factor, hat).T
    return blocks


def _check_partition(scenario: CouplingScenario, partition: Sequence[set[int]], max_delay: int):
    if len(partition) != max_delay + 1:
        raise InvalidArgumentError(f"Partition has {len(partition)} classes, expected D + 1 = {max_delay + 1}")
    seen = [s for part in partition for s in part]
    if sorted(seen) != sorted(scenario.subdomain_ids):
        raise InvalidArgumentError(
            f"Delay classes {[sorted(p) for p in partition]} are not a partition of {scenario.subdomain_ids}"
        )


def companion_matrix(blocks: Sequence[np.ndarray], omega: float) -> np.ndarray:
    """Top row [I - w X_0, -w X_1, ..., -w X_D], identities on the sub-diagonal."""
    n = blocks[0].shape[0]
    depth = len(blocks)
    matrix = np.zeros((depth * n, depth * n))
    matrix[:n, :n] = np.eye(n)
    for k, block in enumerate(blocks):
        matrix[:n, k * n:(k + 1) * n] -= omega * block
    for k in range(1, depth):
        matrix[k * n:(k + 1) * n, (k - 1) * n:k * n] = np.eye(n)
    return matrix


def build_companion(
        scenario: CouplingScenario,
        partition: Sequence[set[int]],
        omega: float,
        max_delay: int,
        symmetrized: bool = False,
        p_hat: np.ndarray | None = None,
) -> CompanionSystem:
    """
    Companion matrix for one delay partition (class k holds the subdomains of
    delay k). D = 0 gives the plain iteration matrix I - w X_0. When the
    converged load is given the fixed-point identity is checked.
    """
    if max_delay < 0:
        raise InvalidArgumentError(f"max_delay must be >= 0, got {max_delay}")
    _check_partition(scenario, partition, max_delay)
    n = scenario.interface_size
    if (max_delay + 1) * n > settings.max_companion_size:
        raise InvalidArgumentError(
            f"Companion size {(max_delay + 1) * n} exceeds the cap of {settings.max_companion_size}"
        )
    per_subdomain = subdomain_blocks(scenario, symmetrized)
    blocks = [sum((per_subdomain[s] for s in part), np.zeros((n, n))) for part in partition]
    matrix = companion_matrix(blocks, omega)

    # c = b_hat - sum(hat) S^-1 b^G, so shift = -c
    shift = scenario.hat_sum @ scenario.solve_global(scenario.rhs_global) - scenario.hat_rhs
    if symmetrized:
        shift = sla.solve_triangular(_cholesky(scenario), shift, lower=True)
    system = CompanionSystem(max_delay, float(omega), [set(p) for p in partition], blocks, matrix, shift, symmetrized)

    if p_hat is not None:
        p = np.asarray(p_hat, dtype=float)
        if symmetrized:
            p = sla.solve_triangular(_cholesky(scenario), p, lower=True)
        stacked = np.tile(p, max_delay + 1)
        image = matrix @ stacked
        image[:n] -= omega * shift
        gap = np.linalg.norm(image - stacked)
        if gap > 1e-10 * max(np.linalg.norm(stacked), 1.0):
            raise NumericalError(f"{scenario.name}: converged load is not a fixed point of B (gap {gap:.3e})")
    return system


def companion_polynomial(system: CompanionSystem, lam: complex) -> complex:
    """det((1 - l) l^D I - w sum_k l^(D-k) X_k), whose roots are the eigenvalues of B."""
    d = system.max_delay
    n = system.interface_size
    value = (1.0 - lam) * lam ** d * np.eye(n, dtype=complex)
    for k, block in enumerate(system.blocks):
        value -= system.omega * lam ** (d - k) * block
    return complex(np.linalg.det(value))


def spectral_radius(system: CompanionSystem) -> float:
    try:
        eigenvalues = sla.eigvals(system.matrix, check_finite=True)
    except (sla.LinAlgError, ValueError) as e:
        raise NumericalError(f"Eigen-solve of the companion matrix failed: {e}")
    return float(np.max(np.abs(eigenvalues)))

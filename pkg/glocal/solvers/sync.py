import logging
from concurrent.futures import Executor
from typing import Iterable

import numpy as np

from glocal.coupling.topology import CouplingScenario, SubdomainOperators
from glocal.errors import InvalidArgumentError
from glocal.models import SolveReport, TypeRelaxation, TypeVariant
from glocal.solvers.base import BaseSolver

__all__ = [
    "subdomain_contribution",
    "field_contribution",
    "assemble_residual",
    "compute_residual",
    "RichardsonSolver",
    "richardson_sync",
]

logger = logging.getLogger(__name__)


def subdomain_contribution(sd: SubdomainOperators, u_gamma: np.ndarray) -> np.ndarray:
    """A^s q^s: the projected reaction of one subdomain, on the global interface."""
    return sd.assembly @ sd.reaction(u_gamma)


def field_contribution(sd: SubdomainOperators, u_gamma: np.ndarray) -> np.ndarray:
    """A^s q^s from a full local Dirichlet solve, as a non-invasive fine code returns it."""
    return sd.assembly @ sd.field_reaction(sd.fine_solve(u_gamma))


def assemble_residual(size: int, contributions: Iterable[np.ndarray]) -> np.ndarray:
    """r = -sum_s A^s q^s, summed in the order given."""
    total = np.zeros(size)
    for c in contributions:
        total += c
    return -total


def compute_residual(scenario: CouplingScenario, u_gamma: np.ndarray, executor: Executor | None = None) -> np.ndarray:
    """
    Interface flux imbalance at the trace u_gamma. With an executor the
    subdomain solves run as parallel tasks; the sum order stays fixed.
    """
    u = np.asarray(u_gamma, dtype=float)
    if u.shape != (scenario.interface_size,):
        raise InvalidArgumentError(f"Interface trace has shape {u.shape}, expected ({scenario.interface_size},)")
    if executor is None:
        contributions = (subdomain_contribution(sd, u) for sd in scenario.subdomains)
    else:
        contributions = executor.map(subdomain_contribution, scenario.subdomains, [u] * len(scenario.subdomains))
    return assemble_residual(scenario.interface_size, contributions)


class RichardsonSolver(BaseSolver):
    """Synchronous stationary iterations: every subdomain answers every global solve."""

    def __init__(self, scenario: CouplingScenario, omega: float = 1.0, tol: float | None = None,
                 max_iter: int | None = None, relaxation: TypeRelaxation = TypeRelaxation.Fixed,
                 executor: Executor | None = None):
        super().__init__(scenario, omega, tol, max_iter, relaxation)
        self.executor = executor
        self.variant = str(TypeVariant.SyncAitken if self.relaxation_kind == TypeRelaxation.Aitken
                           else TypeVariant.SyncFixed)

    def __residual__(self, j: int, u_gamma: np.ndarray) -> np.ndarray:
        for s in self.patch_ids:
            self.patch_solves[s] += 1
        return compute_residual(self.scenario, u_gamma, self.executor)


def richardson_sync(
        scenario: CouplingScenario,
        omega: float = 1.0,
        tol: float | None = None,
        max_iter: int | None = None,
        relaxation: TypeRelaxation = TypeRelaxation.Fixed,
        executor: Executor | None = None,
) -> SolveReport:
    """p <- p + omega r until |r| <= tol |r0|. In Aitken mode omega is the initial relaxation."""
    return RichardsonSolver(scenario, omega, tol, max_iter, relaxation, executor).run()

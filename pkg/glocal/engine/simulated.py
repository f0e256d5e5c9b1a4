"""Virtual-time asynchronous iterations driven by an explicit delay schedule."""
import logging

import numpy as np

from glocal.coupling.topology import CouplingScenario
from glocal.engine.schedule import DelaySchedule
from glocal.errors import InvalidArgumentError
from glocal.models import AsyncTrace, SolveReport, TypeRelaxation, TypeVariant
from glocal.solvers.base import BaseSolver
from glocal.solvers.sync import assemble_residual, subdomain_contribution

__all__ = ["AsyncSimulatedSolver", "run_async_simulated"]

logger = logging.getLogger(__name__)


class AsyncSimulatedSolver(BaseSolver):
    """
    p_{j+1} = p_j + omega r_j where subdomain s contributes its reaction to the
    trace u_{j - sigma(s, j)}. Delays are clipped to j so step 0 is a
    synchronous sweep. A patch solve is counted whenever a subdomain picks up
    a trace it has not answered before.
    """
    variant = str(TypeVariant.AsyncSim)

    def __init__(self, scenario: CouplingScenario, omega: float, schedule: DelaySchedule,
                 tol: float | None = None, max_iter: int | None = None):
        super().__init__(scenario, omega, tol, max_iter, TypeRelaxation.Fixed)
        if list(schedule.subdomain_ids) != scenario.subdomain_ids:
            raise InvalidArgumentError(
                f"Schedule covers subdomains {schedule.subdomain_ids}, scenario has {scenario.subdomain_ids}"
            )
        self.schedule = schedule

    def __setup__(self):
        super().__setup__()
        self.traces: dict[int, np.ndarray] = {}
        self.cache: dict[tuple[int, int], np.ndarray] = {}
        self.trace = AsyncTrace(subdomain_ids=self.scenario.subdomain_ids, ranks=[0] + self.patch_ids)
        self._sigma = np.zeros(len(self.scenario.subdomains), dtype=int)
        self._active: list[int] = []

    def __residual__(self, j: int, u_gamma: np.ndarray) -> np.ndarray:
        self.traces[j] = u_gamma
        sigma = np.minimum(self.schedule.sigma(j), j)
        contributions, active = [], []
        for sd, k in zip(self.scenario.subdomains, sigma):
            key = (sd.id, j - int(k))
            contribution = self.cache.get(key)
            if contribution is None:
                contribution = subdomain_contribution(sd, self.traces[key[1]])
                self.cache[key] = contribution
                active.append(sd.id)
                if not sd.is_complement:
                    self.patch_solves[sd.id] += 1
            contributions.append(contribution)

        oldest = j - self.schedule.max_delay
        self.traces = {step: u for step, u in self.traces.items() if step >= oldest}
        self.cache = {key: c for key, c in self.cache.items() if key[1] >= oldest}
        self._sigma, self._active = sigma, active
        return assemble_residual(self.scenario.interface_size, contributions)

    def __record__(self, j: int, residual_norm: float, omega: float):
        self.trace.append(
            j, self._sigma, self._active, residual_norm, omega,
            [self.global_solves] + [self.patch_solves[s] for s in self.patch_ids],
        )

    def run(self) -> tuple[SolveReport, AsyncTrace]:
        report = super().run()
        if self.schedule.forced_updates:
            logger.info(f"[{self.variant}] {self.schedule.forced_updates} forced schedule updates")
        return report, self.trace


def run_async_simulated(
        scenario: CouplingScenario,
        omega: float,
        schedule: DelaySchedule | None = None,
        tol: float | None = None,
        max_iter: int | None = None,
) -> tuple[SolveReport, AsyncTrace]:
    if schedule is None:
        schedule = DelaySchedule.all_zero(scenario.subdomain_ids)
    return AsyncSimulatedSolver(scenario, omega, schedule, tol, max_iter).run()

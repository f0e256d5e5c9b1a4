import logging
from pathlib import Path

import pandas as pd

from glocal.coupling.scenarios import make_scenario
from glocal.coupling.topology import CouplingScenario
from glocal.engine.concurrent import run_async_concurrent, run_sync_concurrent
from glocal.engine.schedule import DelaySchedule, cost_weighted_probabilities
from glocal.engine.simulated import run_async_simulated
from glocal.errors import DivergenceError, LivelockError, StagnationError
from glocal.models import AsyncTrace, RunSummary, SolveReport, TypeRelaxation, TypeSchedule, TypeVariant
from glocal.runner.cfg import ScenarioConfig
from glocal.solvers.reference import ReferenceSolution, monolithic_reference, relative_error
from glocal.solvers.sync import richardson_sync
from glocal.spectral.bounds import spectral_bounds
from glocal.utils.dc import Stopwatch

__all__ = ["ScenarioRunner", "run_scenario", "read_summaries", "default_omega", "build_schedule"]

logger = logging.getLogger(__name__)

_ASYNC = (TypeVariant.AsyncSim, TypeVariant.AsyncConcurrent)


def default_omega(scenario: CouplingScenario, variant: TypeVariant, max_delay: int) -> float:
    """1 for synchronous variants, 0.9 x the certified async factor otherwise."""
    if variant not in _ASYNC:
        return 1.0
    return spectral_bounds(scenario, max_delay).default_omega


def build_schedule(scenario: CouplingScenario, config: ScenarioConfig) -> DelaySchedule:
    solver = config.solver
    ids = scenario.subdomain_ids
    if solver.schedule == TypeSchedule.AllZero or solver.max_delay == 0:
        return DelaySchedule.all_zero(ids)
    if solver.schedule == TypeSchedule.DeterministicTable:
        return DelaySchedule.from_table(ids, solver.table, max_delay=solver.max_delay)
    # cheaper subdomains answer more often
    costs = [sd.fine_system.size for sd in scenario.subdomains]
    return DelaySchedule.random_bounded(ids, solver.max_delay, seed=solver.seed,
                                        probabilities=cost_weighted_probabilities(costs))


class ScenarioRunner:
    """
    Runs one configured case: builds the scenario, its monolithic reference,
    the requested variant, and writes history.csv, trace.csv (asynchronous
    variants) and summary.csv into the output directory.
    """

    def __init__(self, config: ScenarioConfig, out_dir: str | Path | None = None,
                 reference: ReferenceSolution | None = None):
        self.cfg = config
        self.case = config.case
        self.variant = TypeVariant(config.solver.variant)
        self.out_dir = Path(out_dir if out_dir is not None else config.output.path)
        self.scenario: CouplingScenario | None = None
        self.reference = reference
        self.omega: float | None = config.solver.omega
        self.report: SolveReport | None = None
        self.trace: AsyncTrace | None = None
        self.failure: Exception | None = None
        self.wall_seconds = 0.0
        self.summary: RunSummary | None = None

    def __setup__(self):
        self.scenario = make_scenario(self.cfg.problem, self.cfg.geometry.name, **self.cfg.scenario_params())
        logger.info(
            f"[{self.case}] {self.scenario.name}: {self.scenario.n_patches} patches, "
            f"|Gamma|={self.scenario.interface_size}, fine dofs={self.scenario.fine_dof_count}"
        )
        if self.reference is None:
            self.reference = monolithic_reference(self.scenario)
        if self.omega is None:
            self.omega = default_omega(self.scenario, self.variant, self.cfg.solver.max_delay)
            logger.info(f"[{self.case}] using omega={self.omega:.6g} for {self.variant}")

    def __solve__(self):
        solver = self.cfg.solver
        scenario = self.scenario
        match self.variant:
            case TypeVariant.SyncFixed | TypeVariant.SyncAitken:
                relaxation = TypeRelaxation.Aitken if self.variant == TypeVariant.SyncAitken else TypeRelaxation.Fixed
                self.report = richardson_sync(scenario, self.omega, solver.tol, solver.max_iter, relaxation)
            case TypeVariant.AsyncSim:
                schedule = build_schedule(scenario, self.cfg)
                self.report, self.trace = run_async_simulated(scenario, self.omega, schedule, solver.tol,
                                                              solver.max_iter)
            case TypeVariant.AsyncConcurrent:
                self.report, self.trace = run_async_concurrent(
                    scenario, self.omega, solver.tol, solver.max_iter, solver.rank_count, solver.max_delay,
                    always_recompute=solver.always_recompute,
                )
            case TypeVariant.SyncConcurrent:
                self.report = run_sync_concurrent(scenario, self.omega, solver.tol, solver.max_iter,
                                                  solver.rank_count, relaxation=solver.relaxation)

    def __summarize__(self) -> RunSummary:
        report = self.report
        if report is None:
            nan = float("nan")
            return RunSummary(self.case, str(self.variant), 0, 0, 0, self.wall_seconds, nan, nan, False)
        return RunSummary(
            case=self.case,
            variant=str(self.variant),
            iterations=report.iterations,
            loc_solves_min=report.loc_solves_min,
            loc_solves_max=report.loc_solves_max,
            wall_seconds=self.wall_seconds,
            rel_residual=report.relative_residual,
            err_vs_oracle=relative_error(report.final_u_gamma, self.reference.u_gamma),
            converged=report.converged and self.failure is None,
        )

    def __done__(self):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        if self.report is not None:
            history = self.report.get_dataframe()
            if not self.cfg.output.record_wall_time:
                history["wall_seconds"] = 0.0
            history.to_csv(self.out_dir / "history.csv", index=False)
        if self.trace is not None:
            self.trace.to_dataframe().to_csv(self.out_dir / "trace.csv", index=False)
        RunSummary.get_dataframe([self.summary]).to_csv(self.out_dir / "summary.csv", index=False)
        logger.info(f"[{self.case}] results written to {self.out_dir}")

    def run(self) -> RunSummary:
        self.__setup__()
        watch = Stopwatch()
        try:
            self.__solve__()
        except (DivergenceError, LivelockError) as e:
            logger.error(f"[{self.case}] {self.variant} failed: {e}")
            self.failure = e
            self.report = e.report
        except StagnationError as e:
            logger.error(f"[{self.case}] {self.variant} stagnated: {e}")
            self.failure = e
        self.wall_seconds = watch.elapsed
        self.summary = self.__summarize__()
        self.__done__()
        return self.summary

    def stats(self) -> dict:
        return {
            "case": self.case,
            "variant": str(self.variant),
            "omega": self.omega,
            "interface_size": self.scenario.interface_size if self.scenario else None,
            "global_solves": self.report.total_global_solves if self.report else 0,
            "failure": repr(self.failure) if self.failure else None,
        }


def run_scenario(config: ScenarioConfig, out_dir: str | Path | None = None,
                 reference: ReferenceSolution | None = None) -> RunSummary:
    return ScenarioRunner(config, out_dir, reference).run()


def read_summaries(path: str | Path) -> list[RunSummary]:
    return RunSummary.from_dataframe(pd.read_csv(path))


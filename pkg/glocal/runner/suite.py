"""Comparison suites: the two-patch study, cube weak scaling and load imbalance at desk scale."""
import logging
from pathlib import Path
from typing import Iterator, Sequence

import pandas as pd
from tqdm import tqdm

from glocal import settings
from glocal.coupling.scenarios import make_scenario
from glocal.errors import InvalidArgumentError
from glocal.models import RunSummary, TypeGeometry, TypeProblem, TypeSuite, TypeVariant
from glocal.runner.base_runner import run_scenario
from glocal.runner.cfg import ScenarioConfig, parse_config
from glocal.solvers.reference import monolithic_reference
from glocal.utils.dc import timing

__all__ = ["suite_cases", "run_suite"]

logger = logging.getLogger(__name__)

_PAPER_2D_VARIANTS = (TypeVariant.SyncFixed, TypeVariant.SyncAitken, TypeVariant.AsyncSim,
                      TypeVariant.AsyncConcurrent)


def _config(case: str, problem: TypeProblem, geometry: dict, solver: dict) -> ScenarioConfig:
    return parse_config({"name": case, "problem": str(problem), "geometry": geometry, "solver": solver},
                        source=f"suite case {case}")


def _paper_2d(sizes: Sequence[int] | None) -> Iterator[ScenarioConfig]:
    if sizes:
        logger.warning(f"paper-2d has fixed sizes, ignoring {list(sizes)}")
    for problem in (TypeProblem.Thermal, TypeProblem.Elasticity):
        for variant in _PAPER_2D_VARIANTS:
            solver = {"variant": str(variant), "max_delay": 2}
            if variant == TypeVariant.SyncFixed:
                solver["omega"] = 1.0
            yield _config(f"two-patch-{problem}", problem, {"name": str(TypeGeometry.TwoPatch2D)}, solver)


def _weak_scaling(sizes: Sequence[int] | None) -> Iterator[ScenarioConfig]:
    sizes = list(sizes or (2, 3))
    too_big = [n for n in sizes if not 2 <= n <= settings.max_cube_n]
    if too_big:
        raise InvalidArgumentError(f"weak-scaling sizes must lie in 2..{settings.max_cube_n}, got {too_big}")
    for n in sizes:
        geometry = {"name": str(TypeGeometry.CubeGrid3D), "n": n}
        for variant in (TypeVariant.SyncAitken, TypeVariant.AsyncSim):
            yield _config(f"cube-{n}", TypeProblem.Thermal, geometry, {"variant": str(variant), "max_delay": 2})


def _imbalance(sizes: Sequence[int] | None) -> Iterator[ScenarioConfig]:
    # sizes are seeds of the random refinements
    for seed in sizes or (0,):
        for label, low, high in (("imbalanced", 1, 4), ("balanced", 2, 2)):
            geometry = {"name": str(TypeGeometry.ImbalancedGrid), "seed": seed,
                        "min_refinement": low, "max_refinement": high}
            for variant in (TypeVariant.SyncAitken, TypeVariant.AsyncSim):
                yield _config(f"{label}-{seed}", TypeProblem.Thermal, geometry,
                              {"variant": str(variant), "max_delay": 2, "seed": seed})


_SUITES = {
    TypeSuite.Paper2D: _paper_2d,
    TypeSuite.WeakScaling: _weak_scaling,
    TypeSuite.Imbalance: _imbalance,
}


def suite_cases(name: TypeSuite, sizes: Sequence[int] | None = None) -> list[ScenarioConfig]:
    return list(_SUITES[TypeSuite(name)](sizes))


@timing
def run_suite(name: TypeSuite, sizes: Sequence[int] | None = None, out_dir: str | Path | None = None) -> pd.DataFrame:
    """
    Runs every (case, variant) of a suite, each into its own directory, and
    writes the comparison table `<suite>.csv` with one summary row per run.
    The monolithic reference is computed once per case.
    """
    name = TypeSuite(name)
    out_dir = Path(out_dir if out_dir is not None else settings.output_dir) / str(name)
    configs = suite_cases(name, sizes)
    references = {}
    summaries: list[RunSummary] = []
    for config in tqdm(configs, desc=str(name)):
        if config.case not in references:
            scenario = make_scenario(config.problem, config.geometry.name, **config.scenario_params())
            references[config.case] = monolithic_reference(scenario)
        run_dir = out_dir / config.case / str(config.solver.variant)
        summaries.append(run_scenario(config, run_dir, references[config.case]))
    table = RunSummary.get_dataframe(summaries)
    out_dir.mkdir(parents=True, exist_ok=True)
    table.to_csv(out_dir / f"{name}.csv", index=False)
    logger.info(f"Suite {name}: {len(summaries)} runs, {int(table['converged'].sum())} converged")
    return table

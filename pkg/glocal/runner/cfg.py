"""
Scenario configuration files.

A scenario is a TOML file with top-level keys and three optional sections:

    name = "two-patch-thermal"
    problem = "thermal"             # thermal | elasticity
    contrast = 0.1                  # inclusion coefficient factor (generator default if absent)

    [geometry]
    name = "two-patch-2d"           # chain-1d | two-patch-2d | cube-grid-3d | imbalanced-grid
    divisions = [16, 8]             # any further key is a parameter of the generator

    [solver]
    variant = "sync-aitken"
    omega = 1.0
    tol = 1e-8
    max_iter = 10000
    max_delay = 2
    schedule = "random-bounded"
    seed = 0

    [output]
    path = "./runs/two-patch-thermal"

Unknown keys are rejected and every violation is reported at once.
"""
import inspect
import logging
import tomllib
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from glocal import settings
from glocal.coupling.scenarios import chain_1d, cube_grid_3d, imbalanced_grid, two_patch_2d
from glocal.errors import ConfigValidationError
from glocal.models import TypeAlteration, TypeGeometry, TypeProblem, TypeRelaxation, TypeSchedule, TypeVariant

__all__ = ["GeometryConfig", "SolverConfig", "OutputConfig", "ScenarioConfig", "load_config", "parse_config"]

logger = logging.getLogger(__name__)

_GENERATORS = {
    TypeGeometry.Chain1D: chain_1d,
    TypeGeometry.TwoPatch2D: two_patch_2d,
    TypeGeometry.CubeGrid3D: cube_grid_3d,
    TypeGeometry.ImbalancedGrid: imbalanced_grid,
}


class GeometryConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: TypeGeometry = TypeGeometry.TwoPatch2D
    # chain-1d
    n_patches: int | None = Field(default=None, ge=1)
    gaps: bool | None = None
    # two-patch-2d
    divisions: tuple[int, int] | None = None
    alteration: TypeAlteration | None = None
    radii: tuple[float, float] | None = None
    # cube-grid-3d / imbalanced-grid
    n: int | None = Field(default=None, ge=2)
    shape: tuple[int, int, int] | None = None
    seed: int | None = None
    min_refinement: int | None = Field(default=None, ge=1)
    max_refinement: int | None = Field(default=None, ge=1)
    radius: float | None = Field(default=None, gt=0)
    # shared
    cells: int | None = Field(default=None, ge=1)
    refinement: int | None = Field(default=None, ge=1)
    exact: bool | None = None

    def params(self) -> dict:
        """Generator keyword arguments that were set in the file."""
        return {k: v for k, v in self.model_dump(exclude={"name"}).items() if v is not None}

    @model_validator(mode="after")
    def _known_to_generator(self):
        accepted = inspect.signature(_GENERATORS[self.name]).parameters
        unknown = [k for k in self.params() if k not in accepted]
        if unknown:
            raise ValueError(f"{', '.join(unknown)} not a parameter of {self.name}")
        return self


class SolverConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    variant: TypeVariant = TypeVariant.SyncAitken
    # None: 1 for synchronous variants, 0.9 x the async spectral factor otherwise
    omega: float | None = Field(default=None, gt=0)
    tol: float = Field(default=settings.solver.tol, gt=0, lt=1)
    max_iter: int = Field(default=settings.solver.max_iter, ge=0)
    max_delay: int = Field(default=2, ge=0)
    schedule: TypeSchedule = TypeSchedule.RandomBounded
    table: list[list[int]] | None = None
    seed: int = 0
    rank_count: int | None = Field(default=None, ge=2)
    always_recompute: bool = True
    # sync-concurrent only; sync-fixed and sync-aitken name their relaxation
    relaxation: TypeRelaxation = TypeRelaxation.Fixed

    @model_validator(mode="after")
    def _table_for_table_schedule(self):
        if self.schedule == TypeSchedule.DeterministicTable and not self.table:
            raise ValueError("schedule 'deterministic-table' needs a table")
        return self

    @model_validator(mode="after")
    def _relaxation_for_fenced_runs(self):
        if "relaxation" in self.model_fields_set and self.variant != TypeVariant.SyncConcurrent:
            raise ValueError(f"relaxation applies to sync-concurrent only, variant is '{self.variant}'")
        return self


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    path: str = settings.output_dir
    # False writes zeros in the wall_seconds column so histories are byte-reproducible
    record_wall_time: bool = True


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = ""
    problem: TypeProblem = TypeProblem.Thermal
    contrast: float | None = Field(default=None, gt=0)
    geometry: GeometryConfig = GeometryConfig()
    solver: SolverConfig = SolverConfig()
    output: OutputConfig = OutputConfig()

    @property
    def case(self) -> str:
        return self.name or f"{self.geometry.name}-{self.problem}"

    def scenario_params(self) -> dict:
        params = self.geometry.params()
        if self.contrast is not None:
            params["contrast"] = self.contrast
        return params


def _messages(error: ValidationError) -> list[str]:
    messages = []
    for item in error.errors():
        where = ".".join(str(p) for p in item["loc"]) or "<root>"
        messages.append(f"{where}: {item['msg']}")
    return messages


def parse_config(data: dict, source: str = "<dict>") -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigValidationError([f"{source}: {m}" for m in _messages(e)]) from None


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        with path.open("rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigValidationError([f"{path}: file not found"])
    except tomllib.TOMLDecodeError as e:
        raise ConfigValidationError([f"{path}: {e}"])
    config = parse_config(data, str(path))
    logger.info(f"Loaded config {path}: case={config.case}, variant={config.solver.variant}")
    return config

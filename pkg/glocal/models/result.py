from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from glocal.errors import InvalidArgumentError
from glocal.utils.struct import DefaultStruct

__all__ = ["IterationRecord", "SolveReport"]


@dataclass(eq=False)
class IterationRecord(DefaultStruct):
    j: int
    p_gamma: np.ndarray       # interface load before the update
    residual: np.ndarray
    residual_norm: float
    omega: float              # relaxation applied after this step
    wall_time: float = 0.0    # seconds since the solve started

    def __post_init__(self):
        norm = float(np.linalg.norm(self.residual))
        if abs(norm - self.residual_norm) > 1e-12 * max(norm, 1.0):
            raise InvalidArgumentError(
                f"Iteration {self.j}: residual_norm {self.residual_norm} != |residual| {norm}"
            )


@dataclass(eq=False)
class SolveReport(DefaultStruct):
    history: list[IterationRecord]
    converged: bool
    final_u_gamma: np.ndarray
    total_global_solves: int
    per_patch_solves: list[int]
    r0_norm: float = 0.0
    variant: str = ""
    final_p_gamma: np.ndarray | None = field(default=None, repr=False)
    # answers a patch recomputed on an unchanged trace, not counted in per_patch_solves
    per_patch_recomputes: list[int] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return self.history[-1].j if self.history else 0

    @property
    def final_residual_norm(self) -> float:
        return self.history[-1].residual_norm if self.history else float("nan")

    @property
    def relative_residual(self) -> float:
        if self.r0_norm == 0.0:
            return 0.0
        return self.final_residual_norm / self.r0_norm

    @property
    def residual_norms(self) -> np.ndarray:
        return np.array([h.residual_norm for h in self.history])

    @property
    def omegas(self) -> np.ndarray:
        return np.array([h.omega for h in self.history])

    @property
    def loc_solves_min(self) -> int:
        return min(self.per_patch_solves) if self.per_patch_solves else 0

    @property
    def loc_solves_max(self) -> int:
        return max(self.per_patch_solves) if self.per_patch_solves else 0

    @property
    def per_patch_work(self) -> list[int]:
        """Solves plus recomputations of every patch."""
        recomputes = self.per_patch_recomputes or [0] * len(self.per_patch_solves)
        return [n + k for n, k in zip(self.per_patch_solves, recomputes)]

    def get_dataframe(self) -> pd.DataFrame:
        """History table with the `history.csv` columns."""
        return pd.DataFrame({
            "j": [h.j for h in self.history],
            "residual_norm": [h.residual_norm for h in self.history],
            "omega": [h.omega for h in self.history],
            "wall_seconds": [h.wall_time for h in self.history],
        })

    def __repr__(self):
        return (f"SolveReport(variant={self.variant!r}, converged={self.converged}, "
                f"iterations={self.iterations}, relative_residual={self.relative_residual:.3e}, "
                f"global_solves={self.total_global_solves}, "
                f"loc_solves=[{self.loc_solves_min}, {self.loc_solves_max}])")

    def __str__(self):
        return self.__repr__()

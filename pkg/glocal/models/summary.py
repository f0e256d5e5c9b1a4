from dataclasses import dataclass, fields

import pandas as pd

from glocal.utils.struct import DefaultStruct

__all__ = ["RunSummary"]


@dataclass(eq=False)
class RunSummary(DefaultStruct):
    case: str
    variant: str
    iterations: int
    loc_solves_min: int
    loc_solves_max: int
    wall_seconds: float
    rel_residual: float
    err_vs_oracle: float
    converged: bool

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def to_row(self) -> dict:
        return {name: getattr(self, name) for name in self.columns()}

    @classmethod
    def get_dataframe(cls, summaries: list["RunSummary"]) -> pd.DataFrame:
        return pd.DataFrame([s.to_row() for s in summaries], columns=cls.columns())

    @classmethod
    def from_dataframe(cls, df: pd.DataFrame) -> list["RunSummary"]:
        return [cls.from_dict(row) for row in df.to_dict(orient="records")]

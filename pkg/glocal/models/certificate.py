from dataclasses import dataclass, field

import pandas as pd

from glocal.utils.struct import DefaultStruct

__all__ = ["CertificateReport"]


@dataclass(eq=False)
class CertificateReport(DefaultStruct):
    omega: float
    max_delay: int
    trials: int
    margin: float = 0.0
    rhos: list[float] = field(default_factory=list)

    @property
    def max_rho(self) -> float:
        return max(self.rhos) if self.rhos else float("nan")

    @property
    def passed(self) -> bool:
        return bool(self.rhos) and self.max_rho < 1.0 - self.margin

    def get_dataframe(self) -> pd.DataFrame:
        """Per-trial table with the `certificate.csv` columns."""
        return pd.DataFrame({
            "trial": range(len(self.rhos)),
            "D": self.max_delay,
            "omega": self.omega,
            "rho": self.rhos,
            "pass": [rho < 1.0 - self.margin for rho in self.rhos],
        })

    def __repr__(self):
        return (f"CertificateReport(omega={self.omega:.6g}, D={self.max_delay}, trials={self.trials}, "
                f"max_rho={self.max_rho:.6f}, passed={self.passed})")

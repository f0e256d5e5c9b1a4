from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from glocal.utils.struct import DefaultStruct

__all__ = ["AsyncTrace"]


@dataclass(eq=False)
class AsyncTrace(DefaultStruct):
    """
    Step-by-step record of an asynchronous run. Rank 0 is the global model
    (which also evaluates the complement); the other ranks own patches.
    """
    subdomain_ids: list[int]
    ranks: list[int]
    steps: list[int] = field(default_factory=list)
    # per step, one delay per subdomain (same order as subdomain_ids)
    sigmas: list[list[int]] = field(default_factory=list)
    # per step, subdomains whose contribution was refreshed
    active: list[list[int]] = field(default_factory=list)
    residual_norms: list[float] = field(default_factory=list)
    omegas: list[float] = field(default_factory=list)
    # per step, cumulative solves of every rank
    solve_counts: list[list[int]] = field(default_factory=list)

    def append(self, j: int, sigma, active, residual_norm: float, omega: float, solve_counts) -> None:
        self.steps.append(int(j))
        self.sigmas.append([int(v) for v in sigma])
        self.active.append(sorted(int(s) for s in active))
        self.residual_norms.append(float(residual_norm))
        self.omegas.append(float(omega))
        self.solve_counts.append([int(v) for v in solve_counts])

    def __len__(self):
        return len(self.steps)

    @property
    def final_solves(self) -> list[int]:
        return self.solve_counts[-1] if self.solve_counts else [0] * len(self.ranks)

    @property
    def max_sigma(self) -> int:
        return int(np.max(self.sigmas)) if self.sigmas else 0

    def to_dataframe(self) -> pd.DataFrame:
        """One row per (step, rank): j, rank, sigma_<s>..., residual_norm, omega, solves_rank."""
        n_ranks = len(self.ranks)
        sigmas = np.asarray(self.sigmas, dtype=int).reshape(len(self.steps), len(self.subdomain_ids))
        data = {
            "j": np.repeat(self.steps, n_ranks),
            "rank": np.tile(self.ranks, len(self.steps)),
        }
        for col, s in enumerate(self.subdomain_ids):
            data[f"sigma_{s}"] = np.repeat(sigmas[:, col], n_ranks)
        data["residual_norm"] = np.repeat(self.residual_norms, n_ranks)
        data["omega"] = np.repeat(self.omegas, n_ranks)
        data["solves_rank"] = np.asarray(self.solve_counts, dtype=int).reshape(-1)
        return pd.DataFrame(data)

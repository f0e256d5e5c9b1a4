"""
Delay schedules sigma(s, j): the age, in global steps, of the data subdomain s
contributes at step j. The complement is always fresh and a subdomain that
is not updated ages by exactly one step.
"""
import logging
from typing import Sequence

import numpy as np

from glocal.errors import InvalidArgumentError, ScheduleError
from glocal.models.tp import TypeSchedule

__all__ = ["DelaySchedule", "partition_by_delay", "cost_weighted_probabilities"]

logger = logging.getLogger(__name__)


class DelaySchedule:
    """
    Build with `all_zero`, `from_table` or `random_bounded`. Table schedules
    repeat periodically; random schedules are generated lazily and are
    reproducible for a given seed.
    """

    def __init__(
            self,
            kind: TypeSchedule,
            subdomain_ids: Sequence[int],
            max_delay: int = 0,
            table: np.ndarray | None = None,
            seed: int = 0,
            probabilities: Sequence[float] | float = 0.5,
    ):
        self.kind = TypeSchedule(kind)
        self.subdomain_ids = [int(s) for s in subdomain_ids]
        if not self.subdomain_ids:
            raise InvalidArgumentError("A schedule needs at least one subdomain")
        if max_delay < 0:
            raise InvalidArgumentError(f"max_delay must be >= 0, got {max_delay}")
        self.max_delay = int(max_delay)
        self.seed = int(seed)
        self.table = None if table is None else np.asarray(table, dtype=int)
        probs = np.broadcast_to(np.asarray(probabilities, dtype=float), (len(self.subdomain_ids),)).copy()
        if np.any(probs <= 0.0) or np.any(probs > 1.0):
            raise InvalidArgumentError(f"Update probabilities must lie in (0, 1], got {probs.tolist()}")
        self.probabilities = probs
        self._rows: list[np.ndarray] = []
        self._rng = np.random.default_rng(self.seed)
        self.forced_updates = 0
        if self.kind == TypeSchedule.DeterministicTable:
            self._validate_table()

    @classmethod
    def all_zero(cls, subdomain_ids: Sequence[int]) -> "DelaySchedule":
        return cls(TypeSchedule.AllZero, subdomain_ids)

    @classmethod
    def from_table(cls, subdomain_ids: Sequence[int], table, max_delay: int | None = None) -> "DelaySchedule":
        table = np.atleast_2d(np.asarray(table, dtype=int))
        if max_delay is None:
            max_delay = int(table.max()) if table.size else 0
        return cls(TypeSchedule.DeterministicTable, subdomain_ids, max_delay=max_delay, table=table)

    @classmethod
    def random_bounded(cls, subdomain_ids: Sequence[int], max_delay: int, seed: int = 0,
                       probabilities: Sequence[float] | float = 0.5) -> "DelaySchedule":
        return cls(TypeSchedule.RandomBounded, subdomain_ids, max_delay=max_delay, seed=seed,
                   probabilities=probabilities)

    @property
    def n_subdomains(self) -> int:
        return len(self.subdomain_ids)

    @property
    def _fixed_columns(self) -> np.ndarray:
        return np.array([s == 0 for s in self.subdomain_ids])

    def _validate_table(self):
        t = self.table
        if t is None or t.ndim != 2 or t.shape[1] != self.n_subdomains or t.shape[0] == 0:
            raise ScheduleError(
                f"Delay table must have shape (steps, {self.n_subdomains}), got {None if t is None else t.shape}"
            )
        if t.min() < 0 or t.max() > self.max_delay:
            raise ScheduleError(f"Delay table leaves the range 0..{self.max_delay}")
        if np.any(t[:, self._fixed_columns] != 0):
            raise ScheduleError("The complement (subdomain 0) must always be fresh")
        # periodic: the wrap-around counts as a transition too
        following = np.roll(t, -1, axis=0)
        bad = np.argwhere(following > t + 1)
        if len(bad):
            row, col = bad[0]
            raise ScheduleError(
                f"Subdomain {self.subdomain_ids[col]} skips ages between steps {row} and {(row + 1) % len(t)}"
            )

    def _random_row(self, previous: np.ndarray) -> np.ndarray:
        n = self.n_subdomains
        # draws are taken for every subdomain at every step to keep replays aligned
        update = self._rng.random(n) < self.probabilities
        pick = self._rng.random(n)
        aged = previous + 1
        forced = aged > self.max_delay
        if np.any(forced & ~update):
            self.forced_updates += int(np.sum(forced & ~update))
            logger.debug(f"Forced update of subdomains {np.flatnonzero(forced & ~update).tolist()}")
        update |= forced
        fresh = np.floor(pick * (previous + 1)).astype(int)
        row = np.where(update, fresh, aged)
        row[self._fixed_columns] = 0
        return row

    def sigma(self, j: int) -> np.ndarray:
        """Delays of every subdomain at step j, ordered as `subdomain_ids`."""
        if j < 0:
            raise InvalidArgumentError(f"Step must be >= 0, got {j}")
        if self.kind == TypeSchedule.AllZero or self.max_delay == 0:
            return np.zeros(self.n_subdomains, dtype=int)
        if self.kind == TypeSchedule.DeterministicTable:
            return self.table[j % len(self.table)].copy()
        while len(self._rows) <= j:
            if not self._rows:
                self._rows.append(np.zeros(self.n_subdomains, dtype=int))
            else:
                self._rows.append(self._random_row(self._rows[-1]))
        return self._rows[j].copy()

    def __repr__(self):
        return f"DelaySchedule(kind={self.kind}, D={self.max_delay}, n={self.n_subdomains}, seed={self.seed})"


def partition_by_delay(schedule: DelaySchedule, j: int) -> list[set[int]]:
    """The D + 1 sets of subdomains whose data at step j has age 0, 1, ..., D."""
    sigma = schedule.sigma(j)
    if sigma.min() < 0 or sigma.max() > schedule.max_delay:
        raise ScheduleError(f"Step {j}: delays {sigma.tolist()} leave the range 0..{schedule.max_delay}")
    parts: list[set[int]] = [set() for _ in range(schedule.max_delay + 1)]
    for s, k in zip(schedule.subdomain_ids, sigma):
        if s == 0 and k != 0:
            raise ScheduleError(f"Step {j}: the complement has delay {k}")
        parts[int(k)].add(s)
    return parts


def cost_weighted_probabilities(costs: Sequence[float], base: float = 0.9) -> np.ndarray:
    """Update probability of each subdomain inversely proportional to its solve cost."""
    costs = np.asarray(costs, dtype=float)
    if np.any(costs <= 0):
        raise InvalidArgumentError("Solve costs must be positive")
    return base * costs.min() / costs

"""Relaxation policies for the interface-load update p <- p + omega r."""
import logging

import numpy as np

from glocal import settings
from glocal.errors import InvalidArgumentError, StagnationError
from glocal.models.tp import TypeRelaxation

__all__ = ["aitken_update", "FixedRelaxation", "AitkenRelaxation", "make_relaxation"]

logger = logging.getLogger(__name__)


def aitken_update(omega_j: float, r_j: np.ndarray, r_prev: np.ndarray, omega_cap: float | None = None) -> float:
    """
    Vector Aitken delta-squared step:
    omega_{j+1} = -omega_j <r_prev, r_j - r_prev> / |r_j - r_prev|^2,
    kept in (0, omega_cap]. A zero residual leaves omega unchanged.
    """
    cap = settings.solver.omega_cap if omega_cap is None else omega_cap
    r_j = np.asarray(r_j, dtype=float)
    r_prev = np.asarray(r_prev, dtype=float)
    if not np.any(r_j):
        return omega_j
    delta = r_j - r_prev
    denom = float(delta @ delta)
    if denom == 0.0:
        raise StagnationError(f"Residual did not change between iterations (|r| = {np.linalg.norm(r_j):.3e})")
    omega = -omega_j * float(r_prev @ delta) / denom
    if omega <= 0.0:
        logger.warning(f"Aitken step gave omega={omega:.4g}; keeping {omega_j:.4g}")
        return omega_j
    if omega > cap:
        logger.warning(f"Aitken step gave omega={omega:.4g}; clamped to {cap}")
        return cap
    return omega


class FixedRelaxation:
    kind = TypeRelaxation.Fixed

    def __init__(self, omega: float):
        if not omega > 0:
            raise InvalidArgumentError(f"Relaxation must be positive, got omega={omega}")
        self.omega = float(omega)

    def next(self, residual: np.ndarray) -> float:
        return self.omega


class AitkenRelaxation:
    """Dynamic relaxation; the first step uses `omega0`."""
    kind = TypeRelaxation.Aitken

    def __init__(self, omega0: float = 1.0, omega_cap: float | None = None):
        if not omega0 > 0:
            raise InvalidArgumentError(f"Initial relaxation must be positive, got omega0={omega0}")
        self.omega = float(omega0)
        self.omega_cap = settings.solver.omega_cap if omega_cap is None else omega_cap
        self._previous: np.ndarray | None = None

    def next(self, residual: np.ndarray) -> float:
        residual = np.asarray(residual, dtype=float)
        if self._previous is not None:
            self.omega = aitken_update(self.omega, residual, self._previous, self.omega_cap)
        self._previous = residual.copy()
        return self.omega


def make_relaxation(relaxation: TypeRelaxation | str, omega: float):
    if TypeRelaxation(relaxation) == TypeRelaxation.Aitken:
        return AitkenRelaxation(omega0=omega)
    return FixedRelaxation(omega)

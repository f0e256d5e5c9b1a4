"""Generalized eigenvalue bounds of the coupled operator and the relaxation bounds built on them."""
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from glocal.coupling.topology import CouplingScenario
from glocal.errors import ConfigurationError, InvalidArgumentError
from glocal.utils.struct import DefaultStruct

__all__ = ["SpectralBounds", "generalized_alphas", "relaxation_bounds", "spectral_bounds"]


@dataclass(frozen=True)
class SpectralBounds(DefaultStruct):
    alpha_min: float
    alpha_max: float
    max_delay: int
    epsilon: float
    omega_sync: float
    # None without delays
    omega_async_factor: float | None = None

    @property
    def default_omega(self) -> float:
        """0.9 of the async factor, or of omega_sync when there is no delay."""
        bound = self.omega_sync if self.omega_async_factor is None else self.omega_async_factor
        return 0.9 * bound


def generalized_alphas(scenario: CouplingScenario) -> tuple[float, float]:
    """Extreme roots of det(sum(hat) - a S^G) = 0, through S^G = L L^T."""
    try:
        lower = sla.cholesky(scenario.schur_global, lower=True)
    except sla.LinAlgError as e:
        raise ConfigurationError(f"{scenario.name}: global interface operator is not SPD: {e}")
    half = sla.solve_triangular(lower, scenario.hat_sum, lower=True)
    reduced = sla.solve_triangular(lower, half.T, lower=True)
    alphas = sla.eigvalsh(0.5 * (reduced + reduced.T))
    return float(alphas[0]), float(alphas[-1])


def relaxation_bounds(alpha_min: float, alpha_max: float, max_delay: int) -> SpectralBounds:
    if alpha_min <= 0 or alpha_max <= 0:
        raise InvalidArgumentError(f"alphas must be positive, got ({alpha_min}, {alpha_max})")
    if alpha_min > alpha_max:
        raise InvalidArgumentError(f"alpha_min {alpha_min} exceeds alpha_max {alpha_max}")
    if max_delay < 0:
        raise InvalidArgumentError(f"max_delay must be >= 0, got {max_delay}")
    omega_sync = 2.0 / alpha_max
    if max_delay == 0:
        return SpectralBounds(alpha_min, alpha_max, 0, 0.0, omega_sync)
    eps = min(math.sin(math.pi / (3 * max_delay)), 0.5)
    factor = (1 - eps) ** max_delay * alpha_min / ((1 + eps) ** (2 * max_delay) * alpha_max ** 2)
    return SpectralBounds(alpha_min, alpha_max, max_delay, eps, omega_sync, factor)


def spectral_bounds(scenario: CouplingScenario, max_delay: int) -> SpectralBounds:
    return relaxation_bounds(*generalized_alphas(scenario), max_delay)

from glocal.spectral.companion import (
    CompanionSystem,
    build_companion,
    companion_matrix,
    companion_polynomial,
    spectral_radius,
)
from glocal.spectral.bounds import SpectralBounds, generalized_alphas, relaxation_bounds, spectral_bounds
from glocal.spectral.certify import admissible_omega, certify_paracontraction, sample_partitions

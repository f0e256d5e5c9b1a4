"""
Named scenario generators. Each one builds a global model with Dirichlet data
on the x = 0 face, a set of zones of interest and their fine models, and hands
them to `build_scenario`.
"""
import itertools
import logging
import threading
from typing import Sequence

import numpy as np
from cachetools import LRUCache, cached

from glocal import settings
from glocal.coupling.topology import CouplingScenario, PatchDefinition, build_scenario
from glocal.errors import InvalidArgumentError
from glocal.fem.mesh import (
    MeshModel,
    apply_inclusion,
    build_structured_mesh,
    extract_submesh,
    nodes_on_plane,
    punch_hole,
)
from glocal.models.tp import TypeAlteration, TypeGeometry, TypeProblem

__all__ = [
    "chain_1d",
    "two_patch_2d",
    "cube_grid_3d",
    "imbalanced_grid",
    "make_scenario",
    "default_contrast",
]

logger = logging.getLogger(__name__)


def default_contrast(problem: TypeProblem) -> float:
    """Inclusion coefficient factor: 10x softer diffusivity, 100x softer modulus."""
    return 0.1 if TypeProblem(problem) == TypeProblem.Thermal else 0.01


def _clamp_x0(mesh: MeshModel) -> MeshModel:
    return mesh.with_dirichlet(nodes_on_plane(mesh, 0, 0.0, tol=1e-12))


def _box_mask(mesh: MeshModel, lower: Sequence[float], upper: Sequence[float]) -> np.ndarray:
    c = mesh.centroids
    return np.all((c > np.asarray(lower)) & (c < np.asarray(upper)), axis=1)


def _cells_per_unit(divisions: int, extent: float, box_size: float) -> int:
    cells = divisions * box_size / extent
    if abs(cells - round(cells)) > 1e-9 or round(cells) < 1:
        raise InvalidArgumentError(
            f"{divisions} divisions over {extent} do not align with zones of size {box_size}"
        )
    return int(round(cells))


def _fine_box(dimension: int, lower, size: float, cells: int, refinement: int,
              alteration: TypeAlteration, radius: float, contrast: float) -> MeshModel:
    n = cells * refinement
    fine = build_structured_mesh(dimension, (n,) * dimension, (size,) * dimension, origin=lower)
    centre = np.asarray(lower, dtype=float) + size / 2.0
    if alteration == TypeAlteration.Hole:
        fine = punch_hole(fine, centre, radius)
    elif alteration == TypeAlteration.Inclusion:
        fine = apply_inclusion(fine, centre, radius, contrast)
    return _clamp_x0(fine)


def _exact_copy(global_model: MeshModel, mask: np.ndarray) -> MeshModel:
    sub, _ = extract_submesh(global_model, mask)
    return sub


def _assemble_scenario(global_model: MeshModel, boxes, fine_models, problem, name) -> CouplingScenario:
    patches = [
        PatchDefinition(element_mask=_box_mask(global_model, lo, hi), fine_model=fine)
        for (lo, hi), fine in zip(boxes, fine_models)
    ]
    return build_scenario(global_model, patches, problem=TypeProblem(problem), name=name)


def chain_1d(
        problem: TypeProblem = TypeProblem.Thermal,
        n_patches: int = 2,
        cells: int = 2,
        refinement: int = 1,
        contrast: float = 1.0,
        gaps: bool = True,
        exact: bool = False,
) -> CouplingScenario:
    """
    Unit-length zones along a line. With gaps, complement and patches alternate
    (C P C P ... C); without, one complement cell block is followed by touching patches.
    """
    if TypeProblem(problem) != TypeProblem.Thermal:
        raise InvalidArgumentError("chain-1d only supports the thermal problem")
    if n_patches < 1:
        raise InvalidArgumentError("chain-1d needs at least one patch")
    starts = [2.0 * i + 1.0 for i in range(n_patches)] if gaps else [1.0 + i for i in range(n_patches)]
    length = starts[-1] + 2.0 if gaps else starts[-1] + 1.0
    global_model = _clamp_x0(build_structured_mesh(1, (int(length) * cells,), (length,)))
    boxes = [((a,), (a + 1.0,)) for a in starts]
    fines = []
    for lo, hi in boxes:
        if exact:
            fines.append(_exact_copy(global_model, _box_mask(global_model, lo, hi)))
            continue
        fine = build_structured_mesh(1, (cells * refinement,), (1.0,), origin=lo)
        fines.append(fine.with_material(fine.material.scaled(np.ones(fine.element_count, bool), contrast)))
    return _assemble_scenario(global_model, boxes, fines, problem, "chain-1d")


def two_patch_2d(
        problem: TypeProblem = TypeProblem.Thermal,
        divisions: tuple[int, int] = (16, 8),
        refinement: int = 3,
        alteration: TypeAlteration = TypeAlteration.Hole,
        radii: tuple[float, float] = (0.3, 0.2),
        contrast: float | None = None,
        exact: bool = False,
) -> CouplingScenario:
    """Plate [0,4]x[0,2] clamped at x = 0 with two unit zones of interest."""
    extent = (4.0, 2.0)
    global_model = _clamp_x0(build_structured_mesh(2, divisions, extent))
    cells = _cells_per_unit(divisions[0], extent[0], 1.0)
    _cells_per_unit(divisions[1], extent[1], 0.5)
    contrast = default_contrast(problem) if contrast is None else contrast
    boxes = [((0.5, 0.5), (1.5, 1.5)), ((2.5, 0.5), (3.5, 1.5))]
    fines = []
    for (lo, hi), radius in zip(boxes, radii):
        if exact:
            fines.append(_exact_copy(global_model, _box_mask(global_model, lo, hi)))
        else:
            fines.append(_fine_box(2, lo, 1.0, cells, refinement, TypeAlteration(alteration), radius, contrast))
    return _assemble_scenario(global_model, boxes, fines, problem, "two-patch-2d")


def _grid_boxes(shape: Sequence[int]):
    for idx in itertools.product(*[range(n) for n in reversed(shape)]):
        lo = tuple(float(i) for i in reversed(idx))
        yield lo, tuple(v + 1.0 for v in lo)


def cube_grid_3d(
        problem: TypeProblem = TypeProblem.Thermal,
        n: int = 2,
        cells: int = 2,
        refinement: int = 2,
        radius: float = 0.3,
        contrast: float | None = None,
        exact: bool = False,
) -> CouplingScenario:
    """n^3 unit patches tiling the cube, each with one softer spherical inclusion; no complement."""
    if n < 2 or n > settings.max_cube_n:
        raise InvalidArgumentError(f"cube-grid-3d supports 2 <= n <= {settings.max_cube_n}, got {n}")
    return _patch_grid(problem, (n, n, n), cells, [refinement] * n ** 3, radius,
                       default_contrast(problem) if contrast is None else contrast, exact, f"cube-grid-3d-{n}")


def imbalanced_grid(
        problem: TypeProblem = TypeProblem.Thermal,
        seed: int = 0,
        shape: tuple[int, int, int] = (4, 2, 2),
        cells: int = 2,
        max_refinement: int = 4,
        radius: float = 0.3,
        contrast: float = 1000.0,
        min_refinement: int = 1,
) -> CouplingScenario:
    """
    Box of patches with random per-patch refinement in min_refinement..max_refinement
    and stiff inclusions. Equal bounds give the balanced counterpart.
    """
    if not 1 <= min_refinement <= max_refinement:
        raise InvalidArgumentError(f"Refinement range {min_refinement}..{max_refinement} is empty")
    rng = np.random.default_rng(seed)
    n_boxes = int(np.prod(shape))
    refinements = rng.integers(min_refinement, max_refinement + 1, size=n_boxes).tolist()
    logger.info(f"imbalanced-grid seed={seed}: refinements {refinements}")
    return _patch_grid(problem, shape, cells, refinements, radius, contrast, False,
                       f"{'balanced' if min_refinement == max_refinement else 'imbalanced'}-grid-{seed}")


def _patch_grid(problem, shape, cells, refinements, radius, contrast, exact, name) -> CouplingScenario:
    extent = tuple(float(s) for s in shape)
    global_model = _clamp_x0(build_structured_mesh(3, tuple(s * cells for s in shape), extent))
    boxes = list(_grid_boxes(shape))
    fines = []
    for (lo, hi), refinement in zip(boxes, refinements):
        if exact:
            fines.append(_exact_copy(global_model, _box_mask(global_model, lo, hi)))
        else:
            fines.append(_fine_box(3, lo, 1.0, cells, refinement, TypeAlteration.Inclusion, radius, contrast))
    dofs = sum(f.node_count for f in fines) * (1 if TypeProblem(problem) == TypeProblem.Thermal else 3)
    if dofs > settings.max_dofs:
        raise InvalidArgumentError(f"{name}: {dofs} fine dofs exceed the cap of {settings.max_dofs}")
    return _assemble_scenario(global_model, boxes, fines, problem, name)


_GENERATORS = {
    TypeGeometry.Chain1D: chain_1d,
    TypeGeometry.TwoPatch2D: two_patch_2d,
    TypeGeometry.CubeGrid3D: cube_grid_3d,
    TypeGeometry.ImbalancedGrid: imbalanced_grid,
}


@cached(cache=LRUCache(maxsize=settings.scenario_cache_size), lock=threading.Lock())
def make_scenario(problem: TypeProblem, geometry: TypeGeometry, **params) -> CouplingScenario:
    """Build (or reuse) the scenario of a named generator. Parameters must be hashable."""
    generator = _GENERATORS[TypeGeometry(geometry)]
    return generator(problem=TypeProblem(problem), **params)

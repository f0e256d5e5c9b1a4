import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from glocal.basic_type import IndexArray
from glocal.errors import InvalidArgumentError
from glocal.utils.struct import DefaultStruct

__all__ = [
    "Material",
    "MeshModel",
    "build_structured_mesh",
    "extract_submesh",
    "punch_hole",
    "apply_inclusion",
    "nodes_on_plane",
]

logger = logging.getLogger(__name__)

# Nodes per element for each dimension of the structured meshes
_NODES_PER_ELEMENT = {1: 2, 2: 3, 3: 8}


@dataclass(frozen=True, eq=False)
class Material(DefaultStruct):
    """Per-element coefficients. Thermal runs read `diffusivity`, elasticity runs read the rest."""
    diffusivity: np.ndarray
    young_modulus: np.ndarray
    poisson_ratio: np.ndarray

    def __post_init__(self):
        self.validate()

    def validate(self):
        sizes = {len(self.diffusivity), len(self.young_modulus), len(self.poisson_ratio)}
        if len(sizes) != 1:
            raise InvalidArgumentError(f"Material arrays have inconsistent lengths {sorted(sizes)}")
        if np.any(~np.isfinite(self.diffusivity)) or np.any(self.diffusivity <= 0):
            raise InvalidArgumentError("Diffusivity must be strictly positive on every element")
        if np.any(~np.isfinite(self.young_modulus)) or np.any(self.young_modulus <= 0):
            raise InvalidArgumentError("Young's modulus must be strictly positive on every element")
        if np.any(self.poisson_ratio < 0) or np.any(self.poisson_ratio >= 0.5):
            raise InvalidArgumentError("Poisson ratio must lie in [0, 0.5)")

    @classmethod
    def uniform(cls, n_elements: int, diffusivity: float = 1.0, young_modulus: float = 1.0,
                poisson_ratio: float = 0.3) -> "Material":
        return cls(
            diffusivity=np.full(n_elements, float(diffusivity)),
            young_modulus=np.full(n_elements, float(young_modulus)),
            poisson_ratio=np.full(n_elements, float(poisson_ratio)),
        )

    def subset(self, element_mask: np.ndarray) -> "Material":
        return Material(
            diffusivity=self.diffusivity[element_mask],
            young_modulus=self.young_modulus[element_mask],
            poisson_ratio=self.poisson_ratio[element_mask],
        )

    def scaled(self, element_mask: np.ndarray, factor: float) -> "Material":
        """Multiply diffusivity and Young's modulus by `factor` on the masked elements."""
        scale = np.where(element_mask, float(factor), 1.0)
        return Material(
            diffusivity=self.diffusivity * scale,
            young_modulus=self.young_modulus * scale,
            poisson_ratio=self.poisson_ratio.copy(),
        )

    def __len__(self):
        return len(self.diffusivity)


@dataclass(frozen=True, eq=False)
class MeshModel(DefaultStruct):
    dimension: int
    nodes: np.ndarray
    elements: np.ndarray
    material: Material
    dirichlet_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    dirichlet_values: np.ndarray | None = None

    def __post_init__(self):
        if self.dirichlet_values is None:
            object.__setattr__(self, "dirichlet_values", np.zeros(len(self.dirichlet_nodes)))
        self.validate()

    def validate(self):
        if self.dimension not in _NODES_PER_ELEMENT:
            raise InvalidArgumentError(f"Unsupported dimension {self.dimension}")
        if self.nodes.ndim != 2 or self.nodes.shape[1] != self.dimension:
            raise InvalidArgumentError(f"Nodes must be an (n, {self.dimension}) array, got {self.nodes.shape}")
        if self.elements.ndim != 2 or self.elements.shape[1] != _NODES_PER_ELEMENT[self.dimension]:
            raise InvalidArgumentError(
                f"Elements of a {self.dimension}D mesh need {_NODES_PER_ELEMENT[self.dimension]} nodes each"
            )
        if self.elements.size and (self.elements.min() < 0 or self.elements.max() >= self.node_count):
            raise InvalidArgumentError("Element refers to a node index outside the mesh")
        if self.elements.size:
            ordered = np.sort(self.elements, axis=1)
            if np.any(ordered[:, 1:] == ordered[:, :-1]):
                raise InvalidArgumentError("Element lists the same node twice")
        if len(self.material) != len(self.elements):
            raise InvalidArgumentError(
                f"Material has {len(self.material)} entries for {len(self.elements)} elements"
            )
        if len(self.dirichlet_values) != len(self.dirichlet_nodes):
            raise InvalidArgumentError("One Dirichlet value is needed per constrained node")
        if self.dirichlet_nodes.size and (self.dirichlet_nodes.min() < 0
                                          or self.dirichlet_nodes.max() >= self.node_count):
            raise InvalidArgumentError("Dirichlet node index outside the mesh")

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def element_count(self) -> int:
        return len(self.elements)

    @property
    def centroids(self) -> np.ndarray:
        return self.nodes[self.elements].mean(axis=1)

    def with_dirichlet(self, nodes: Sequence[int] | IndexArray, values: float | np.ndarray = 0.0) -> "MeshModel":
        """Constrain `nodes`. Values are a scalar, one per node, or one row of components per node."""
        nodes = np.asarray(nodes, dtype=int)
        values = np.asarray(values, dtype=float)
        if values.ndim == 0:
            values = np.full(len(nodes), float(values))
        unique, first = np.unique(nodes, return_index=True)
        return replace(self, dirichlet_nodes=unique, dirichlet_values=values[first])

    def with_material(self, material: Material) -> "MeshModel":
        return replace(self, material=material)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.nodes.min(axis=0), self.nodes.max(axis=0)


def build_structured_mesh(
        dimension: int,
        divisions: Sequence[int],
        extent: Sequence[float],
        origin: Sequence[float] | None = None,
        material: Material | None = None,
) -> MeshModel:
    """
    Tensor-product grid with lexicographic node numbering (x fastest).
    1D gives intervals, 2D splits each cell into two triangles along the same
    diagonal, 3D keeps trilinear hexahedra.
    """
    if dimension not in _NODES_PER_ELEMENT:
        raise InvalidArgumentError(f"Dimension must be 1, 2 or 3, got {dimension}")
    divisions = tuple(int(d) for d in divisions)
    extent = tuple(float(e) for e in extent)
    origin = tuple(float(o) for o in origin) if origin is not None else (0.0,) * dimension
    if len(divisions) != dimension or len(extent) != dimension or len(origin) != dimension:
        raise InvalidArgumentError(f"Divisions, extent and origin need {dimension} entries each")
    if any(d < 1 for d in divisions):
        raise InvalidArgumentError(f"All divisions must be >= 1, got {divisions}")
    if any(e <= 0 for e in extent):
        raise InvalidArgumentError(f"All extents must be > 0, got {extent}")

    axes = [origin[a] + np.linspace(0.0, extent[a], divisions[a] + 1) for a in range(dimension)]
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.column_stack([g.ravel(order="F") for g in grids])

    shape = tuple(d + 1 for d in divisions)
    cells = np.meshgrid(*[np.arange(d) for d in divisions], indexing="ij")
    corner = [c.ravel(order="F") for c in cells]

    def nid(*offsets):
        idx = [corner[a] + offsets[a] for a in range(dimension)]
        return np.ravel_multi_index(idx, shape, order="F")

    if dimension == 1:
        elements = np.column_stack([nid(0), nid(1)])
    elif dimension == 2:
        n0, n1, n2, n3 = nid(0, 0), nid(1, 0), nid(1, 1), nid(0, 1)
        lower = np.column_stack([n0, n1, n2])
        upper = np.column_stack([n0, n2, n3])
        elements = np.stack([lower, upper], axis=1).reshape(-1, 3)
    else:
        elements = np.column_stack([
            nid(0, 0, 0), nid(1, 0, 0), nid(1, 1, 0), nid(0, 1, 0),
            nid(0, 0, 1), nid(1, 0, 1), nid(1, 1, 1), nid(0, 1, 1),
        ])

    if material is None:
        material = Material.uniform(len(elements))
    return MeshModel(dimension=dimension, nodes=nodes, elements=elements.astype(int), material=material)


def extract_submesh(mesh: MeshModel, element_mask: np.ndarray) -> tuple[MeshModel, np.ndarray]:
    """
    Keep the masked elements and the nodes they use. Node order is preserved.
    Returns the new mesh and, for each of its nodes, the parent node index.
    """
    element_mask = np.asarray(element_mask, dtype=bool)
    if not element_mask.any():
        raise InvalidArgumentError("Submesh selection is empty")
    kept = mesh.elements[element_mask]
    parent_nodes = np.unique(kept)
    renumber = np.full(mesh.node_count, -1, dtype=int)
    renumber[parent_nodes] = np.arange(len(parent_nodes))

    in_sub = renumber[mesh.dirichlet_nodes] >= 0
    sub = MeshModel(
        dimension=mesh.dimension,
        nodes=mesh.nodes[parent_nodes],
        elements=renumber[kept],
        material=mesh.material.subset(element_mask),
        dirichlet_nodes=renumber[mesh.dirichlet_nodes[in_sub]],
        dirichlet_values=mesh.dirichlet_values[in_sub],
    )
    return sub, parent_nodes


def _inside_ball(mesh: MeshModel, center: Sequence[float], radius: float) -> np.ndarray:
    offset = mesh.centroids - np.asarray(center, dtype=float)
    return np.einsum("ij,ij->i", offset, offset) < radius ** 2


def punch_hole(mesh: MeshModel, center: Sequence[float], radius: float) -> MeshModel:
    """Remove the elements whose centroid lies inside the ball, leaving a free boundary."""
    inside = _inside_ball(mesh, center, radius)
    if inside.all():
        raise InvalidArgumentError("Hole removes the whole mesh")
    logger.debug(f"Punching hole at {tuple(center)} r={radius}: {int(inside.sum())} elements removed")
    holed, _ = extract_submesh(mesh, ~inside)
    return holed


def apply_inclusion(mesh: MeshModel, center: Sequence[float], radius: float, factor: float) -> MeshModel:
    """Scale the coefficients of the elements whose centroid lies inside the ball."""
    inside = _inside_ball(mesh, center, radius)
    return mesh.with_material(mesh.material.scaled(inside, factor))


def nodes_on_plane(mesh: MeshModel, axis: int, value: float, tol: float = 1e-9) -> np.ndarray:
    return np.flatnonzero(np.abs(mesh.nodes[:, axis] - value) <= tol)

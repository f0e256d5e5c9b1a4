import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from glocal.basic_type import IndexArray, SparseMatrix
from glocal.errors import InvalidArgumentError
from glocal.fem import elements as el
from glocal.fem.mesh import MeshModel
from glocal.utils.struct import DefaultStruct

__all__ = [
    "AssembledSystem",
    "assemble_poisson",
    "assemble_elasticity",
    "element_dofs",
    "element_stresses",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AssembledSystem(DefaultStruct):
    """
    Stiffness and load restricted to the free dofs. `dof_map[node, c]` is the
    free-dof index of component c at `node`, or -1 when that dof is constrained.
    """
    stiffness: sp.csr_matrix
    load: np.ndarray
    dof_map: np.ndarray
    constrained_dofs: np.ndarray
    constrained_values: np.ndarray
    # K_fc, kept to rebuild reactions and lift non-homogeneous data
    coupling_block: sp.csr_matrix

    def __post_init__(self):
        self.validate()

    def validate(self):
        n = self.stiffness.shape[0]
        if self.stiffness.shape != (n, n):
            raise InvalidArgumentError(f"Stiffness must be square, got {self.stiffness.shape}")
        if self.load.shape != (n,):
            raise InvalidArgumentError(f"Load has length {len(self.load)} for {n} dofs")
        if n:
            scale = abs(self.stiffness).max()
            asym = abs(self.stiffness - self.stiffness.T).max() if scale > 0 else 0.0
            if asym > 1e-12 * scale:
                raise InvalidArgumentError(f"Stiffness is not symmetric (max |K - K^T| = {asym:.3e})")

    @property
    def size(self) -> int:
        return self.stiffness.shape[0]

    @property
    def dofs_per_node(self) -> int:
        return self.dof_map.shape[1]

    @property
    def full_size(self) -> int:
        return self.dof_map.size

    @property
    def free_dofs(self) -> np.ndarray:
        """Full (node * dofs_per_node + c) index of each free dof."""
        return np.flatnonzero(self.dof_map.ravel() >= 0)

    def node_dofs(self, nodes: Sequence[int] | np.ndarray) -> np.ndarray:
        """Free dofs at `nodes`, node-major then component; constrained ones skipped."""
        dofs = self.dof_map[np.asarray(nodes, dtype=int)].ravel()
        return dofs[dofs >= 0]

    def solve(self) -> np.ndarray:
        return spla.spsolve(self.stiffness.tocsc(), self.load)

    def expand(self, u_free: np.ndarray) -> np.ndarray:
        """Full nodal field (n_nodes, dofs_per_node) including the Dirichlet values."""
        full = np.zeros(self.full_size)
        full[self.free_dofs] = u_free
        full[self.constrained_dofs] = self.constrained_values
        return full.reshape(self.dof_map.shape)

    def energy(self, u_free: np.ndarray) -> float:
        return float(u_free @ (self.stiffness @ u_free))


def element_dofs(mesh: MeshModel, dofs_per_node: int) -> np.ndarray:
    """Interleaved full dof indices per element, (m, k * dofs_per_node)."""
    e = mesh.elements[:, :, None] * dofs_per_node + np.arange(dofs_per_node)
    return e.reshape(len(mesh.elements), -1)


def _assemble_matrix(edofs: IndexArray, blocks: np.ndarray, size: int) -> SparseMatrix:
    rows = np.repeat(edofs, edofs.shape[1], axis=1).ravel()
    cols = np.tile(edofs, (1, edofs.shape[1])).ravel()
    k = sp.coo_matrix((blocks.ravel(), (rows, cols)), shape=(size, size)).tocsr()
    # exact symmetry despite summation order
    return ((k + k.T) * 0.5).tocsr()


def _eliminate(mesh: MeshModel, k_full: sp.csr_matrix, f_full: np.ndarray, dofs_per_node: int) -> AssembledSystem:
    n_nodes = mesh.node_count
    constrained_nodes = mesh.dirichlet_nodes
    constrained = (constrained_nodes[:, None] * dofs_per_node + np.arange(dofs_per_node)).ravel()
    if mesh.dirichlet_values.ndim == 2:
        if mesh.dirichlet_values.shape[1] != dofs_per_node:
            raise InvalidArgumentError(
                f"Dirichlet values carry {mesh.dirichlet_values.shape[1]} components, need {dofs_per_node}"
            )
        values = mesh.dirichlet_values.ravel()
    else:
        values = np.repeat(mesh.dirichlet_values, dofs_per_node)

    is_free = np.ones(n_nodes * dofs_per_node, dtype=bool)
    is_free[constrained] = False
    free = np.flatnonzero(is_free)
    dof_map = np.full(n_nodes * dofs_per_node, -1, dtype=int)
    dof_map[free] = np.arange(len(free))

    k_ff = k_full[free][:, free].tocsr()
    k_fc = k_full[free][:, constrained].tocsr()
    load = f_full[free] - k_fc @ values
    return AssembledSystem(
        stiffness=k_ff,
        load=load,
        dof_map=dof_map.reshape(n_nodes, dofs_per_node),
        constrained_dofs=constrained,
        constrained_values=values,
        coupling_block=k_fc,
    )


def assemble_poisson(mesh: MeshModel, source: float = 1.0) -> AssembledSystem:
    """P1 (intervals, triangles) or Q1 (hexahedra) diffusion with a lumped uniform source."""
    coords = mesh.nodes[mesh.elements]
    blocks = el.diffusion_matrices(coords, mesh.material.diffusivity, mesh.dimension)
    edofs = element_dofs(mesh, 1)
    k_full = _assemble_matrix(edofs, blocks, mesh.node_count)

    weights = el.basis_integrals(coords, mesh.dimension) * float(source)
    f_full = np.bincount(edofs.ravel(), weights=weights.ravel(), minlength=mesh.node_count)
    return _eliminate(mesh, k_full, f_full, 1)


def assemble_elasticity(mesh: MeshModel, body_force: Sequence[float]) -> AssembledSystem:
    """Isotropic linear elasticity, plane strain in 2D, lumped body force."""
    if mesh.dimension not in (2, 3):
        raise InvalidArgumentError(f"Elasticity needs a 2D or 3D mesh, got dimension {mesh.dimension}")
    body_force = np.asarray(body_force, dtype=float)
    if body_force.shape != (mesh.dimension,):
        raise InvalidArgumentError(f"Body force must have {mesh.dimension} components")
    d = mesh.dimension
    coords = mesh.nodes[mesh.elements]
    blocks = el.elasticity_matrices(coords, mesh.material.young_modulus, mesh.material.poisson_ratio, d)
    edofs = element_dofs(mesh, d)
    size = mesh.node_count * d
    k_full = _assemble_matrix(edofs, blocks, size)

    weights = el.basis_integrals(coords, d)
    nodal = weights[:, :, None] * body_force[None, None, :]
    f_full = np.bincount(edofs.ravel(), weights=nodal.ravel(), minlength=size)
    return _eliminate(mesh, k_full, f_full, d)


def element_stresses(mesh: MeshModel, displacement: np.ndarray) -> np.ndarray:
    """Voigt stresses at the element centre, (m, 3) in 2D and (m, 6) in 3D."""
    d = mesh.dimension
    u = np.asarray(displacement, dtype=float).reshape(mesh.node_count, d)
    coords = mesh.nodes[mesh.elements]
    if d == 2:
        grads, _ = el.triangle_gradients(coords)
        grads = grads[:, None]
    else:
        dn = el.hex_shape_derivatives(np.zeros((1, 3)))
        jac = np.einsum("qka,mkb->mqab", dn, coords)
        grads = np.einsum("mqab,qkb->mqka", np.linalg.inv(jac), dn)
    b = el.strain_operator(grads, d)[:, 0]
    strain = np.einsum("mvi,mi->mv", b, u[mesh.elements].reshape(len(mesh.elements), -1))
    dmat = el.elasticity_matrix(mesh.material.young_modulus, mesh.material.poisson_ratio, d)
    return np.einsum("mvw,mw->mv", dmat, strain)

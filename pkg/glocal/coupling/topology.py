import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from glocal import settings
from glocal.basic_type import DenseMatrix
from glocal.coupling.condensation import CondensedOperator, condense, dirichlet_to_neumann, expand_interior
from glocal.coupling.transfer import build_transfer, element_facets, locate_on_facets
from glocal.errors import ConfigurationError, GeometryError, InvalidArgumentError, TopologyError
from glocal.fem.assembly import AssembledSystem, assemble_elasticity, assemble_poisson
from glocal.fem.mesh import MeshModel, extract_submesh
from glocal.models.tp import TypeProblem
from glocal.utils.dc import timing
from glocal.utils.struct import DefaultStruct

__all__ = [
    "PatchDefinition",
    "PatchPair",
    "ComplementDomain",
    "SubdomainOperators",
    "CouplingScenario",
    "build_assembly_operators",
    "assemble_global_schur",
    "hat_fine_operator",
    "hat_rhs",
    "build_scenario",
    "recover_fields",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PatchDefinition:
    """A zone of interest: which global elements it covers and the fine model replacing them."""
    element_mask: np.ndarray
    fine_model: MeshModel


@dataclass(frozen=True, eq=False)
class PatchPair(DefaultStruct):
    id: int
    global_part: MeshModel
    fine_part: MeshModel
    interface_nodes_global: np.ndarray
    interface_nodes_fine: np.ndarray
    # node of global_part -> node of the global model
    parent_nodes: np.ndarray


@dataclass(frozen=True, eq=False)
class ComplementDomain(DefaultStruct):
    model: MeshModel | None
    interface_nodes: np.ndarray
    parent_nodes: np.ndarray | None = None

    @property
    def present(self) -> bool:
        return self.model is not None


@dataclass(frozen=True, eq=False)
class SubdomainOperators:
    """
    Everything one subdomain contributes to the coupled residual. Subdomain 0 is
    the complement, whose fine side is its own global restriction.
    """
    id: int
    assembly: sp.csr_matrix
    gamma_index: np.ndarray
    transfer: sp.csr_matrix
    # fine interface trace = transfer @ u_s + offset (constrained neighbours)
    offset: np.ndarray
    global_condensed: CondensedOperator
    fine_condensed: CondensedOperator
    global_system: AssembledSystem
    fine_system: AssembledSystem

    @property
    def is_complement(self) -> bool:
        return self.id == 0

    def fine_trace(self, u_gamma: np.ndarray) -> np.ndarray:
        return self.transfer @ u_gamma[self.gamma_index] + self.offset

    def reaction(self, u_gamma: np.ndarray) -> np.ndarray:
        """Projected reaction J^T (S^F (J A^T u + g) - b^F), local to the subdomain interface."""
        return self.transfer.T @ dirichlet_to_neumann(self.fine_condensed, self.fine_trace(u_gamma))

    def fine_solve(self, u_gamma: np.ndarray) -> np.ndarray:
        """Free dofs of the fine model under the Dirichlet trace of u_gamma (interior recovered)."""
        return expand_interior(self.fine_condensed, self.fine_trace(u_gamma))

    def field_reaction(self, field: np.ndarray) -> np.ndarray:
        """Projected reaction read off a full fine field: J^T ((K u)_g - f_g)."""
        op = self.fine_condensed
        residual = self.fine_system.stiffness @ field - self.fine_system.load
        return self.transfer.T @ residual[op.interface]


@dataclass(frozen=True, eq=False)
class CouplingScenario:
    name: str
    problem: TypeProblem
    global_model: MeshModel
    global_system: AssembledSystem
    patches: list[PatchPair]
    complement: ComplementDomain
    # free dofs of the global system lying on the interface, and their nodes
    gamma_dofs: np.ndarray
    gamma_nodes: np.ndarray
    subdomains: list[SubdomainOperators]
    schur_global: np.ndarray = field(repr=False)
    rhs_global: np.ndarray = field(repr=False)
    schur_factor: tuple = field(repr=False)

    @property
    def interface_size(self) -> int:
        return len(self.gamma_dofs)

    @property
    def n_patches(self) -> int:
        return len(self.patches)

    @property
    def has_complement(self) -> bool:
        return self.complement.present

    @property
    def subdomain_ids(self) -> list[int]:
        return [sd.id for sd in self.subdomains]

    @property
    def assembly_ops(self) -> list[sp.csr_matrix]:
        return [sd.assembly for sd in self.subdomains]

    @property
    def transfer_ops(self) -> list[sp.csr_matrix]:
        return [sd.transfer for sd in self.subdomains if not sd.is_complement]

    @property
    def condensed(self) -> list[tuple[CondensedOperator, CondensedOperator]]:
        return [(sd.global_condensed, sd.fine_condensed) for sd in self.subdomains]

    def solve_global(self, rhs: np.ndarray) -> np.ndarray:
        return sla.cho_solve(self.schur_factor, rhs)

    @cached_property
    def hat_operators(self) -> list[np.ndarray]:
        return [
            hat_fine_operator(sd.fine_condensed.schur, sd.assembly, sd.transfer)
            for sd in self.subdomains
        ]

    @cached_property
    def hat_sum(self) -> np.ndarray:
        return np.sum(self.hat_operators, axis=0)

    @cached_property
    def hat_rhs(self) -> np.ndarray:
        return hat_rhs(self)

    @property
    def fine_dof_count(self) -> int:
        return sum(sd.fine_system.size for sd in self.subdomains)


def build_assembly_operators(
        subdomain_interfaces: Sequence[Sequence[int] | np.ndarray],
        gamma: Sequence[int] | np.ndarray | None = None,
) -> list[sp.csr_matrix]:
    """
    Boolean injections A^s from each subdomain's interface numbering into the
    global interface numbering. Entries are global keys (node or dof ids).
    """
    keys = [np.asarray(k, dtype=int) for k in subdomain_interfaces]
    if gamma is None:
        gamma = np.unique(np.concatenate(keys)) if keys else np.zeros(0, dtype=int)
    gamma = np.asarray(gamma, dtype=int)
    position = {int(k): i for i, k in enumerate(gamma)}
    covered = np.zeros(len(gamma), dtype=bool)

    ops = []
    for s, local in enumerate(keys):
        try:
            rows = np.array([position[int(k)] for k in local], dtype=int)
        except KeyError as e:
            raise TopologyError(f"Interface entry {e.args[0]} of subdomain {s} is not on the global interface")
        covered[rows] = True
        ops.append(sp.csr_matrix(
            (np.ones(len(rows)), (rows, np.arange(len(rows)))),
            shape=(len(gamma), len(rows)),
        ))
    if not covered.all():
        raise TopologyError(f"{int((~covered).sum())} global interface entries belong to no subdomain")
    return ops


def _sum_schur(subdomains: Sequence[SubdomainOperators], n: int) -> tuple[np.ndarray, np.ndarray]:
    schur = np.zeros((n, n))
    rhs = np.zeros(n)
    for sd in subdomains:
        idx = sd.gamma_index
        schur[np.ix_(idx, idx)] += sd.global_condensed.schur
        rhs[idx] += sd.global_condensed.rhs
    return 0.5 * (schur + schur.T), rhs


def _factor_global(schur: np.ndarray) -> tuple:
    try:
        return sla.cho_factor(schur, lower=True)
    except (sla.LinAlgError, ValueError) as e:
        raise ConfigurationError(f"Assembled global interface operator is not SPD (missing Dirichlet data?): {e}")


def assemble_global_schur(scenario: CouplingScenario) -> tuple[np.ndarray, np.ndarray]:
    """S^G = sum A^s S^{s,G} A^sT and b^G = sum A^s b^{s,G}, checked SPD."""
    schur, rhs = _sum_schur(scenario.subdomains, scenario.interface_size)
    _factor_global(schur)
    return schur, rhs


def hat_fine_operator(schur_fine: DenseMatrix, assembly: sp.spmatrix, transfer: sp.spmatrix) -> DenseMatrix:
    """A^s J^sT S^{s,F} J^s A^sT as a dense matrix on the global interface."""
    schur_fine = np.asarray(schur_fine, dtype=float)
    if transfer.shape[0] != schur_fine.shape[0]:
        raise InvalidArgumentError(
            f"Transfer has {transfer.shape[0]} rows but the fine Schur complement is {schur_fine.shape}"
        )
    if assembly.shape[1] != transfer.shape[1]:
        raise InvalidArgumentError(
            f"Assembly operator has {assembly.shape[1]} columns, transfer has {transfer.shape[1]}"
        )
    j = transfer.toarray()
    local = j.T @ schur_fine @ j
    spread = assembly @ local
    hat = np.asarray((assembly @ spread.T).T)
    return 0.5 * (hat + hat.T)


def hat_rhs(scenario: CouplingScenario) -> np.ndarray:
    """b_hat = sum A^s J^sT (S^{s,F} J^s A^sT S^G^-1 b^G - b^{s,F})."""
    u0 = scenario.solve_global(scenario.rhs_global)
    total = np.zeros(scenario.interface_size)
    for sd in scenario.subdomains:
        total += sd.assembly @ sd.reaction(u0)
    return total


def recover_fields(scenario: CouplingScenario, u_gamma: np.ndarray) -> list[np.ndarray]:
    """Nodal fields of every subdomain's fine model (complement first) for an interface trace."""
    u_gamma = np.asarray(u_gamma, dtype=float)
    fields = []
    for sd in scenario.subdomains:
        free = np.zeros(sd.fine_system.size)
        op = sd.fine_condensed
        full = expand_interior(op, sd.fine_trace(u_gamma))
        free[op.interface] = full[op.interface]
        free[op.interior] = full[op.interior]
        fields.append(sd.fine_system.expand(free))
    return fields


def _assemble(model: MeshModel, problem: TypeProblem, source: float, body_force: Sequence[float] | None):
    if problem == TypeProblem.Thermal:
        return assemble_poisson(model, source)
    if body_force is None:
        body_force = np.zeros(model.dimension)
        body_force[-1] = -1.0
    return assemble_elasticity(model, body_force)


def _interface_facets(mesh: MeshModel, owner: np.ndarray, is_gamma: np.ndarray) -> dict[int, list[np.ndarray]]:
    """Facets shared by elements of two different subdomains, grouped per subdomain."""
    facets = element_facets(mesh)
    n_local = facets.shape[0] // mesh.element_count
    facet_owner = np.repeat(owner, n_local)
    on_gamma = is_gamma[facets].all(axis=1)
    facets, facet_owner = facets[on_gamma], facet_owner[on_gamma]

    keys = np.sort(facets, axis=1)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    groups: dict[int, set[int]] = {}
    for k, s in zip(inverse, facet_owner):
        groups.setdefault(int(k), set()).add(int(s))

    per_subdomain: dict[int, list[np.ndarray]] = {}
    seen: set[tuple[int, int]] = set()
    for facet, k, s in zip(facets, inverse, facet_owner):
        if len(groups[int(k)]) < 2 or (int(k), int(s)) in seen:
            continue
        seen.add((int(k), int(s)))
        per_subdomain.setdefault(int(s), []).append(facet)
    return per_subdomain


def _dof_transfer(node_transfer: sp.csr_matrix, dofs_per_node: int,
                  fine_map: np.ndarray, global_map: np.ndarray,
                  global_values: np.ndarray) -> tuple[sp.csr_matrix, np.ndarray, np.ndarray]:
    """
    Expand a nodal transfer to dofs. Returns J on free dofs, the offset coming
    from constrained global columns, and the fine interface free dofs (row order).
    """
    expanded = sp.kron(node_transfer, sp.identity(dofs_per_node), format="csr")
    fine_flat = fine_map.ravel()
    global_flat = global_map.ravel()
    rows = np.flatnonzero(fine_flat >= 0)
    free_cols = np.flatnonzero(global_flat >= 0)
    fixed_cols = np.flatnonzero(global_flat < 0)
    j_rows = expanded[rows]
    offset = j_rows[:, fixed_cols] @ global_values.ravel()[fixed_cols]
    return j_rows[:, free_cols].tocsr(), np.asarray(offset).ravel(), fine_flat[rows]


@timing
def build_scenario(
        global_model: MeshModel,
        patches: Sequence[PatchDefinition],
        problem: TypeProblem = TypeProblem.Thermal,
        source: float = 1.0,
        body_force: Sequence[float] | None = None,
        name: str = "scenario",
        tol: float | None = None,
) -> CouplingScenario:
    """
    Decompose the global model into the patch zones and their complement,
    condense every subdomain on its interface and assemble the global
    interface operator.
    """
    tol = settings.geometry_tol if tol is None else tol
    if len(global_model.dirichlet_nodes) == 0:
        raise ConfigurationError("The global model needs its own Dirichlet set")
    if not patches:
        raise TopologyError("A coupling scenario needs at least one patch")

    global_system = _assemble(global_model, problem, source, body_force)
    dpn = global_system.dofs_per_node
    full_values = global_system.expand(np.zeros(global_system.size))

    owner = np.zeros(global_model.element_count, dtype=int)
    for s, patch in enumerate(patches, start=1):
        mask = np.asarray(patch.element_mask, dtype=bool)
        if not mask.any():
            raise TopologyError(f"Patch {s} covers no global element")
        if np.any(owner[mask] != 0):
            raise TopologyError(f"Patch {s} overlaps another patch")
        owner[mask] = s
    has_complement = bool(np.any(owner == 0))
    ids = ([0] if has_complement else []) + list(range(1, len(patches) + 1))

    multiplicity = np.zeros(global_model.node_count, dtype=int)
    for s in ids:
        multiplicity[np.unique(global_model.elements[owner == s])] += 1
    is_gamma = multiplicity >= 2
    gamma_nodes_all = np.flatnonzero(is_gamma)
    if gamma_nodes_all.size == 0:
        raise TopologyError("Subdomains share no interface node")
    gamma_dofs = global_system.node_dofs(gamma_nodes_all)
    if gamma_dofs.size == 0:
        raise TopologyError("Every interface dof is constrained")
    gamma_nodes = np.repeat(gamma_nodes_all, dpn)[global_system.dof_map[gamma_nodes_all].ravel() >= 0]
    facets = _interface_facets(global_model, owner, is_gamma)
    extent = float(np.ptp(global_model.nodes, axis=0).max())
    atol = tol * extent

    keys, partial = [], []
    pairs: list[PatchPair] = []
    complement = ComplementDomain(model=None, interface_nodes=np.zeros(0, dtype=int))
    for s in ids:
        sub, parents = extract_submesh(global_model, owner == s)
        sys_g = _assemble(sub, problem, source, body_force)
        iface_nodes = np.flatnonzero(is_gamma[parents])
        iface_dofs = sys_g.node_dofs(iface_nodes)
        keys.append(global_system.node_dofs(parents[iface_nodes]))
        cond_g = condense(sys_g, iface_dofs, name=f"{name}: global part of subdomain {s}")

        if s == 0:
            complement = ComplementDomain(model=sub, interface_nodes=iface_nodes, parent_nodes=parents)
            identity = sp.identity(len(iface_dofs), format="csr")
            partial.append((s, identity, np.zeros(len(iface_dofs)), cond_g, cond_g, sys_g, sys_g))
            continue

        fine = patches[s - 1].fine_model
        sys_f = _assemble(fine, problem, source, body_force)
        gamma_coords = global_model.nodes[parents[iface_nodes]]
        local_of = {int(p): i for i, p in enumerate(parents[iface_nodes])}
        local_facets = [np.array([local_of[int(n)] for n in f]) for f in facets.get(s, [])]

        tree_hit = locate_on_facets(fine.nodes, [gamma_coords[f] for f in local_facets], atol)
        point_hit = locate_on_facets(fine.nodes, [c[None, :] for c in gamma_coords], atol)
        fine_iface = np.flatnonzero(tree_hit | point_hit)
        covered = locate_on_facets(gamma_coords, [c[None, :] for c in fine.nodes[fine_iface]], atol)
        if not covered.all():
            raise GeometryError(
                f"Fine patch {s} does not reproduce the global interface: "
                f"{int((~covered).sum())} global interface node(s) have no fine counterpart"
            )
        node_j = build_transfer(gamma_coords, fine.nodes[fine_iface], facets=local_facets, tol=tol)
        transfer, offset, fine_dofs = _dof_transfer(
            node_j, dpn,
            sys_f.dof_map[fine_iface], sys_g.dof_map[iface_nodes],
            full_values[parents[iface_nodes]],
        )
        cond_f = condense(sys_f, fine_dofs, name=f"{name}: fine patch {s}")
        pairs.append(PatchPair(
            id=s,
            global_part=sub,
            fine_part=fine,
            interface_nodes_global=iface_nodes,
            interface_nodes_fine=fine_iface,
            parent_nodes=parents,
        ))
        partial.append((s, transfer, offset, cond_g, cond_f, sys_g, sys_f))

    assembly = build_assembly_operators(keys, gamma_dofs)
    subdomains = [
        SubdomainOperators(
            id=s,
            assembly=a,
            # one entry per column: the row of each local interface dof
            gamma_index=a.tocsc().indices.astype(int),
            transfer=j,
            offset=g,
            global_condensed=cg,
            fine_condensed=cf,
            global_system=sg,
            fine_system=sf,
        )
        for a, (s, j, g, cg, cf, sg, sf) in zip(assembly, partial)
    ]
    schur, rhs = _sum_schur(subdomains, len(gamma_dofs))
    factor = _factor_global(schur)
    logger.info(
        f"Scenario '{name}': {len(pairs)} patches, complement={'yes' if has_complement else 'no'}, "
        f"|Gamma|={len(gamma_dofs)}, global dofs={global_system.size}, "
        f"fine dofs={sum(sd.fine_system.size for sd in subdomains)}"
    )
    return CouplingScenario(
        name=name,
        problem=TypeProblem(problem),
        global_model=global_model,
        global_system=global_system,
        patches=pairs,
        complement=complement,
        gamma_dofs=gamma_dofs,
        gamma_nodes=gamma_nodes,
        subdomains=subdomains,
        schur_global=schur,
        rhs_global=rhs,
        schur_factor=factor,
    )

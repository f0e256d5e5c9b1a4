import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from glocal.basic_type import IndexArray, Vector
from glocal.errors import InvalidArgumentError, SingularInteriorError
from glocal.fem.assembly import AssembledSystem
from glocal.utils.struct import DefaultStruct

__all__ = [
    "CondensedOperator",
    "condense",
    "condense_matrix",
    "dirichlet_to_neumann",
    "expand_interior",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CondensedOperator(DefaultStruct):
    """Schur complement of a system onto its interface dofs, with the interior Cholesky factor kept."""
    name: str
    schur: np.ndarray
    rhs: np.ndarray
    interface: np.ndarray
    interior: np.ndarray
    # (factor, lower) as returned by scipy.linalg.cho_factor, None for an empty interior
    interior_factorization: tuple | None
    interior_coupling: np.ndarray
    interior_load: np.ndarray

    @property
    def size(self) -> int:
        return len(self.interface)

    @property
    def dof_count(self) -> int:
        return len(self.interface) + len(self.interior)

    def _check(self, u_interface: np.ndarray) -> np.ndarray:
        u = np.asarray(u_interface, dtype=float)
        if u.shape != (self.size,):
            raise InvalidArgumentError(
                f"{self.name}: interface vector has shape {u.shape}, expected ({self.size},)"
            )
        return u


def condense_matrix(
        stiffness: np.ndarray | sp.spmatrix,
        load: np.ndarray,
        interface_dofs: Sequence[int] | np.ndarray,
        name: str = "subdomain",
) -> CondensedOperator:
    """S = K_gg - K_gi K_ii^-1 K_ig and b = f_g - K_gi K_ii^-1 f_i."""
    k = sp.csr_matrix(stiffness)
    f = np.asarray(load, dtype=float)
    n = k.shape[0]
    interface = np.asarray(interface_dofs, dtype=int)
    if interface.size and (interface.min() < 0 or interface.max() >= n):
        raise InvalidArgumentError(f"{name}: interface dof outside 0..{n - 1}")
    if len(np.unique(interface)) != len(interface):
        raise InvalidArgumentError(f"{name}: interface dofs listed twice")
    interior = np.setdiff1d(np.arange(n), interface)

    k_gg = k[interface][:, interface].toarray()
    f_g = f[interface]
    if interior.size == 0:
        return CondensedOperator(
            name=name,
            schur=0.5 * (k_gg + k_gg.T),
            rhs=f_g.copy(),
            interface=interface,
            interior=interior,
            interior_factorization=None,
            interior_coupling=np.zeros((0, len(interface))),
            interior_load=np.zeros(0),
        )

    k_ii = k[interior][:, interior].toarray()
    k_ig = k[interior][:, interface].toarray()
    f_i = f[interior]
    try:
        factor = sla.cho_factor(k_ii, lower=True, check_finite=True)
    except (sla.LinAlgError, ValueError) as e:
        raise SingularInteriorError(name, str(e)) from e

    x = sla.cho_solve(factor, k_ig)
    y = sla.cho_solve(factor, f_i)
    schur = k_gg - k_ig.T @ x
    logger.debug(f"Condensed {name}: {len(interface)} interface / {len(interior)} interior dofs")
    return CondensedOperator(
        name=name,
        schur=0.5 * (schur + schur.T),
        rhs=f_g - k_ig.T @ y,
        interface=interface,
        interior=interior,
        interior_factorization=factor,
        interior_coupling=k_ig,
        interior_load=f_i,
    )


def condense(system: AssembledSystem, interface_dofs: Sequence[int] | IndexArray,
             name: str = "subdomain") -> CondensedOperator:
    return condense_matrix(system.stiffness, system.load, interface_dofs, name=name)


def dirichlet_to_neumann(op: CondensedOperator, u_interface: Vector) -> Vector:
    """Nodal reaction lambda = S u - b."""
    u = op._check(u_interface)
    return op.schur @ u - op.rhs


def expand_interior(op: CondensedOperator, u_interface: Vector) -> Vector:
    """Full dof vector with u_i = K_ii^-1 (f_i - K_ig u_g)."""
    u = op._check(u_interface)
    full = np.zeros(op.dof_count)
    full[op.interface] = u
    if op.interior_factorization is not None:
        full[op.interior] = sla.cho_solve(op.interior_factorization, op.interior_load - op.interior_coupling @ u)
    return full

"""Monolithic reference: the fine patches and the complement glued on the global interface, solved directly."""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from glocal.coupling.topology import CouplingScenario
from glocal.errors import ConfigurationError
from glocal.utils.dc import timing
from glocal.utils.struct import DefaultStruct

__all__ = ["ReferenceSolution", "monolithic_reference", "interface_load", "relative_error"]

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class ReferenceSolution(DefaultStruct):
    u_gamma: np.ndarray
    # nodal field of every subdomain's fine model, complement first
    fields: list[np.ndarray]
    size: int


def _prolongation(sd, n_gamma: int, start: int, total: int) -> tuple[sp.csr_matrix, np.ndarray]:
    """Fine free dofs = P z + c, with z = [u_gamma, interiors...]."""
    op = sd.fine_condensed
    ja = (sd.transfer @ sd.assembly.T).tocoo()
    n_interior = len(op.interior)
    rows = np.concatenate([op.interface[ja.row], op.interior])
    cols = np.concatenate([ja.col, start + np.arange(n_interior)])
    vals = np.concatenate([ja.data, np.ones(n_interior)])
    p = sp.csr_matrix((vals, (rows, cols)), shape=(op.dof_count, total))
    c = np.zeros(op.dof_count)
    c[op.interface] = sd.offset
    return p, c


@timing
def monolithic_reference(scenario: CouplingScenario) -> ReferenceSolution:
    n_gamma = scenario.interface_size
    starts = np.cumsum([n_gamma] + [len(sd.fine_condensed.interior) for sd in scenario.subdomains])
    total = int(starts[-1])

    k_ref = sp.csr_matrix((total, total))
    f_ref = np.zeros(total)
    maps = []
    for sd, start in zip(scenario.subdomains, starts[:-1]):
        p, c = _prolongation(sd, n_gamma, int(start), total)
        k = sd.fine_system.stiffness
        k_ref = k_ref + p.T @ k @ p
        f_ref += p.T @ (sd.fine_system.load - k @ c)
        maps.append((p, c))

    try:
        z = spla.splu(sp.csc_matrix(k_ref)).solve(f_ref)
    except RuntimeError as e:
        raise ConfigurationError(f"Monolithic system of '{scenario.name}' is singular: {e}") from e
    if not np.all(np.isfinite(z)):
        raise ConfigurationError(f"Monolithic system of '{scenario.name}' produced non-finite values")

    fields = [sd.fine_system.expand(p @ z + c) for sd, (p, c) in zip(scenario.subdomains, maps)]
    logger.info(f"Monolithic reference of '{scenario.name}': {total} dofs")
    return ReferenceSolution(u_gamma=z[:n_gamma].copy(), fields=fields, size=total)


def interface_load(scenario: CouplingScenario, u_gamma: np.ndarray) -> np.ndarray:
    """The converged immersed load p_hat = S^G u - b^G."""
    return scenario.schur_global @ u_gamma - scenario.rhs_global


def relative_error(u_gamma: np.ndarray, reference: np.ndarray) -> float:
    ref = float(np.linalg.norm(reference))
    diff = float(np.linalg.norm(np.asarray(u_gamma) - reference))
    return diff / ref if ref > 0 else diff

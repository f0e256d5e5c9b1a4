"""Global-to-fine interface transfer and the facet geometry it relies on."""
import logging
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from glocal import settings
from glocal.basic_type import Coordinates
from glocal.errors import GeometryError, InvalidArgumentError
from glocal.fem.mesh import MeshModel

__all__ = ["element_facets", "locate_on_facets", "build_transfer"]

logger = logging.getLogger(__name__)

# Local facets per element kind, nodes in cyclic order
_FACETS = {
    1: ((0,), (1,)),
    2: ((0, 1), (1, 2), (2, 0)),
    3: ((0, 1, 2, 3), (4, 5, 6, 7), (0, 1, 5, 4), (3, 2, 6, 7), (0, 3, 7, 4), (1, 2, 6, 5)),
}


def element_facets(mesh: MeshModel) -> np.ndarray:
    """All element facets as (m * f, nv) node arrays, element-major."""
    local = np.asarray(_FACETS[mesh.dimension])
    return mesh.elements[:, local].reshape(-1, local.shape[1])


def _as_points(coords: Coordinates) -> np.ndarray:
    pts = np.asarray(coords, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise InvalidArgumentError(f"Coordinates must be an (n, d) array, got shape {pts.shape}")
    return pts


def _facet_weights(points: np.ndarray, corners: np.ndarray, atol: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Interpolation weights of `points` on one facet, plus a mask of the points
    lying on it. Segments interpolate linearly, parallelogram faces bilinearly.
    """
    nv = len(corners)
    if nv == 1:
        hit = np.linalg.norm(points - corners[0], axis=1) <= atol
        return np.ones((len(points), 1)), hit
    origin = corners[0]
    if nv == 2:
        edge = corners[1] - origin
        length2 = edge @ edge
        t = (points - origin) @ edge / length2
        dist = np.linalg.norm(points - origin - t[:, None] * edge, axis=1)
        slack = atol / np.sqrt(length2)
        hit = (dist <= atol) & (t >= -slack) & (t <= 1.0 + slack)
        t = np.clip(t, 0.0, 1.0)
        return np.column_stack([1.0 - t, t]), hit
    if nv == 4:
        basis = np.column_stack([corners[1] - origin, corners[3] - origin])
        rel = (points - origin).T
        local, *_ = np.linalg.lstsq(basis, rel, rcond=None)
        dist = np.linalg.norm(basis @ local - rel, axis=0)
        slack = atol / np.sqrt(min(basis[:, 0] @ basis[:, 0], basis[:, 1] @ basis[:, 1]))
        xi, eta = local
        hit = (dist <= atol) & np.all((local >= -slack) & (local <= 1.0 + slack), axis=0)
        xi, eta = np.clip(xi, 0.0, 1.0), np.clip(eta, 0.0, 1.0)
        weights = np.column_stack([(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta])
        return weights, hit
    raise InvalidArgumentError(f"Facets with {nv} nodes are not supported")


def locate_on_facets(points: np.ndarray, facet_coords: Sequence[np.ndarray], atol: float) -> np.ndarray:
    """Mask of the points lying on at least one facet."""
    points = _as_points(points)
    found = np.zeros(len(points), dtype=bool)
    for corners in facet_coords:
        _, hit = _facet_weights(points, np.asarray(corners, dtype=float), atol)
        found |= hit
    return found


def _infer_segments(points: np.ndarray, atol: float) -> list[tuple[int, ...]]:
    """Consecutive segments along a straight interface, empty when the points are not collinear."""
    if len(points) < 2:
        return []
    centred = points - points.mean(axis=0)
    _, sv, vt = np.linalg.svd(centred, full_matrices=False)
    if len(sv) > 1 and sv[1] > atol:
        return []
    order = np.argsort(centred @ vt[0])
    return [(int(a), int(b)) for a, b in zip(order[:-1], order[1:])]


def build_transfer(
        global_iface,
        fine_iface,
        facets: Sequence[Sequence[int]] | None = None,
        tol: float | None = None,
) -> sp.csr_matrix:
    """
    Sparse J mapping values at the global interface nodes to the fine interface nodes.

    Fine nodes that coincide with a global node copy its value; the others are
    interpolated on the facet (segment or parallelogram, given as indices into
    `global_iface`) that contains them. Without facets, a straight interface is
    split into consecutive segments.
    """
    g = _as_points(global_iface)
    f = _as_points(fine_iface)
    if g.shape[1] != f.shape[1]:
        raise InvalidArgumentError(f"Coordinate dimensions differ: {g.shape[1]} vs {f.shape[1]}")
    tol = settings.geometry_tol if tol is None else tol
    extent = float(np.ptp(np.vstack([g, f]), axis=0).max()) if len(g) else 0.0
    atol = tol * (extent if extent > 0 else 1.0)

    if facets is None:
        facets = _infer_segments(g, atol)

    rows, cols, vals = [], [], []
    pending = np.ones(len(f), dtype=bool)
    if len(g):
        dist, nearest = cKDTree(g).query(f)
        exact = dist <= atol
        idx = np.flatnonzero(exact)
        rows.append(idx)
        cols.append(nearest[exact])
        vals.append(np.ones(len(idx)))
        pending &= ~exact

    for facet in facets:
        if not pending.any():
            break
        facet = np.asarray(facet, dtype=int)
        todo = np.flatnonzero(pending)
        weights, hit = _facet_weights(f[todo], g[facet], atol)
        if not hit.any():
            continue
        idx = todo[hit]
        rows.append(np.repeat(idx, len(facet)))
        cols.append(np.tile(facet, len(idx)))
        vals.append(weights[hit].ravel())
        pending[idx] = False

    if pending.any():
        bad = f[np.flatnonzero(pending)[0]]
        raise GeometryError(
            f"{int(pending.sum())} fine interface node(s) lie off the global interface, first at {tuple(bad)}"
        )

    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=int)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=int)
    vals = np.concatenate(vals) if vals else np.zeros(0)
    transfer = sp.coo_matrix((vals, (rows, cols)), shape=(len(f), len(g))).tocsr()
    # drop explicit zeros left by nodes sitting on a facet corner
    transfer.eliminate_zeros()
    return transfer

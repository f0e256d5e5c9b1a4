"""
Batched element kernels. Every function takes the element node coordinates as
an (m, k, d) array and returns one dense block per element.
"""
import numpy as np

# 2x2x2 Gauss rule on the reference cube [-1, 1]^3
_G = 1.0 / np.sqrt(3.0)
HEX_GAUSS_POINTS = np.array(
    [[x, y, z] for z in (-_G, _G) for y in (-_G, _G) for x in (-_G, _G)]
)
HEX_GAUSS_WEIGHTS = np.ones(8)
# Reference coordinates of the hex nodes, same order as build_structured_mesh
HEX_NODE_SIGNS = np.array([
    [-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
    [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1],
], dtype=float)


def lame(young_modulus: np.ndarray, poisson_ratio: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lam = young_modulus * poisson_ratio / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio))
    mu = young_modulus / (2.0 * (1.0 + poisson_ratio))
    return lam, mu


def elasticity_matrix(young_modulus: np.ndarray, poisson_ratio: np.ndarray, dimension: int) -> np.ndarray:
    """Voigt constitutive matrices (engineering shear strains); plane strain in 2D."""
    lam, mu = lame(np.asarray(young_modulus, float), np.asarray(poisson_ratio, float))
    m = lam.shape[0]
    n_normal = dimension
    n_voigt = 3 if dimension == 2 else 6
    d = np.zeros((m, n_voigt, n_voigt))
    d[:, :n_normal, :n_normal] = lam[:, None, None]
    idx = np.arange(n_normal)
    d[:, idx, idx] += 2.0 * mu[:, None]
    shear = np.arange(n_normal, n_voigt)
    d[:, shear, shear] = mu[:, None]
    return d


def hex_shape_functions(xi: np.ndarray) -> np.ndarray:
    return 0.125 * np.prod(1.0 + HEX_NODE_SIGNS[None, :, :] * xi[:, None, :], axis=2)


def hex_shape_derivatives(xi: np.ndarray) -> np.ndarray:
    """dN/dxi at each point, shape (q, 8, 3)."""
    s = HEX_NODE_SIGNS[None, :, :]
    factors = 1.0 + s * xi[:, None, :]
    out = np.empty((len(xi), 8, 3))
    for a in range(3):
        others = [b for b in range(3) if b != a]
        out[:, :, a] = 0.125 * s[:, :, a] * factors[:, :, others[0]] * factors[:, :, others[1]]
    return out


def line_gradients(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = coords[:, 1, 0] - coords[:, 0, 0]
    grads = np.stack([-1.0 / h, 1.0 / h], axis=1)[:, :, None]
    return grads, np.abs(h)


def triangle_gradients(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Constant P1 gradients (m, 3, 2) and areas (m,)."""
    x, y = coords[:, :, 0], coords[:, :, 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    det = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    grads = np.stack([b, c], axis=2) / det[:, None, None]
    return grads, 0.5 * np.abs(det)


def hex_gradients(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Physical gradients (m, q, 8, 3) and weighted Jacobian determinants (m, q)."""
    dn = hex_shape_derivatives(HEX_GAUSS_POINTS)
    jac = np.einsum("qka,mkb->mqab", dn, coords)
    det = np.linalg.det(jac)
    inv = np.linalg.inv(jac)
    grads = np.einsum("mqab,qkb->mqka", inv, dn)
    return grads, det * HEX_GAUSS_WEIGHTS[None, :]


def gradients(coords: np.ndarray, dimension: int) -> tuple[np.ndarray, np.ndarray]:
    """Gradients with a leading quadrature axis (m, q, k, d) and weights (m, q)."""
    if dimension == 1:
        g, w = line_gradients(coords)
        return g[:, None], w[:, None]
    if dimension == 2:
        g, w = triangle_gradients(coords)
        return g[:, None], w[:, None]
    return hex_gradients(coords)


def diffusion_matrices(coords: np.ndarray, diffusivity: np.ndarray, dimension: int) -> np.ndarray:
    grads, weights = gradients(coords, dimension)
    return np.einsum("mq,mqka,mqla->mkl", weights * diffusivity[:, None], grads, grads)


def strain_operator(grads: np.ndarray, dimension: int) -> np.ndarray:
    """B matrices (m, q, n_voigt, k*d) with interleaved nodal dofs."""
    m, q, k, _ = grads.shape
    n_voigt = 3 if dimension == 2 else 6
    b = np.zeros((m, q, n_voigt, k * dimension))
    for a in range(dimension):
        b[:, :, a, a::dimension] = grads[:, :, :, a]
    if dimension == 2:
        b[:, :, 2, 0::2] = grads[:, :, :, 1]
        b[:, :, 2, 1::2] = grads[:, :, :, 0]
    else:
        # yz, xz, xy
        for row, (i, j) in zip((3, 4, 5), ((1, 2), (0, 2), (0, 1))):
            b[:, :, row, i::3] = grads[:, :, :, j]
            b[:, :, row, j::3] = grads[:, :, :, i]
    return b


def elasticity_matrices(coords: np.ndarray, young_modulus: np.ndarray, poisson_ratio: np.ndarray,
                        dimension: int) -> np.ndarray:
    grads, weights = gradients(coords, dimension)
    b = strain_operator(grads, dimension)
    d = elasticity_matrix(young_modulus, poisson_ratio, dimension)
    return np.einsum("mq,mqvi,mvw,mqwj->mij", weights, b, d, b)


def basis_integrals(coords: np.ndarray, dimension: int) -> np.ndarray:
    """Integral of each nodal basis function over its element, (m, k)."""
    if dimension == 1:
        _, h = line_gradients(coords)
        return np.repeat(h[:, None] / 2.0, 2, axis=1)
    if dimension == 2:
        _, area = triangle_gradients(coords)
        return np.repeat(area[:, None] / 3.0, 3, axis=1)
    _, weights = hex_gradients(coords)
    shape = hex_shape_functions(HEX_GAUSS_POINTS)
    return np.einsum("mq,qk->mk", weights, shape)

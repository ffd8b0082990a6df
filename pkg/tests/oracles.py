"""Reference implementations that avoid the package's blockwise code paths."""

import itertools

import numpy as np


def swap_matrix(n, m):
    """K with K (a ⊗ b) K^T = b ⊗ a for a n x n and b m x m."""
    K = np.zeros((n * m, n * m))
    for i in range(n):
        for j in range(m):
            K[j * n + i, i * m + j] = 1.0
    return K


def flip_full(W, n, m):
    K = swap_matrix(n, m)
    return K @ W @ K.T


def middle_unit_full(W, n, b, c):
    """a ⊗ c -> a ⊗ 1_b ⊗ c via (w ⊗ 1_b) followed by swapping the last two factors."""
    P = np.kron(np.eye(n), swap_matrix(c, b))
    return P @ np.kron(W, np.eye(b)) @ P.T


def partial_left_full(rho, W, n, m):
    out = np.zeros((m, m), dtype=complex)
    for i in range(n):
        for j in range(n):
            out += rho[j, i] * W[i * m:(i + 1) * m, j * m:(j + 1) * m]
    return out


def full_power(M, p):
    w, v = np.linalg.eigh(0.5 * (M + M.conj().T))
    return (v * np.maximum(w, 0) ** p) @ v.conj().T


def triangle_lambda_full(m, x, y, z):
    """Smallest eigenvalue of D(x,y) ⊗ 1 + 1 ⊗ D(y,z) - M(D(x,z)) from dense matrices."""
    nx, ny, nz = (m.bundle[p].total_dim for p in (x, y, z))
    lhs = np.kron(m.D(x, y).matrix, np.eye(nz)) + np.kron(np.eye(nx), m.D(y, z).matrix)
    rhs = middle_unit_full(m.D(x, z).matrix, nx, ny, nz)
    T = lhs - rhs
    return float(np.linalg.eigvalsh(0.5 * (T + T.conj().T))[0])


def seminorm_full(f, ordered=False):
    """max ||D^-1/2 (f(x)⊗1 - 1⊗f(y)) D^-1/2|| with dense linear algebra."""
    m = f.mof
    pairs = itertools.permutations(m.points, 2) if ordered else itertools.combinations(m.points, 2)
    best = 0.0
    for x, y in pairs:
        nx, ny = m.bundle[x].total_dim, m.bundle[y].total_dim
        S = full_power(m.D(x, y).matrix, -0.5)
        d = np.kron(f[x].matrix, np.eye(ny)) - np.kron(np.eye(nx), f[y].matrix)
        best = max(best, np.linalg.norm(S @ d @ S, 2))
    return best


def glued_lipschitz(model, values):
    """max |g(y) - g(y')| / rho(y, y') over members of different classes."""
    best = 0.0
    for i, j in itertools.combinations(range(len(model.classes)), 2):
        for a in model.classes[i]:
            for b in model.classes[j]:
                best = max(best, abs(values[a] - values[b]) / model.rho[a, b])
    return best


def lipschitz_constant(points, d, c):
    return max((abs(c[x] - c[y]) / d(x, y) for x, y in itertools.combinations(points, 2)), default=0.0)


def spectral_atoms_full(a, rho, decimals=8):
    """Eigenvalue -> weight from a dense eigendecomposition, rounded for grouping."""
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    out = {}
    for k in range(len(w)):
        weight = float(np.real(v[:, k].conj() @ rho @ v[:, k]))
        key = round(float(w[k]), decimals)
        out[key] = out.get(key, 0.0) + weight
    return {k: v for k, v in out.items() if v > 1e-10}


def corrupted(m, pair, diagonal):
    """Copy of ``m`` with ``D(pair)`` replaced by a diagonal element."""
    from mofkit import algebra as alg

    x, y = pair
    return m.replace(D={pair: alg.diag(m.D(x, y).signature, diagonal)})


def two_point_scalar():
    """p with A_p = C^2 and q with A_q = C at distance 1."""
    from mofkit import algebra as alg
    from mofkit.mof import scalar_mof

    bundle = {"p": alg.signature([1, 1]), "q": alg.signature([1])}
    return scalar_mof(["p", "q"], bundle, lambda x, y: 0.0 if x == y else 1.0)


def negative_controls(e2):
    """Corruptions, each meant to break exactly one mof axiom."""
    return {
        "(i)": corrupted(e2, ("x0", "x0"), [0.1, 1, 1, 0.1]),
        "(ii)": corrupted(e2, ("x0", "x1"), [1, 0]),
        "(iii)": corrupted(e2, ("x0", "x0"), [0, 1, 1.5, 0]),
        "(iv)": corrupted(e2, ("x0", "x1"), [2, 0.1]),
    }

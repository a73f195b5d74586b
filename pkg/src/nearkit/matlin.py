"""Dense linear-algebra kernel: SVD, Kronecker/vec utilities, index
rearrangements, partial trace, and Frobenius projections onto structured sets.

All matrices are real float64 numpy arrays.  Vectorization is column-major
(reverse lexicographic), i.e. ``vec(X) = X.flatten(order="F")``, which gives
the identity ``vec(B X C) = kron(C.T, B) vec(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BlockShape",
    "SvdFactors",
    "as_matrix",
    "svd",
    "vec",
    "unvec",
    "kron",
    "rearrange2",
    "rearrange2_inv",
    "rearrange3",
    "vecb",
    "partial_trace",
    "project_structure",
    "pinv",
    "fro",
]

STRUCTURE_KINDS = ("symmetric", "skew", "hankel", "toeplitz", "circulant",
                   "nonnegative")


class NumericError(RuntimeError):
    """Numerical failure (non-convergent decomposition, non-finite iterate)."""


@dataclass(frozen=True)
class BlockShape:
    """Block partition of an (m1*m2) x (n1*n2) matrix into m2 x n2 blocks."""

    m1: int
    m2: int
    n1: int
    n2: int

    def __post_init__(self):
        if min(self.m1, self.m2, self.n1, self.n2) < 1:
            raise ValueError("block shape components must be >= 1")

    def check(self, A):
        if A.shape != (self.m1 * self.m2, self.n1 * self.n2):
            raise ValueError(
                f"matrix shape {A.shape} does not match block shape {self}")


@dataclass(frozen=True)
class SvdFactors:
    """Full SVD M = U @ diag(sigma) @ V.T with deterministic sign convention.

    U is m x m, V is n x n, sigma has length min(m, n), nonincreasing.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    numerical_rank: int

    def reconstruct(self):
        m, n = self.U.shape[0], self.V.shape[0]
        S = np.zeros((m, n))
        k = len(self.sigma)
        S[:k, :k] = np.diag(self.sigma)
        return self.U @ S @ self.V.T


def as_matrix(a, name="matrix"):
    """Coerce to a finite 2-D float64 array; 1-D input becomes a column."""
    M = np.asarray(a, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def fro(M):
    return float(np.linalg.norm(M, "fro"))


def _fix_signs(U, s, V):
    # Deterministic tie-break: per left singular vector, the entry of largest
    # magnitude (first such index) is made nonnegative; V flips in tandem so
    # the product is unchanged.  Surplus columns of the larger factor are
    # fixed independently (they multiply zero singular values).
    m, n = U.shape[0], V.shape[0]
    k = min(m, n)
    for i in range(k):
        j = int(np.argmax(np.abs(U[:, i])))
        if U[j, i] < 0:
            U[:, i] = -U[:, i]
            V[:, i] = -V[:, i]
    for i in range(k, m):
        j = int(np.argmax(np.abs(U[:, i])))
        if U[j, i] < 0:
            U[:, i] = -U[:, i]
    for i in range(k, n):
        j = int(np.argmax(np.abs(V[:, i])))
        if V[j, i] < 0:
            V[:, i] = -V[:, i]
    return U, s, V


def svd(M, rank_tol=None):
    """Full SVD with a fixed sign convention and a numerical rank estimate.

    rank_tol defaults to max(m, n) * eps * sigma_1.
    """
    M = as_matrix(M)
    try:
        U, s, Vt = np.linalg.svd(M, full_matrices=True)
    except np.linalg.LinAlgError:
        # the divide-and-conquer driver occasionally fails to converge;
        # fall back to the slower but more robust QR-iteration driver
        try:
            import scipy.linalg
            U, s, Vt = scipy.linalg.svd(M, full_matrices=True,
                                        lapack_driver="gesvd")
        except Exception as e:
            raise NumericError(f"SVD failed to converge: {e}") from e
    V = Vt.T
    U, s, V = _fix_signs(U, s, V)
    if rank_tol is None:
        rank_tol = max(M.shape) * np.finfo(float).eps * (s[0] if len(s) else 0.0)
    rank = int(np.count_nonzero(s > rank_tol))
    return SvdFactors(U=U, sigma=s, V=V, numerical_rank=rank)


def singular_values(M):
    return np.linalg.svd(as_matrix(M), compute_uv=False)


def vec(X):
    """Column-major vectorization, returned as a column vector."""
    X = as_matrix(X)
    return X.reshape(-1, 1, order="F")


def unvec(v, rows, cols):
    v = np.asarray(v, dtype=float).reshape(-1)
    if len(v) != rows * cols:
        raise ValueError(f"cannot unvec length {len(v)} into {rows}x{cols}")
    return v.reshape(rows, cols, order="F")


def kron(A, B):
    return np.kron(as_matrix(A), as_matrix(B))


def rearrange2(A, shape: BlockShape):
    """Van Loan rearrangement: maps kron(Y, Z) to vec(Z) vec(Y).T.

    Output is (m2*n2) x (m1*n1); column j1*m1 + i1 is vec(A_{i1,j1}).
    A Frobenius isometry and a linear bijection.
    """
    A = as_matrix(A)
    shape.check(A)
    m1, m2, n1, n2 = shape.m1, shape.m2, shape.n1, shape.n2
    A4 = A.reshape(m1, m2, n1, n2)
    # R[j2*m2+i2, j1*m1+i1] = A[(i1,i2),(j1,j2)]
    return np.ascontiguousarray(A4.transpose(3, 1, 2, 0)).reshape(
        m2 * n2, m1 * n1)


def rearrange2_inv(R, shape: BlockShape):
    """Exact inverse of :func:`rearrange2`."""
    R = as_matrix(R)
    m1, m2, n1, n2 = shape.m1, shape.m2, shape.n1, shape.n2
    if R.shape != (m2 * n2, m1 * n1):
        raise ValueError(
            f"rearranged shape {R.shape} does not match block shape {shape}")
    T = R.reshape(n2, m2, n1, m1)
    return np.ascontiguousarray(T.transpose(3, 1, 2, 0)).reshape(
        m1 * m2, n1 * n2)


def rearrange3(A, row_shape, col_shape):
    """Three-factor rearrangement: maps kron(Y, kron(X, Z)) to
    vec(kron(Y, Z)) vec(X).T for Y m1 x n1, X p x q, Z m2 x n2.

    row_shape = (m1, p, m2), col_shape = (n1, q, n2).  Output is
    (m1*n1*m2*n2) x (p*q).  Frobenius isometry.
    """
    A = as_matrix(A)
    m1, p, m2 = row_shape
    n1, q, n2 = col_shape
    if A.shape != (m1 * p * m2, n1 * q * n2):
        raise ValueError(
            f"matrix shape {A.shape} does not match factor shapes "
            f"{row_shape} x {col_shape}")
    A6 = A.reshape(m1, p, m2, n1, q, n2)
    # out[(j1,j2,i1,i2), (jx,ix)] = A[(i1,ix,i2),(j1,jx,j2)]
    return np.ascontiguousarray(A6.transpose(3, 5, 0, 2, 4, 1)).reshape(
        n1 * n2 * m1 * m2, q * p)


def vecb(A, shape: BlockShape):
    """Block vectorization vec(rearrange2(A)); preserves inner products."""
    return vec(rearrange2(A, shape))


def partial_trace(X, p):
    """Sum of the p x p diagonal blocks of a p^2 x p^2 matrix.

    Satisfies partial_trace(kron(Y, Z)) = tr(Y) * Z.
    """
    X = as_matrix(X)
    if X.shape != (p * p, p * p):
        raise ValueError(f"partial trace needs a {p*p}x{p*p} matrix, "
                         f"got {X.shape}")
    out = np.zeros((p, p))
    for i in range(p):
        out += X[i * p:(i + 1) * p, i * p:(i + 1) * p]
    return out


def project_structure(M, kind):
    """Orthogonal Frobenius projection onto a structured set of matrices.

    kind: symmetric | skew | hankel | toeplitz | circulant | nonnegative.
    All except nonnegative are linear subspaces; the projection averages the
    entries tied together by the structure.
    """
    M = as_matrix(M)
    m, n = M.shape
    if kind in ("symmetric", "skew", "toeplitz", "circulant") and m != n:
        raise ValueError(f"{kind} projection requires a square matrix")
    if kind == "symmetric":
        return 0.5 * (M + M.T)
    if kind == "skew":
        return 0.5 * (M - M.T)
    if kind == "nonnegative":
        return np.maximum(M, 0.0)
    if kind == "hankel":
        out = np.empty_like(M)
        for s in range(m + n - 1):
            i = np.arange(max(0, s - n + 1), min(m, s + 1))
            out[i, s - i] = M[i, s - i].mean()
        return out
    if kind == "toeplitz":
        out = np.empty_like(M)
        for k in range(-(m - 1), n):
            idx = np.arange(max(0, -k), min(m, n - k))
            out[idx, idx + k] = M[idx, idx + k].mean()
        return out
    if kind == "circulant":
        out = np.empty_like(M)
        cols = np.arange(n)
        for k in range(n):
            rows = (cols + k) % n
            out[rows, cols] = M[rows, cols].mean()
        return out
    raise ValueError(f"unknown structure kind: {kind!r}")


def structure_basis(kind, m, n):
    """Orthonormal (Frobenius) basis of a structure subspace.

    Supported kinds are the linear ones: symmetric, skew, hankel, toeplitz,
    circulant.  Each basis element is the normalized indicator of one tied
    entry class.
    """
    basis = []
    if kind == "hankel":
        for s in range(m + n - 1):
            E = np.zeros((m, n))
            i = np.arange(max(0, s - n + 1), min(m, s + 1))
            E[i, s - i] = 1.0
            basis.append(E / np.sqrt(len(i)))
    elif kind == "toeplitz":
        for k in range(-(m - 1), n):
            E = np.zeros((m, n))
            idx = np.arange(max(0, -k), min(m, n - k))
            E[idx, idx + k] = 1.0
            basis.append(E / np.sqrt(len(idx)))
    elif kind == "circulant":
        cols = np.arange(n)
        for k in range(n):
            E = np.zeros((n, n))
            E[(cols + k) % n, cols] = 1.0
            basis.append(E / np.sqrt(n))
    elif kind == "symmetric":
        for i in range(m):
            for j in range(i, n):
                E = np.zeros((m, n))
                if i == j:
                    E[i, i] = 1.0
                else:
                    E[i, j] = E[j, i] = 1.0 / np.sqrt(2)
                basis.append(E)
    elif kind == "skew":
        for i in range(m):
            for j in range(i + 1, n):
                E = np.zeros((m, n))
                E[i, j] = 1.0 / np.sqrt(2)
                E[j, i] = -1.0 / np.sqrt(2)
                basis.append(E)
    else:
        raise ValueError(f"no subspace basis for structure kind {kind!r}")
    return basis


def pinv(M, rank_tol=None):
    """Moore-Penrose pseudoinverse via SVD with the numerical-rank cutoff."""
    f = svd(M, rank_tol=rank_tol)
    r = f.numerical_rank
    if r == 0:
        return np.zeros((M.shape[1], M.shape[0]))
    return f.V[:, :r] @ np.diag(1.0 / f.sigma[:r]) @ f.U[:, :r].T


def _rearrange3_selftest():
    rng = np.random.default_rng(0)
    Y = rng.standard_normal((2, 2))
    X = rng.standard_normal((2, 2))
    Z = rng.standard_normal((2, 2))
    lhs = rearrange3(np.kron(Y, np.kron(X, Z)), (2, 2, 2), (2, 2, 2))
    rhs = vec(np.kron(Y, Z)) @ vec(X).T
    if not np.allclose(lhs, rhs, atol=1e-13):
        raise AssertionError("rearrange3 index map failed its defining "
                             "identity self-test")


_rearrange3_selftest()

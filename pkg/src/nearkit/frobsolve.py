"""Exact solvers for min_{X in S} ||M - B X C||_F.

Every solver returns a :class:`FrobSolution` whose objective is recomputed
from the residual, and picks the minimum-Frobenius-norm minimizer whenever
the minimizer is not unique (free blocks set to zero, minimum-norm least
squares).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matlin as ml
from .constraints import (AffineSubspace, CapabilityError, FrobeniusBall,
                          Intersection, KronRankAtMost, LeftRankOne,
                          PrescribedEigenvalue, PrescribedPartialTrace,
                          ProductConstraint, PsdCone, RankAtMost,
                          RightRankOne, Structural, Unconstrained,
                          transpose_constraint)
from .matlin import BlockShape, as_matrix, fro, kron, pinv, rearrange2, \
    rearrange2_inv, rearrange3, structure_basis, svd, unvec, vec

__all__ = [
    "FrobSolution",
    "lemma_rank1",
    "prepare",
    "solve",
    "solve_affine",
    "solve_unconstrained",
    "solve_rank",
    "solve_kron_rank",
    "solve_prescribed_eigenvalue",
    "solve_partial_trace",
    "solve_separable_kron",
    "solve_affine_subspace",
    "solve_psd_congruence",
    "project_ball",
    "project_intersection",
    "lsqi",
]


@dataclass(frozen=True)
class FrobSolution:
    X: np.ndarray
    objective: float
    x: np.ndarray | None = None
    witness: np.ndarray | None = None


def _is_identity(M, tol=1e-14):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    return np.allclose(M, np.eye(M.shape[0]), atol=tol)


def lemma_rank1(A, B, c):
    """Minimizer of ||A - B x c^T||_F: x = B^+ A c / (c^T c)."""
    A, B, c = as_matrix(A), as_matrix(B), as_matrix(c, "c")
    cc = float(np.vdot(c, c))
    if cc == 0.0:
        raise ValueError("c must be nonzero")
    return pinv(B) @ A @ c / cc


def _truncate(F, r):
    """Best rank-r truncation from precomputed SVD factors."""
    r = min(r, int(np.count_nonzero(F.sigma)))
    if r == 0:
        return np.zeros((F.U.shape[0], F.V.shape[0]))
    return F.U[:, :r] @ np.diag(F.sigma[:r]) @ F.V[:, :r].T


def kron_svd(fP, fQ):
    """SVD of a Kronecker product assembled from the factor SVDs.

    Columns are sorted by the outer-product singular values; null-space
    completions keep their natural Kronecker order.
    """
    a, b = fP.U.shape[0], fP.V.shape[0]
    c, d = fQ.U.shape[0], fQ.V.shape[0]
    kp, kq = len(fP.sigma), len(fQ.sigma)
    k = min(a * c, b * d)
    sig = np.outer(fP.sigma, fQ.sigma).ravel()
    order = np.argsort(-sig, kind="stable")
    sig = sig[order]
    main = [(int(t) // kq, int(t) % kq) for t in order]
    upos = [i * c + j for i, j in main]
    vpos = [i * d + j for i, j in main]
    upos += [t for t in range(a * c) if t not in set(upos)]
    vpos += [t for t in range(b * d) if t not in set(vpos)]
    U = np.kron(fP.U, fQ.U)[:, upos]
    V = np.kron(fP.V, fQ.V)[:, vpos]
    tol = max(a * c, b * d) * np.finfo(float).eps * (sig[0] if k else 0.0)
    return ml.SvdFactors(U=U, sigma=sig[:k], V=V,
                         numerical_rank=int(np.count_nonzero(sig[:k] > tol)))


def _solve_rank_blocks(M, fB, fC, r):
    """Shared block reduction: rotate by the SVDs of B and C, approximate the
    reachable top-left block at rank r, zero the free blocks (minimum norm)."""
    s, t = fB.numerical_rank, fC.numerical_rank
    Ahat = fB.U.T @ M @ fC.V
    A11 = Ahat[:s, :t]
    T = _truncate(svd(A11), r) if r < min(s, t) else A11
    p, q = fB.V.shape[0], fC.U.shape[0]
    X = np.zeros((p, q))
    if s and t:
        X11 = (T / fB.sigma[:s, None]) / fC.sigma[None, :t]
        X = fB.V[:, :s] @ X11 @ fC.U[:, :t].T
    return X


def solve_unconstrained(M, B, C):
    """Minimum-norm minimizer of ||M - B X C||_F over all X."""
    M, B, C = as_matrix(M), as_matrix(B), as_matrix(C)
    fB, fC = svd(B), svd(C)
    X = _solve_rank_blocks(M, fB, fC, min(M.shape))
    return FrobSolution(X=X, objective=fro(M - B @ X @ C))


def solve_rank(M, B, C, r):
    """Rank-constrained generalized nearness via the block reduction and a
    truncated SVD of the reachable block."""
    M, B, C = as_matrix(M), as_matrix(B), as_matrix(C)
    fB, fC = svd(B), svd(C)
    X = _solve_rank_blocks(M, fB, fC, r)
    return FrobSolution(X=X, objective=fro(M - B @ X @ C))


def solve_kron_rank(M, B1, B2, C1, C2, r, xshape: BlockShape):
    """Kronecker-rank-r nearness min ||M - (B1 x B2) X (C1 x C2)||_F.

    Works on the rearranged problem, where the constraint becomes plain rank;
    the SVDs of the rearranged multipliers are assembled from the factor SVDs
    rather than computed on the Kronecker products.
    """
    M = as_matrix(M)
    B1, B2 = as_matrix(B1), as_matrix(B2)
    C1, C2 = as_matrix(C1), as_matrix(C2)
    m1, p1 = B1.shape
    m2, p2 = B2.shape
    q1, n1 = C1.shape
    q2, n2 = C2.shape
    if (xshape.m1, xshape.m2, xshape.n1, xshape.n2) != (p1, p2, q1, q2):
        raise ValueError("xshape inconsistent with factor shapes")
    ashape = BlockShape(m1, m2, n1, n2)
    RA = rearrange2(M, ashape)
    fBp = kron_svd(svd(C2.T), svd(B2))     # C2^T x B2
    fCp = kron_svd(svd(C1), svd(B1.T))     # C1 x B1^T
    Xhat = _solve_rank_blocks(RA, fBp, fCp, r)
    X = rearrange2_inv(Xhat, xshape)
    BK, CK = np.kron(B1, B2), np.kron(C1, C2)
    return FrobSolution(X=X, objective=fro(M - BK @ X @ CK))


def solve_prescribed_eigenvalue(M, B, C, lam):
    """Prescribe lam as an eigenvalue of X by shifting: lam in spec(X) iff
    rank(X - lam I) <= p - 1."""
    M, B, C = as_matrix(M), as_matrix(B), as_matrix(C)
    p = B.shape[1]
    if C.shape[0] != p:
        raise ValueError("X must be square for an eigenvalue constraint")
    fB, fC = svd(B), svd(C)
    Xs = _solve_rank_blocks(M - lam * (B @ C), fB, fC, p - 1)
    X = Xs + lam * np.eye(p)
    return FrobSolution(X=X, objective=fro(M - B @ X @ C))


def commutation(p, q):
    """Perfect-shuffle matrix K with K vec(Y) = vec(Y^T) for Y p x q."""
    K = np.zeros((p * q, p * q))
    for i in range(p):
        for j in range(q):
            K[i * q + j, j * p + i] = 1.0
    return K


def solve_partial_trace(M, B1, B2, C1, C2, lam):
    """Prescribed-partial-trace nearness, reduced to a rank-deficiency
    constraint on the rearranged variable.

    The map W -> partial_trace(X (W kron I)) acts on vec(W) as R(X) K with
    K the commutation matrix (the trace pairing transposes one factor), so
    the prescribed value lam must be an eigenvalue of R(X) K.  Returns the
    witness W (reshaped eigenvector at lam) on the solution.
    """
    M = as_matrix(M)
    B1, B2 = as_matrix(B1), as_matrix(B2)
    C1, C2 = as_matrix(C1), as_matrix(C2)
    p = B1.shape[1]
    if not (B2.shape[1] == p and C1.shape[0] == p and C2.shape[0] == p):
        raise ValueError("factor inner dimensions must agree")
    m1, m2 = B1.shape[0], B2.shape[0]
    n1, n2 = C1.shape[1], C2.shape[1]
    ashape = BlockShape(m1, m2, n1, n2)
    Pi = commutation(p, p)
    Bp = np.kron(C2.T, B2)
    Cp = Pi @ np.kron(C1, B1.T)
    Mred = rearrange2(M, ashape) - lam * (Bp @ Cp)
    Yhat = _solve_rank_blocks(Mred, svd(Bp), svd(Cp), p * p - 1)
    Zhat = Yhat + lam * np.eye(p * p)
    X = rearrange2_inv(Zhat @ Pi, BlockShape(p, p, p, p))
    # eigenvector of Zhat = R(X) K at lam = right null vector of Yhat
    w = svd(Yhat).V[:, -1]
    W = unvec(w, p, p)
    BK, CK = np.kron(B1, B2), np.kron(C1, C2)
    return FrobSolution(X=X, objective=fro(M - BK @ X @ CK), witness=W)


def solve_separable_kron(M, B, C, inner):
    """min_{X in S} ||M - B x X x C||_F (triple Kronecker product).

    The optimal unconstrained fit H has a closed form through the three-factor
    rearrangement; the constrained solution is the nearest member of S to H.
    """
    M, B, C = as_matrix(M), as_matrix(B), as_matrix(C)
    nB, nC = fro(B), fro(C)
    if nB == 0.0 or nC == 0.0:
        raise ValueError("B and C must be nonzero")
    m1, n1 = B.shape
    m2, n2 = C.shape
    if M.shape[0] % (m1 * m2) or M.shape[1] % (n1 * n2):
        raise ValueError("M does not have a triple-Kronecker compatible shape")
    p = M.shape[0] // (m1 * m2)
    q = M.shape[1] // (n1 * n2)
    R = rearrange3(M, (m1, p, m2), (n1, q, n2))
    h = R.T @ vec(np.kron(B, C)) / (nB * nB * nC * nC)
    H = unvec(h, p, q)
    X = solve(H, np.eye(p), np.eye(q), inner).X
    return FrobSolution(X=X, objective=fro(M - np.kron(B, np.kron(X, C))))


def solve_affine(A, B, C, term, inner):
    """Affine nearness min ||A - B X C + D x e^T||_F over X in S and x.

    The x-variable is eliminated by projecting the data onto the orthogonal
    complement of e; the right-rank-one form d x^T E transposes onto it.
    """
    A, B, C = as_matrix(A), as_matrix(B), as_matrix(C)
    if isinstance(term, RightRankOne):
        sol = solve_affine(A.T, C.T, B.T, LeftRankOne(D=term.E.T, e=term.d),
                           transpose_constraint(inner))
        return FrobSolution(X=sol.X.T, objective=sol.objective, x=sol.x)
    if not isinstance(term, LeftRankOne):
        raise ValueError("affine term must be LeftRankOne or RightRankOne")
    e, D = term.e, term.D
    P = np.eye(len(e)) - (e @ e.T) / float(np.vdot(e, e))
    Xs = solve(A @ P, B, C @ P, inner).X
    xs = pinv(D) @ (B @ Xs @ C - A) @ e / float(np.vdot(e, e))
    obj = fro(A - B @ Xs @ C + D @ xs @ e.T)
    return FrobSolution(X=Xs, objective=obj, x=xs)


def _product_to_subspace(spec: ProductConstraint, p, q):
    """Rewrite F X G = H as an affine subspace (particular solution plus a
    null-space basis of X -> F X G)."""
    F, G, H = as_matrix(spec.F), as_matrix(spec.G), as_matrix(spec.H)
    Fp, Gp = pinv(F), pinv(G)
    offset = Fp @ H @ Gp
    if fro(F @ offset @ G - H) > 1e-10 * (1.0 + fro(H)):
        raise ValueError("product constraint F X G = H is inconsistent")
    K = np.kron(G.T, F)
    f = svd(K)
    null = f.V[:, f.numerical_rank:]
    basis = tuple(unvec(null[:, j], p, q) for j in range(null.shape[1]))
    return AffineSubspace(basis=basis, offset=offset)


def solve_affine_subspace(M, B, C, spec):
    """Nearness over an affine subspace by vectorized least squares
    (minimum-norm coefficients when singular)."""
    M, B, C = as_matrix(M), as_matrix(B), as_matrix(C)
    p, q = B.shape[1], C.shape[0]
    if isinstance(spec, ProductConstraint):
        spec = _product_to_subspace(spec, p, q)
    K = np.kron(C.T, B)
    d = (vec(M) - K @ vec(spec.offset)).ravel()
    X = spec.offset
    if spec.basis:
        Phi = np.hstack([vec(E) for E in spec.basis])
        theta, *_ = np.linalg.lstsq(K @ Phi, d, rcond=None)
        X = spec.offset + unvec(Phi @ theta, p, q)
    return FrobSolution(X=X, objective=fro(M - B @ X @ C))


def solve_psd_congruence(M, B, fB=None):
    """min_{X psd} ||M - B X B^T||_F.

    Congruence by the nonsingular part of B reduces this to clipping the
    negative eigenvalues of the symmetric part of the reachable block; the
    skew part is orthogonal to every symmetric matrix so the accounting stays
    exact.
    """
    M, B = as_matrix(M), as_matrix(B)
    if M.shape[0] != M.shape[1] or M.shape[0] != B.shape[0]:
        raise ValueError("M must be square with the row count of B")
    if fB is None:
        fB = svd(B)
    s = fB.numerical_rank
    p = B.shape[1]
    X = np.zeros((p, p))
    if s:
        A11 = (fB.U.T @ M @ fB.U)[:s, :s]
        S = 0.5 * (A11 + A11.T)
        w, Q = np.linalg.eigh(S)
        P = Q @ np.diag(np.maximum(w, 0.0)) @ Q.T
        X11 = (P / fB.sigma[:s, None]) / fB.sigma[None, :s]
        X11 = 0.5 * (X11 + X11.T)
        X = fB.V[:, :s] @ X11 @ fB.V[:, :s].T
    return FrobSolution(X=X, objective=fro(M - B @ X @ B.T))


def project_ball(M, center, radius):
    """Nearest point of the Frobenius ball {X : ||X - center||_F <= radius}."""
    M, center = as_matrix(M), as_matrix(center)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    d = M - center
    nd = fro(d)
    if nd <= radius or np.isinf(radius):
        return M.copy()
    if nd == 0.0:
        return center.copy()
    return center + (radius / nd) * d


def _member_projection(member):
    if isinstance(member, Structural):
        return lambda M: ml.project_structure(M, member.kind)
    if isinstance(member, FrobeniusBall):
        return lambda M: project_ball(M, member.center, member.radius)
    if isinstance(member, PsdCone):
        def proj_psd(M):
            S = 0.5 * (M + M.T)
            w, Q = np.linalg.eigh(S)
            return Q @ np.diag(np.maximum(w, 0.0)) @ Q.T
        return proj_psd
    if isinstance(member, AffineSubspace):
        def proj_aff(M):
            out = member.offset.copy()
            if member.basis:
                stack = np.hstack([vec(E) for E in member.basis])
                Qb, _ = np.linalg.qr(stack)
                out = out + unvec(Qb @ (Qb.T @ vec(M - member.offset)),
                                  *M.shape)
            return out
        return proj_aff
    raise CapabilityError(
        f"no Frobenius projection available for {type(member).__name__}")


def project_intersection(M, members, tol=1e-12, max_cycles=100_000):
    """Dykstra's alternating projections onto an intersection of convex sets
    with available Frobenius projections."""
    M = as_matrix(M)
    projs = [_member_projection(m) for m in members]
    x = M.copy()
    incs = [np.zeros_like(M) for _ in members]
    scale = 1.0 + fro(M)
    for _ in range(max_cycles):
        x_prev = x.copy()
        for i, proj in enumerate(projs):
            y = proj(x + incs[i])
            incs[i] = x + incs[i] - y
            x = y
        if fro(x - x_prev) <= tol * scale:
            break
    return x


def _prepare_lsqi(C, theta_basis, center, radius):
    """Precomputed least-squares-with-quadratic-inequality solver: minimize
    ||M - X(theta) C||_F over theta with ||X(theta) - center||_F <= radius,
    X(theta) = sum theta_k Phi_k over an orthonormal basis.

    The active-constraint case solves the secular equation for the Lagrange
    multiplier by safeguarded bisection plus Newton polish.
    """
    C, center = as_matrix(C), as_matrix(center)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    c = np.array([float(np.sum(E * center)) for E in theta_basis])
    recon = sum(ck * E for ck, E in zip(c, theta_basis))
    if fro(recon - center) > 1e-10 * (1.0 + fro(center)):
        raise ValueError("ball center does not lie in the structure subspace")
    K = np.column_stack([vec(E @ C).ravel() for E in theta_basis])
    U, sig, Vt = np.linalg.svd(K, full_matrices=False)
    cutoff = max(K.shape) * np.finfo(float).eps * (sig[0] if len(sig) else 0.0)
    inv_sig = np.where(sig > cutoff, 1.0 / np.where(sig > 0, sig, 1.0), 0.0)
    stack = np.stack(theta_basis)

    def assemble(theta):
        return np.tensordot(theta, stack, axes=1)

    def run(M):
        M = as_matrix(M)
        if radius == 0.0:
            return FrobSolution(X=center.copy(), objective=fro(M - center @ C))
        d = vec(M).ravel()
        beta_full = U.T @ d
        theta0 = Vt.T @ (inv_sig * beta_full)
        if np.isinf(radius) or np.linalg.norm(theta0 - c) <= radius:
            X = assemble(theta0)
            return FrobSolution(X=X, objective=fro(M - X @ C))

        # secular equation: ||phi(nu)||^2 = radius^2 with
        # phi(nu) = (K^T K + nu I)^-1 K^T (d - K c), strictly decreasing
        beta = beta_full - sig * (Vt @ c)

        def g(nu):
            coef = sig * beta / (sig * sig + nu)
            return float(coef @ coef) - radius * radius

        lo, hi = 0.0, max(1.0, np.linalg.norm(sig * beta) / radius)
        while g(hi) > 0:
            hi *= 2.0
            if hi > 1e18:
                raise ml.NumericError("lsqi failed to bracket the multiplier")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if g(mid) > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-12 * (1.0 + hi):
                break
        nu = 0.5 * (lo + hi)
        for _ in range(5):  # Newton polish on g
            coef2 = (sig * beta) ** 2 / (sig * sig + nu) ** 2
            dg = -2.0 * float(np.sum(coef2 / (sig * sig + nu)))
            if dg == 0.0:
                break
            step = g(nu) / dg
            if nu - step > 0:
                nu -= step
        theta = c + Vt.T @ (sig * beta / (sig * sig + nu))
        X = assemble(theta)
        return FrobSolution(X=X, objective=fro(M - X @ C))

    return run


def lsqi(M, B, C, theta_basis, center, radius):
    """One-shot wrapper around :func:`_prepare_lsqi`; requires B = I."""
    if not _is_identity(B):
        raise CapabilityError("lsqi path requires B = I")
    return _prepare_lsqi(C, theta_basis, center, radius)(M)


def is_identity(M, tol=1e-14):
    return _is_identity(M, tol)


def product_to_subspace(spec: ProductConstraint, xshape):
    """Public wrapper rewriting F X G = H as an AffineSubspace."""
    return _product_to_subspace(spec, xshape[0], xshape[1])


def term_matrix(term, x, shape=None):
    """The rank-one affine contribution D x e^T (or d x^T E) as a matrix."""
    x = as_matrix(x, "x")
    if isinstance(term, LeftRankOne):
        out = term.D @ x @ term.e.T
    elif isinstance(term, RightRankOne):
        out = term.d @ x.T @ term.E
    else:
        raise ValueError("affine term must be LeftRankOne or RightRankOne")
    if shape is not None and out.shape != tuple(shape):
        raise ValueError(f"affine term shape {out.shape} does not match "
                         f"expected {tuple(shape)}")
    return out


def _split_kron_factor(M, shape: BlockShape, name):
    """Recover (M1, M2) with M = kron(M1, M2) for the given block shape;
    errors out when M is not an exact Kronecker product."""
    R = rearrange2(M, shape)
    f = svd(R)
    if len(f.sigma) > 1 and f.sigma[1] > 1e-10 * (1.0 + f.sigma[0]):
        raise CapabilityError(
            f"{name} is not a Kronecker product of the declared shapes")
    M1 = unvec(f.V[:, 0], shape.m1, shape.n1)
    M2 = unvec(f.sigma[0] * f.U[:, 0], shape.m2, shape.n2)
    return M1, M2


def _hankel_ball_members(constraint):
    """Detect Intersection{Structural(subspace kind), FrobeniusBall}."""
    if not isinstance(constraint, Intersection) or len(constraint.members) != 2:
        return None
    struct = ball = None
    for m in constraint.members:
        if isinstance(m, Structural) and m.kind != "nonnegative":
            struct = m
        elif isinstance(m, FrobeniusBall):
            ball = m
    if struct is None or ball is None:
        return None
    return struct, ball


def _prepare_rank_family(B, C, rank_fn):
    fB, fC = svd(B), svd(C)

    def run(M):
        M = as_matrix(M)
        X = _solve_rank_blocks(M, fB, fC, rank_fn(M))
        return FrobSolution(X=X, objective=fro(M - B @ X @ C))

    return run


def _prepare_subspace(B, C, spec):
    """Precomputed affine-subspace least squares: the design matrix and its
    pseudoinverse depend only on (B, C, basis)."""
    p, q = B.shape[1], C.shape[0]
    if isinstance(spec, ProductConstraint):
        spec = _product_to_subspace(spec, p, q)
    K = np.kron(C.T, B)
    koff = (K @ vec(spec.offset)).ravel()
    Phi = np.hstack([vec(E) for E in spec.basis]) if spec.basis else None
    Pk = pinv(K @ Phi) if Phi is not None else None

    def run(M):
        M = as_matrix(M)
        X = spec.offset
        if Phi is not None:
            theta = Pk @ (vec(M).ravel() - koff)
            X = spec.offset + unvec(Phi @ theta, p, q)
        return FrobSolution(X=X, objective=fro(M - B @ X @ C))

    return run


def prepare(B, C, constraint, term=None):
    """Build a solver closure M -> FrobSolution with every data-independent
    factorization (SVDs, Kronecker splits, null-space bases, pseudoinverses)
    computed once.  The Dykstra X-step calls the closure every sweep."""
    B, C = as_matrix(B), as_matrix(C)
    if term is not None:
        if isinstance(term, RightRankOne):
            inner = prepare(C.T, B.T, transpose_constraint(constraint),
                            LeftRankOne(D=term.E.T, e=term.d))

            def run_transposed(M):
                sol = inner(as_matrix(M).T)
                return FrobSolution(X=sol.X.T, objective=sol.objective,
                                    x=sol.x)

            return run_transposed
        if not isinstance(term, LeftRankOne):
            raise ValueError("affine term must be LeftRankOne or RightRankOne")
        e, D = term.e, term.D
        ee = float(np.vdot(e, e))
        P = np.eye(len(e)) - (e @ e.T) / ee
        inner = prepare(B, C @ P, constraint)
        Dp = pinv(D)

        def run_affine(M):
            M = as_matrix(M)
            Xs = inner(M @ P).X
            xs = Dp @ (B @ Xs @ C - M) @ e / ee
            obj = fro(M - B @ Xs @ C + D @ xs @ e.T)
            return FrobSolution(X=Xs, objective=obj, x=xs)

        return run_affine

    if isinstance(constraint, Unconstrained):
        return _prepare_rank_family(B, C, lambda M: min(M.shape))
    if isinstance(constraint, RankAtMost):
        r = constraint.r
        return _prepare_rank_family(B, C, lambda M: r)
    if isinstance(constraint, PrescribedEigenvalue):
        p = B.shape[1]
        if C.shape[0] != p:
            raise ValueError("X must be square for an eigenvalue constraint")
        fB, fC = svd(B), svd(C)
        BC, lam = B @ C, constraint.lam

        def run_eig(M):
            M = as_matrix(M)
            Xs = _solve_rank_blocks(M - lam * BC, fB, fC, p - 1)
            X = Xs + lam * np.eye(p)
            return FrobSolution(X=X, objective=fro(M - B @ X @ C))

        return run_eig
    if isinstance(constraint, KronRankAtMost):
        if constraint.bshape is None or constraint.cshape is None:
            raise CapabilityError(
                "Kronecker rank constraint needs the factor shapes of B and C")
        B1, B2 = _split_kron_factor(B, constraint.bshape, "B")
        C1, C2 = _split_kron_factor(C, constraint.cshape, "C")
        ashape = BlockShape(B1.shape[0], B2.shape[0], C1.shape[1], C2.shape[1])
        fBp = kron_svd(svd(C2.T), svd(B2))
        fCp = kron_svd(svd(C1), svd(B1.T))
        r, xshape = constraint.r, constraint.xshape

        def run_kron(M):
            M = as_matrix(M)
            Xhat = _solve_rank_blocks(rearrange2(M, ashape), fBp, fCp, r)
            X = rearrange2_inv(Xhat, xshape)
            return FrobSolution(X=X, objective=fro(M - B @ X @ C))

        return run_kron
    if isinstance(constraint, PrescribedPartialTrace):
        if constraint.bshape is None or constraint.cshape is None:
            raise CapabilityError(
                "partial-trace constraint needs the factor shapes of B and C")
        B1, B2 = _split_kron_factor(B, constraint.bshape, "B")
        C1, C2 = _split_kron_factor(C, constraint.cshape, "C")
        p, lam = constraint.p, constraint.lam
        if B1.shape[1] != p or B2.shape[1] != p or C1.shape[0] != p \
                or C2.shape[0] != p:
            raise ValueError("factor inner dimensions must equal p")
        ashape = BlockShape(B1.shape[0], B2.shape[0], C1.shape[1], C2.shape[1])
        Pi = commutation(p, p)
        Bp = np.kron(C2.T, B2)
        Cp = Pi @ np.kron(C1, B1.T)
        fBp, fCp = svd(Bp), svd(Cp)
        shift = lam * (Bp @ Cp)
        xblock = BlockShape(p, p, p, p)

        def run_ptrace(M):
            M = as_matrix(M)
            Yhat = _solve_rank_blocks(rearrange2(M, ashape) - shift,
                                      fBp, fCp, p * p - 1)
            Zhat = Yhat + lam * np.eye(p * p)
            X = rearrange2_inv(Zhat @ Pi, xblock)
            W = unvec(svd(Yhat).V[:, -1], p, p)
            return FrobSolution(X=X, objective=fro(M - B @ X @ C), witness=W)

        return run_ptrace
    if isinstance(constraint, (AffineSubspace, ProductConstraint)):
        return _prepare_subspace(B, C, constraint)
    if isinstance(constraint, Structural):
        if _is_identity(B) and _is_identity(C):
            kind = constraint.kind

            def run_proj(M):
                X = ml.project_structure(as_matrix(M), kind)
                return FrobSolution(X=X, objective=fro(M - X))

            return run_proj
        if constraint.kind == "nonnegative":
            raise CapabilityError(
                "nonnegativity with general multipliers has no exact solver")
        basis = structure_basis(constraint.kind, B.shape[1], C.shape[0])
        return _prepare_subspace(B, C, AffineSubspace(
            basis=tuple(basis), offset=np.zeros((B.shape[1], C.shape[0]))))
    if isinstance(constraint, FrobeniusBall):
        if not (_is_identity(B) and _is_identity(C)):
            raise CapabilityError("ball constraint requires B = C = I")
        center, radius = constraint.center, constraint.radius

        def run_ball(M):
            X = project_ball(M, center, radius)
            return FrobSolution(X=X, objective=fro(as_matrix(M) - X))

        return run_ball
    if isinstance(constraint, PsdCone):
        if not (C.shape == B.T.shape and np.allclose(C, B.T, atol=1e-12)):
            raise CapabilityError("psd constraint requires C = B^T")
        fB = svd(B)
        return lambda M: solve_psd_congruence(M, B, fB=fB)
    if isinstance(constraint, Intersection):
        pair = _hankel_ball_members(constraint)
        if pair is not None and _is_identity(B):
            struct, ball = pair
            basis = structure_basis(struct.kind, *ball.center.shape)
            return _prepare_lsqi(C, basis, ball.center, ball.radius)
        if _is_identity(B) and _is_identity(C):
            members = constraint.members

            def run_inter(M):
                X = project_intersection(M, members)
                return FrobSolution(X=X, objective=fro(as_matrix(M) - X))

            return run_inter
        raise CapabilityError(
            "intersection constraints require B = I (and C = I unless the "
            "members are a structure subspace and a ball)")
    raise CapabilityError(f"unsupported constraint {type(constraint).__name__}")


def solve(M, B, C, constraint, term=None):
    """Dispatch facade for the supported (constraint, B, C) combinations."""
    return prepare(B, C, constraint, term=term)(M)

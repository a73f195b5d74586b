"""Proximal operators for Schatten norms and norm-subgradient utilities.

Each prox minimizes f(Y) + (mu/2) * ||Y - M||_F^2 where f is the nuclear
norm, the spectral norm, or the p-th power of the Schatten p-norm for
1 < p < infinity.  All three act on singular values only, so they reduce to
scalar problems applied to sigma(M).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matlin import as_matrix, svd

__all__ = [
    "schatten_p",
    "dual_exponent",
    "prox_nuclear",
    "prox_spectral",
    "prox_schatten_p",
    "prox_apply",
    "scalar_root",
    "schatten_norm",
    "DualCertificate",
    "check_subgradient",
]


def schatten_p(p):
    """Validate and normalize a Schatten index: 1, a float > 1, or inf."""
    p = float(p)
    if not p >= 1:
        raise ValueError(f"Schatten index must satisfy p >= 1, got {p}")
    return p


def dual_exponent(p):
    """Holder conjugate q with 1/p + 1/q = 1."""
    p = schatten_p(p)
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _reassemble(f, sigma_new):
    m, n = f.U.shape[0], f.V.shape[0]
    S = np.zeros((m, n))
    k = len(sigma_new)
    S[:k, :k] = np.diag(sigma_new)
    return f.U @ S @ f.V.T


def prox_nuclear(M, mu):
    """Singular value soft thresholding at level 1/mu."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    f = svd(as_matrix(M))
    return _reassemble(f, np.maximum(f.sigma - 1.0 / mu, 0.0))


def prox_spectral(M, mu):
    """Prox of the spectral norm: the top singular values are pulled to a
    common level.

    The level for a leading group of size l is (1/l) (sum_{j<=l} sigma_j
    - 1/mu); l is the largest index whose sigma still sits above that
    level.  When even the full sum falls below 1/mu the level goes
    negative and the true prox is 0, so the common value is clamped at 0.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    f = svd(as_matrix(M))
    s = f.sigma
    if len(s) == 0 or s[0] == 0.0:
        return np.zeros((f.U.shape[0], f.V.shape[0]))
    csum = np.cumsum(s)
    ell = 1
    for i in range(1, len(s)):
        if s[i] >= (csum[i] - 1.0 / mu) / (i + 1):
            ell = i + 1
        else:
            break
    level = max((csum[ell - 1] - 1.0 / mu) / ell, 0.0)
    out = s.copy()
    out[:ell] = level
    return _reassemble(f, out)


def scalar_root(s, mu, p):
    """Unique nonnegative root z of p z^{p-1} + mu (z - s) = 0.

    phi(0) = -mu*s <= 0 and phi(s) = p s^{p-1} >= 0, so the root lies in
    [0, s]: bisection there, then a few Newton steps.  Newton is never
    started at 0 because d/dz z^{p-1} blows up at 0 for p < 2.
    """
    if s < 0 or mu <= 0 or p <= 1:
        raise ValueError("need s >= 0, mu > 0, p > 1")
    if s == 0.0:
        return 0.0

    def phi(z):
        return p * z ** (p - 1.0) + mu * (z - s)

    lo, hi = 0.0, float(s)
    while hi - lo > 1e-12 * (1.0 + s):
        mid = 0.5 * (lo + hi)
        if phi(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    z = 0.5 * (lo + hi)
    for _ in range(5):
        if z <= 0.0:
            break
        dphi = p * (p - 1.0) * z ** (p - 2.0) + mu
        z_new = z - phi(z) / dphi
        if not (0.0 <= z_new <= s):
            break
        z = z_new
    return max(z, 0.0)


def prox_schatten_p(M, mu, p):
    """Prox of ||.||_{sigma,p}^p for finite p > 1, applied per singular value.

    p = 2 has the closed form sigma* = mu sigma / (2 + mu).
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    p = schatten_p(p)
    if not 1 < p < np.inf:
        raise ValueError(f"finite Schatten prox needs 1 < p < inf, got {p}")
    f = svd(as_matrix(M))
    if p == 2.0:
        new = mu * f.sigma / (2.0 + mu)
    else:
        new = np.array([scalar_root(s, mu, p) for s in f.sigma])
    return _reassemble(f, new)


def prox_apply(M, mu, p):
    """Dispatch to the prox matching the Schatten index p."""
    p = schatten_p(p)
    if p == 1:
        return prox_nuclear(M, mu)
    if np.isinf(p):
        return prox_spectral(M, mu)
    return prox_schatten_p(M, mu, p)


def schatten_norm(M, p):
    """||M||_{sigma,p} = l_p norm of the singular values."""
    p = schatten_p(p)
    s = np.linalg.svd(as_matrix(M), compute_uv=False)
    if np.isinf(p):
        return float(s[0]) if len(s) else 0.0
    return float(np.sum(s ** p) ** (1.0 / p))


@dataclass(frozen=True)
class DualCertificate:
    """Candidate subgradient G of ||.||_{sigma,p}, with its singular values g.

    G certifies the norm value at M when tr(G^T M) = ||M||_{sigma,p} and
    ||G||_{sigma,q} <= 1 for the dual exponent q.
    """

    g: np.ndarray
    G: np.ndarray

    @classmethod
    def from_matrix(cls, G):
        G = as_matrix(G)
        return cls(g=np.linalg.svd(G, compute_uv=False), G=G)


def check_subgradient(M, cert, p, tol=1e-8):
    """True iff cert.G is a subgradient of ||.||_{sigma,p} at M.

    For a norm, G in the subdifferential at M iff tr(G^T M) equals the norm
    and the dual norm of G is at most 1; both are checked at tolerance tol.
    """
    M = as_matrix(M)
    G = as_matrix(cert.G)
    if G.shape != M.shape:
        raise ValueError(f"certificate shape {G.shape} does not match "
                         f"matrix shape {M.shape}")
    q = dual_exponent(p)
    value = float(np.sum(G * M))
    norm = schatten_norm(M, p)
    dual = schatten_norm(G, q)
    scale = 1.0 + norm
    return bool(abs(value - norm) <= tol * scale and dual <= 1.0 + tol)

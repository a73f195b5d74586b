"""Dykstra-correction iteration for min over X in S of ||A - B X C|| in a
Schatten norm.

Each sweep alternates an exact Frobenius X-step (frobsolve), a proximal
Y-step in the chosen norm (prox), and the correction update
Delta_{k+1} = Delta_k - Y_{k+1} + A - B X_{k+1} C.  The iteration is
Fejer-monotone toward the set of optimal (Y, Delta) pairs and converges
globally at a sublinear rate for any mu > 0.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .constraints import PsdCone, Unconstrained
from .matlin import NumericError, as_matrix, fro
from . import frobsolve
from .prox import DualCertificate, check_subgradient, prox_apply, schatten_norm, schatten_p

__all__ = [
    "NearnessProblem",
    "SolverOptions",
    "SolverState",
    "SolveReport",
    "initial_state",
    "step",
    "solve",
    "fejer_gap",
    "certify",
]


@dataclass(frozen=True)
class NearnessProblem:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    constraint: object = field(default_factory=Unconstrained)
    term: object = None
    p: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "A", as_matrix(self.A, "A"))
        object.__setattr__(self, "B", as_matrix(self.B, "B"))
        object.__setattr__(self, "C", as_matrix(self.C, "C"))
        object.__setattr__(self, "p", schatten_p(self.p))
        m, n = self.A.shape
        if self.B.shape[0] != m or self.C.shape[1] != n:
            raise ValueError(
                f"shapes not conformable: A {self.A.shape}, B {self.B.shape},"
                f" C {self.C.shape}")

    @property
    def xshape(self):
        return (self.B.shape[1], self.C.shape[0])


@dataclass(frozen=True)
class SolverOptions:
    mu: float = 1.0
    tol: float = 1e-10
    max_iter: int = 100_000
    record_trace: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.mu <= 0 or self.tol <= 0 or self.max_iter < 1:
            raise ValueError("need mu > 0, tol > 0, max_iter >= 1")


@dataclass(frozen=True)
class SolverState:
    X: np.ndarray
    Y: np.ndarray
    Delta: np.ndarray
    k: int
    last_objective: float


@dataclass(frozen=True)
class SolveReport:
    X_star: np.ndarray
    Y_star: np.ndarray
    Delta_star: np.ndarray
    objective: float
    iterations: int
    converged: bool
    trace: tuple
    mu: float
    attainment_guarantee: bool = True


def initial_state(problem, X0=None, Y0=None, Delta0=None):
    """Default start: X = 0, Y = A, Delta = 0, so the first X-step is the
    plain Frobenius solve of the original data."""
    pr, qr = problem.xshape
    X = np.zeros((pr, qr)) if X0 is None else as_matrix(X0, "X0")
    Y = problem.A.copy() if Y0 is None else as_matrix(Y0, "Y0")
    Delta = np.zeros_like(problem.A) if Delta0 is None else as_matrix(Delta0, "Delta0")
    obj = schatten_norm(problem.A - problem.B @ X @ problem.C, problem.p)
    return SolverState(X=X, Y=Y, Delta=Delta, k=0, last_objective=obj)


def _check_finite(M, step_name):
    if not np.all(np.isfinite(M)):
        raise NumericError(f"non-finite iterate produced by the {step_name}")


def step(problem, state, options, xstep=None):
    """One sweep: X-step (exact Frobenius solve on the shifted data),
    Y-step (prox in the problem's norm), Delta-step (correction update).

    Pass xstep = frobsolve.prepare(B, C, constraint, term) to reuse its
    factorizations across sweeps; otherwise it is rebuilt every call.
    """
    A, B, C = problem.A, problem.B, problem.C
    if xstep is None:
        xstep = frobsolve.prepare(B, C, problem.constraint, term=problem.term)
    sol = xstep(A + state.Delta - state.Y)
    X = sol.X
    _check_finite(X, "X-step")
    BXC = B @ X @ C
    if problem.term is not None and sol.x is not None:
        # the affine term rides along inside the X-step residual
        BXC = BXC - frobsolve.term_matrix(problem.term, sol.x, A.shape)
    M = A + state.Delta - BXC
    Y = prox_apply(M, options.mu, problem.p)
    _check_finite(Y, "Y-step")
    Delta = state.Delta - Y + A - BXC
    _check_finite(Delta, "Delta-step")
    obj = schatten_norm(A - BXC, problem.p)
    return SolverState(X=X, Y=Y, Delta=Delta, k=state.k + 1,
                       last_objective=obj)


def _constraint_residual(problem, state):
    return fro(state.Y - (problem.A - problem.B @ state.X @ problem.C))


def solve(problem, options=None, callback=None, X0=None, Y0=None, Delta0=None):
    """Iterate until the stop rule or max_iter.

    Stops when max(||Y_{k+1}-Y_k||, ||Delta_{k+1}-Delta_k||,
    ||Y - (A - BXC)||) <= tol * (1 + ||A||_F).  callback, if given, receives
    (k, objective, step_norm, constraint_residual, elapsed_ms) every
    iteration and may return True to request an early stop (reported as
    converged).
    """
    if options is None:
        options = SolverOptions()
    state = initial_state(problem, X0=X0, Y0=Y0, Delta0=Delta0)
    scale = 1.0 + fro(problem.A)
    xstep = frobsolve.prepare(problem.B, problem.C, problem.constraint,
                              term=problem.term)
    trace = []
    t0 = time.perf_counter()
    converged = False
    for _ in range(options.max_iter):
        prev = state
        state = step(problem, prev, options, xstep=xstep)
        step_norm = max(fro(state.Y - prev.Y), fro(state.Delta - prev.Delta))
        resid = _constraint_residual(problem, state)
        elapsed_ms = (time.perf_counter() - t0) * 1e3
        row = (state.k, state.last_objective, step_norm, resid, elapsed_ms)
        if options.record_trace:
            trace.append(row)
        stop_requested = bool(callback(*row)) if callback is not None else False
        if max(step_norm, resid) <= options.tol * scale or stop_requested:
            converged = True
            break
    guarantee = not (isinstance(problem.constraint, PsdCone)
                     and not frobsolve.is_identity(problem.B))
    return SolveReport(X_star=state.X, Y_star=state.Y, Delta_star=state.Delta,
                       objective=state.last_objective,
                       iterations=state.k, converged=converged,
                       trace=tuple(trace), mu=options.mu,
                       attainment_guarantee=guarantee)


def fejer_gap(state_pair, reference):
    """Decrease of ||Y - Y_ref||^2 + ||Delta - Delta_ref||^2 across one step.

    When the reference is an optimal (Y*, Delta*) pair, the gap is
    nonnegative and at least the squared step norms.
    """
    s0, s1 = state_pair
    Y_ref, D_ref = reference
    before = fro(s0.Y - Y_ref) ** 2 + fro(s0.Delta - D_ref) ** 2
    after = fro(s1.Y - Y_ref) ** 2 + fro(s1.Delta - D_ref) ** 2
    return before - after


def _sample_feasible(problem, rng):
    """Draw a random member of the constraint set, or None if no sampler."""
    from . import constraints as cn
    c = problem.constraint
    pr, qr = problem.xshape
    G = rng.standard_normal((pr, qr))
    if isinstance(c, cn.Unconstrained):
        return G
    if isinstance(c, cn.RankAtMost):
        r = min(c.r, pr, qr)
        return rng.standard_normal((pr, r)) @ rng.standard_normal((r, qr))
    if isinstance(c, cn.PsdCone):
        H = rng.standard_normal((pr, pr))
        return H @ H.T / pr
    if isinstance(c, cn.Structural):
        from .matlin import project_structure
        return project_structure(G, c.kind)
    if isinstance(c, cn.FrobeniusBall):
        return frobsolve.project_ball(G, c.center, c.radius)
    if isinstance(c, cn.AffineSubspace):
        X = c.offset.copy()
        for E in c.basis:
            X = X + rng.standard_normal() * E
        return X
    if isinstance(c, cn.PrescribedEigenvalue):
        if pr != qr:
            return None
        vals = rng.standard_normal(pr)
        vals[0] = c.lam
        S = rng.standard_normal((pr, pr)) + pr * np.eye(pr)
        return S @ np.diag(vals) @ np.linalg.inv(S)
    if isinstance(c, cn.ProductConstraint):
        sub = frobsolve.product_to_subspace(c, (pr, qr))
        X = sub.offset.copy()
        for E in sub.basis:
            X = X + rng.standard_normal() * E
        return X
    if isinstance(c, cn.Intersection):
        try:
            return frobsolve.project_intersection(G, c.members)
        except cn.CapabilityError:
            return None
    return None


def certify(problem, report, samples=1000, tol=1e-6):
    """Optimality certificate from the final correction: G* = mu * Delta*.

    Checks G* is a norm subgradient at Y* and spot-checks the variational
    inequality tr(G*^T B (X* - X) C) >= 0 against random feasible X.
    Returns (certificate, passed, worst_violation); constraint kinds
    without a sampler get the subgradient check only.
    """
    G = report.mu * report.Delta_star
    # for finite p > 1 the driver minimizes the p-th power of the norm, so
    # mu*Delta sits in p*||Y||^{p-1} times the norm's subdifferential
    G_norm = G
    if 1 < problem.p < np.inf:
        ynorm = schatten_norm(report.Y_star, problem.p)
        if ynorm > 0:
            G_norm = G / (problem.p * ynorm ** (problem.p - 1.0))
    cert = DualCertificate.from_matrix(G_norm)
    sub_ok = check_subgradient(report.Y_star, cert, problem.p, tol=tol)
    rng = np.random.default_rng(0)
    worst = np.inf
    scale = 1.0 + fro(G) * fro(problem.B) * fro(problem.C)
    BXC_star = problem.B @ report.X_star @ problem.C
    for _ in range(samples):
        X = _sample_feasible(problem, rng)
        if X is None:
            break
        val = float(np.sum(G * (BXC_star - problem.B @ X @ problem.C)))
        worst = min(worst, val)
    if np.isinf(worst):
        return cert, sub_ok, None
    passed = sub_ok and worst >= -tol * scale
    return cert, passed, worst

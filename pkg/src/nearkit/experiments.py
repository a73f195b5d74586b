"""Seeded experiment generators and runners behind the CLI benchmarks.

Each generator re-verifies its planted property (rank, eigenvalue, Hankel
structure, positive semidefiniteness) before handing the instance to the
solver, so a generator bug fails fast instead of contaminating results.
All randomness flows through numpy Generators seeded from the experiment
seed, so every run is reproducible.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import constraints as cn
from . import dykstra as dk
from .matlin import fro, project_structure
from .prox import check_subgradient, DualCertificate, schatten_norm

__all__ = [
    "RECOVERY_CASES",
    "thread_count",
    "recovery_instance",
    "run_recover_bench",
    "hankel_matrix",
    "hankel_spread",
    "sysid_instance",
    "run_sysid",
    "cfar_instance",
    "run_cfar",
    "MIRSKY_A", "MIRSKY_B", "MIRSKY_C", "MIRSKY_CASES",
    "run_mirsky",
]

RECOVERY_CASES = ("i", "ii", "iii", "iv")


def thread_count():
    """Trial parallelism cap from NEARKIT_THREADS (default 1)."""
    raw = os.environ.get("NEARKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_trials(fn, args_list):
    workers = thread_count()
    if workers == 1 or len(args_list) <= 1:
        return [fn(*a) for a in args_list]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda a: fn(*a), args_list))


# ---------------------------------------------------------------------------
# matrix recovery bench: backward-constructed instances A = B X C

def recovery_instance(case, n, rng):
    """One backward-constructed instance: B, C, and an X satisfying the
    case's constraint; A = B X C so the optimum and its value are known."""
    B = rng.standard_normal((n, n))
    C = rng.standard_normal((n, n))
    if case == "i":
        X = rng.standard_normal((n, n))
        constraint = cn.Unconstrained()
    elif case == "ii":
        X = rng.standard_normal((n, n))
        k = max(1, n // 4)
        F = rng.standard_normal((k, n))
        G = rng.standard_normal((n, k))
        H = F @ X @ G
        constraint = cn.ProductConstraint(F=F, G=G, H=H)
    elif case == "iii":
        lam = 1.0
        vals = rng.standard_normal(n)
        vals[0] = lam
        S = rng.standard_normal((n, n)) + n * np.eye(n)
        X = S @ np.diag(vals) @ np.linalg.inv(S)
        sv = np.linalg.svd(X - lam * np.eye(n), compute_uv=False)
        if sv[-1] > 1e-8 * (1.0 + sv[0]):
            raise AssertionError("planted eigenvalue lost in construction")
        constraint = cn.PrescribedEigenvalue(lam)
    elif case == "iv":
        r = max(1, n // 4)
        X = rng.standard_normal((n, r)) @ rng.standard_normal((r, n))
        if np.linalg.matrix_rank(X) > r:
            raise AssertionError("planted rank lost in construction")
        constraint = cn.RankAtMost(r)
    else:
        raise ValueError(f"unknown recovery case {case!r}")
    A = B @ X @ C
    return A, B, C, X, constraint


def _recover_trial(case, n, p, trial, seed, tol, max_iter, stop_fwd):
    """Solve one backward-constructed instance, stopping as soon as the
    relative forward error reaches stop_fwd (the speed-measurement protocol
    for instances whose optimum is known)."""
    rng = np.random.default_rng([seed, RECOVERY_CASES.index(case), trial])
    A, B, C, X_true, constraint = recovery_instance(case, n, rng)
    problem = dk.NearnessProblem(A=A, B=B, C=C, constraint=constraint, p=p)
    options = dk.SolverOptions(tol=tol, max_iter=max_iter)
    nX = fro(X_true)
    state = dk.initial_state(problem)
    scale = 1.0 + fro(A)
    from . import frobsolve
    xstep = frobsolve.prepare(B, C, constraint)
    t0 = time.perf_counter()
    fwd = fro(state.X - X_true) / nX
    for _ in range(max_iter):
        prev = state
        state = dk.step(problem, prev, options, xstep=xstep)
        fwd = fro(state.X - X_true) / nX
        if fwd <= stop_fwd:
            break
        step_norm = max(fro(state.Y - prev.Y), fro(state.Delta - prev.Delta))
        resid = fro(state.Y - (A - B @ state.X @ C))
        if max(step_norm, resid) <= tol * scale:
            break
    wall_ms = (time.perf_counter() - t0) * 1e3
    objective = schatten_norm(A - B @ state.X @ C, p)
    return {
        "experiment": f"recover-{case}",
        "n": n,
        "p": p,
        "constraint": type(constraint).__name__,
        "iters": state.k,
        "objective": objective,
        "forward_error": fwd,
        "feasibility_violation": 0.0,
        "wall_ms": wall_ms,
        "seed": seed,
    }, state.X, X_true


def run_recover_bench(n=32, p_list=(1.0, 1.5, np.inf), cases=RECOVERY_CASES,
                      trials=10, seed=0, tol=1e-14, max_iter=100_000,
                      stop_fwd=1e-8, with_matrices=False):
    """Full sweep over (case, p, trial); returns result rows in a fixed,
    deterministic order regardless of thread count.  With with_matrices=True
    each element is (row, X_solved, X_true) for audit output."""
    jobs = [(case, n, p, t, seed + t, tol, max_iter, stop_fwd)
            for case in cases for p in p_list for t in range(trials)]
    out = _map_trials(_recover_trial, jobs)
    if with_matrices:
        return out
    return [row for row, _, _ in out]


# ---------------------------------------------------------------------------
# system identification: min ||X C||_{sigma,1}, X Hankel within delta of X0

def hankel_matrix(values, n):
    """n x n Hankel matrix from its 2n-1 anti-diagonal values."""
    values = np.asarray(values, dtype=float)
    if len(values) != 2 * n - 1:
        raise ValueError("need 2n-1 anti-diagonal values")
    X = np.empty((n, n))
    for i in range(n):
        X[i, :] = values[i:i + n]
    return X


def hankel_spread(X):
    """Largest within-anti-diagonal deviation; 0 iff X is exactly Hankel."""
    return float(np.max(np.abs(X - project_structure(X, "hankel"))))


def sysid_instance(n, phat, delta, rng):
    C = rng.standard_normal((n + 1, phat))
    if np.linalg.matrix_rank(C) < min(C.shape):
        raise AssertionError("generated C is rank deficient")
    Xhat = hankel_matrix(rng.standard_normal(2 * (n + 1) - 1), n + 1)
    if hankel_spread(Xhat) > 1e-12:
        raise AssertionError("generated center is not Hankel")
    A = np.zeros((n + 1, phat))
    B = np.eye(n + 1)
    constraint = cn.Intersection((cn.Structural("hankel"),
                                  cn.FrobeniusBall(center=Xhat, radius=delta)))
    return A, B, C, Xhat, constraint


def run_sysid(n_list=(10, 20), delta=0.5, seed=0, tol=1e-10,
              max_iter=100_000):
    rows = []
    for n in n_list:
        phat = math.ceil(0.8 * n)
        rng = np.random.default_rng([seed, n])
        A, B, C, Xhat, constraint = sysid_instance(n, phat, delta, rng)
        problem = dk.NearnessProblem(A=A, B=B, C=C, constraint=constraint,
                                     p=1.0)
        t0 = time.perf_counter()
        report = dk.solve(problem, dk.SolverOptions(tol=tol,
                                                    max_iter=max_iter))
        wall_ms = (time.perf_counter() - t0) * 1e3
        X = report.X_star
        spread = hankel_spread(X)
        if spread > 1e-12:
            raise AssertionError(
                f"sysid output is not Hankel (spread {spread:.2e})")
        violation = max(0.0, fro(Xhat - X) - delta)
        rows.append({
            "experiment": "sysid",
            "n": n,
            "p": 1.0,
            "constraint": "HankelBall",
            "iters": report.iterations,
            "objective": report.objective,
            "forward_error": None,
            "feasibility_violation": violation,
            "wall_ms": wall_ms,
            "seed": seed,
        })
    return rows


# ---------------------------------------------------------------------------
# CFAR covariance fitting: min over psd X of ||A - B X B^T||_{sigma,inf}

def cfar_instance(n, pprime, rng):
    G = rng.standard_normal((n, n))
    A = G @ G.T / n
    if np.linalg.eigvalsh(A)[0] < -1e-12:
        raise AssertionError("generated A is not positive semidefinite")
    B = rng.standard_normal((n, pprime))
    if np.linalg.matrix_rank(B) < pprime:
        raise AssertionError("generated B is rank deficient")
    return A, B


def run_cfar(n=10, pprime_list=None, seed=0, tol=1e-9, max_iter=100_000):
    if pprime_list is None:
        pprime_list = tuple(range(1, n + 1))
    rows = []
    for pp in pprime_list:
        rng = np.random.default_rng([seed, n, pp])
        A, B = cfar_instance(n, pp, rng)
        problem = dk.NearnessProblem(A=A, B=B, C=B.T,
                                     constraint=cn.PsdCone(), p=np.inf)
        t0 = time.perf_counter()
        report = dk.solve(problem, dk.SolverOptions(tol=tol,
                                                    max_iter=max_iter))
        wall_ms = (time.perf_counter() - t0) * 1e3
        X = 0.5 * (report.X_star + report.X_star.T)
        w = np.linalg.eigvalsh(X)
        lam_min, lam_max = float(w[0]), float(w[-1])
        if lam_min < -1e-10 * max(lam_max, 1.0):
            raise AssertionError(
                f"CFAR output is not psd (lambda_min {lam_min:.2e})")
        rows.append({
            "experiment": "cfar",
            "n": n,
            "p": np.inf,
            "constraint": "PsdCone",
            "iters": report.iterations,
            "objective": report.objective,
            "forward_error": None,
            "feasibility_violation": max(0.0, -lam_min),
            "wall_ms": wall_ms,
            "seed": seed,
        })
    return rows


# ---------------------------------------------------------------------------
# the 2x2 rank-one counterexample: the best rank-1 fit depends on the norm

MIRSKY_A = np.array([[0.0, 1.0], [1.0, 1.0]])
MIRSKY_B = np.diag([-1.0, 0.0])
MIRSKY_C = np.diag([1.0, 0.0])

_SQ2, _SQ3 = math.sqrt(2.0), math.sqrt(3.0)
# (p, optimal objective, top-left residual entry, norm certificate of the
#  optimal residual)
MIRSKY_CASES = (
    (1.0, 2.0, 1.0, np.array([[0.0, 1.0], [1.0, 0.0]])),
    (2.0, _SQ3, 0.0, np.array([[0.0, 1.0 / _SQ3],
                               [1.0 / _SQ3, 1.0 / _SQ3]])),
    (np.inf, _SQ2, -1.0, np.array([[0.0, 1.0 / (2.0 * _SQ2)],
                                   [1.0 / (2.0 * _SQ2), 1.0 / _SQ2]])),
)


def run_mirsky(mu=1.0, tol=1e-12, max_iter=50_000):
    """Solve the counterexample in all three norms and validate objectives,
    residual corners, and the optimality certificates."""
    results = []
    for p, expected, corner, cert_matrix in MIRSKY_CASES:
        problem = dk.NearnessProblem(A=MIRSKY_A, B=MIRSKY_B, C=MIRSKY_C,
                                     constraint=cn.RankAtMost(1), p=p)
        report = dk.solve(problem, dk.SolverOptions(mu=mu, tol=tol,
                                                    max_iter=max_iter))
        residual = MIRSKY_A - MIRSKY_B @ report.X_star @ MIRSKY_C
        cert = DualCertificate.from_matrix(cert_matrix)
        results.append({
            "p": p,
            "objective": report.objective,
            "expected": expected,
            "corner": float(residual[0, 0]),
            "expected_corner": corner,
            "iterations": report.iterations,
            "certificate_ok": check_subgradient(residual, cert, p, tol=1e-6),
        })
    return results

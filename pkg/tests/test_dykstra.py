"""Iterative driver tests: step algebra, convergence, monitors, certificates."""

import math

import numpy as np
import pytest

from nearkit import constraints as cn
from nearkit import dykstra as dk
from nearkit import frobsolve as fs
from nearkit.matlin import NumericError, fro
from nearkit.prox import prox_apply, prox_nuclear, schatten_norm

MIRSKY_A = np.array([[0.0, 1.0], [1.0, 1.0]])
MIRSKY_B = np.diag([-1.0, 0.0])
MIRSKY_C = np.diag([1.0, 0.0])


def rank1_problem(p):
    return dk.NearnessProblem(A=MIRSKY_A, B=MIRSKY_B, C=MIRSKY_C,
                              constraint=cn.RankAtMost(1), p=p)


# ---------------------------------------------------------------------------
# single step

def test_step_x_optimality_and_delta_identity():
    rng = np.random.default_rng(0)
    B, C, X0 = (rng.standard_normal((3, 3)) for _ in range(3))
    A = B @ X0 @ C
    problem = dk.NearnessProblem(A=A, B=B, C=C, p=1.0)
    options = dk.SolverOptions()
    s0 = dk.initial_state(problem)
    s1 = dk.step(problem, s0, options)
    assert fro(A - B @ s1.X @ C) <= fro(A) + 1e-12
    # Delta bookkeeping holds exactly every step
    for _ in range(5):
        s_prev, s1 = s1, dk.step(problem, s1, options)
        resid = s1.Delta - s_prev.Delta + s1.Y - A + B @ s1.X @ C
        assert fro(resid) <= 1e-13 * (1 + fro(A))


def test_step_matches_hand_evaluation_on_counterexample():
    problem = rank1_problem(1.0)
    options = dk.SolverOptions(mu=1.0)
    s0 = dk.initial_state(problem)
    s1 = dk.step(problem, s0, options)
    # hand evaluation of the three displayed updates at k = 0
    X1 = fs.solve(MIRSKY_A + s0.Delta - s0.Y, MIRSKY_B, MIRSKY_C,
                  cn.RankAtMost(1)).X
    M = MIRSKY_A + s0.Delta - MIRSKY_B @ X1 @ MIRSKY_C
    Y1 = prox_nuclear(M, options.mu)
    D1 = s0.Delta - Y1 + MIRSKY_A - MIRSKY_B @ X1 @ MIRSKY_C
    assert fro(s1.X - X1) <= 1e-13
    assert fro(s1.Y - Y1) <= 1e-13
    assert fro(s1.Delta - D1) <= 1e-13


def test_step_rejects_nonfinite():
    problem = dk.NearnessProblem(A=np.eye(2), B=np.eye(2), C=np.eye(2), p=1.0)
    state = dk.SolverState(X=np.eye(2), Y=np.full((2, 2), np.nan),
                           Delta=np.zeros((2, 2)), k=0, last_objective=0.0)
    with pytest.raises((NumericError, ValueError)):
        dk.step(problem, state, dk.SolverOptions())


# ---------------------------------------------------------------------------
# full solve

@pytest.mark.parametrize("p,expected,corner", [
    (1.0, 2.0, 1.0),
    (2.0, math.sqrt(3.0), 0.0),
    (np.inf, math.sqrt(2.0), -1.0),
])
def test_counterexample_objectives(p, expected, corner):
    report = dk.solve(rank1_problem(p),
                      dk.SolverOptions(tol=1e-12, max_iter=50_000))
    assert abs(report.objective - expected) <= 1e-6
    residual = MIRSKY_A - MIRSKY_B @ report.X_star @ MIRSKY_C
    assert abs(residual[0, 0] - corner) <= 1e-4


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, np.inf])
def test_zero_residual_recovery(p):
    rng = np.random.default_rng(3)
    B, C, X0 = (rng.standard_normal((4, 4)) for _ in range(3))
    problem = dk.NearnessProblem(A=B @ X0 @ C, B=B, C=C, p=p)
    report = dk.solve(problem, dk.SolverOptions(tol=1e-12, max_iter=50_000))
    assert fro(report.X_star - X0) / fro(X0) <= 1e-8


def test_p2_unconstrained_matches_closed_form():
    rng = np.random.default_rng(5)
    A, B, C = (rng.standard_normal((4, 4)) for _ in range(3))
    problem = dk.NearnessProblem(A=A, B=B, C=C, p=2.0)
    report = dk.solve(problem, dk.SolverOptions(tol=1e-12, max_iter=50_000))
    ref = fs.solve_unconstrained(A, B, C).objective
    assert abs(report.objective - ref) <= 1e-9 * (1 + ref)


def test_report_objective_recomputed():
    report = dk.solve(rank1_problem(1.0), dk.SolverOptions(tol=1e-10))
    obj = schatten_norm(MIRSKY_A - MIRSKY_B @ report.X_star @ MIRSKY_C, 1.0)
    assert abs(report.objective - obj) <= 1e-9 * (1 + obj)


def test_callback_contract_and_early_stop():
    rows = []

    def cb(k, obj, step_norm, resid, elapsed_ms):
        rows.append((k, obj, step_norm, resid, elapsed_ms))
        return k >= 3

    report = dk.solve(rank1_problem(1.0), dk.SolverOptions(tol=1e-15),
                      callback=cb)
    assert report.iterations == 3
    assert report.converged
    assert [r[0] for r in rows] == [1, 2, 3]
    assert all(r[4] >= 0 for r in rows)


def test_trace_recording():
    report = dk.solve(rank1_problem(1.0),
                      dk.SolverOptions(tol=1e-10, record_trace=True))
    assert len(report.trace) == report.iterations
    ks, objs = [r[0] for r in report.trace], [r[1] for r in report.trace]
    assert ks == list(range(1, report.iterations + 1))
    assert abs(objs[-1] - report.objective) <= 1e-12


def test_attainment_flag_for_psd_with_general_b():
    rng = np.random.default_rng(7)
    G = rng.standard_normal((4, 4))
    A = G @ G.T / 4
    B = rng.standard_normal((4, 2))
    problem = dk.NearnessProblem(A=A, B=B, C=B.T, constraint=cn.PsdCone(),
                                 p=np.inf)
    report = dk.solve(problem, dk.SolverOptions(tol=1e-8))
    assert not report.attainment_guarantee
    problem = dk.NearnessProblem(A=A, B=np.eye(4), C=np.eye(4),
                                 constraint=cn.PsdCone(), p=np.inf)
    report = dk.solve(problem, dk.SolverOptions(tol=1e-8))
    assert report.attainment_guarantee


# ---------------------------------------------------------------------------
# monitors

def test_fejer_gap_zero_residual_run():
    rng = np.random.default_rng(11)
    B, C, X0 = (rng.standard_normal((3, 3)) for _ in range(3))
    scale = fro(B @ X0 @ C)
    A = B @ X0 @ C / scale
    problem = dk.NearnessProblem(A=A, B=B, C=C, p=1.0)
    options = dk.SolverOptions()
    # start from Y0 = 0 so mu*Delta0 is a subgradient at Y0 and the descent
    # lemma applies from the first transition
    state = dk.initial_state(problem, Y0=np.zeros_like(A))
    ref = (np.zeros_like(A), np.zeros_like(A))
    for _ in range(200):
        prev, state = state, dk.step(problem, state, options)
        gap = dk.fejer_gap((prev, state), ref)
        assert gap >= -1e-12
        steps = fro(state.Y - prev.Y) ** 2 + fro(state.Delta - prev.Delta) ** 2
        assert gap >= steps - 1e-10


def test_fejer_gap_equal_states_is_zero():
    Z = np.zeros((2, 2))
    s = dk.SolverState(X=Z, Y=Z, Delta=Z, k=0, last_objective=0.0)
    assert dk.fejer_gap((s, s), (Z, Z)) == 0.0


def test_certify_converged_runs():
    for p in (1.0, 2.0, np.inf):
        report = dk.solve(rank1_problem(p),
                          dk.SolverOptions(tol=1e-12, max_iter=50_000))
        cert, passed, worst = dk.certify(rank1_problem(p), report)
        assert passed
        assert worst is None or worst >= -1e-6 * 10


def test_certify_value_matches_objective_nuclear():
    problem = rank1_problem(1.0)
    report = dk.solve(problem, dk.SolverOptions(tol=1e-12, max_iter=50_000))
    G = report.mu * report.Delta_star
    val = float(np.sum(G * report.Y_star))
    assert abs(val - 2.0) <= 1e-6


def test_certify_negative_control():
    problem = rank1_problem(np.inf)
    report = dk.solve(problem, dk.SolverOptions(max_iter=1))
    _, passed, _ = dk.certify(problem, report)
    assert not passed


# ---------------------------------------------------------------------------
# robustness

def test_mu_robustness():
    objs = [dk.solve(rank1_problem(1.0),
                     dk.SolverOptions(mu=mu, tol=1e-12,
                                      max_iter=100_000)).objective
            for mu in (0.1, 1.0, 10.0)]
    assert max(objs) - min(objs) <= 1e-6


def test_initialization_robustness():
    rng = np.random.default_rng(13)
    problem = rank1_problem(np.inf)
    opts = dk.SolverOptions(tol=1e-12, max_iter=100_000)
    base = dk.solve(problem, opts).objective
    alt1 = dk.solve(problem, opts, Y0=np.zeros((2, 2))).objective
    alt2 = dk.solve(problem, opts,
                    X0=rng.standard_normal((2, 2)),
                    Y0=rng.standard_normal((2, 2)),
                    Delta0=rng.standard_normal((2, 2))).objective
    assert max(base, alt1, alt2) - min(base, alt1, alt2) <= 1e-6

"""Command-line front end.

Commands (all invoked as ``nearkit <command> --config <json> [--seed N]
[--out DIR]``):

``solve``
    Solve one nearness problem read from matrix CSV files; writes
    ``X_star.csv``, ``report.json``, and a streamed ``trace.csv``.
``recover-bench``
    Seeded backward-constructed recovery sweep; writes ``results.csv`` plus
    per-trial ground-truth/solution audit matrices.
``sysid``
    Trace-norm minimization over Hankel matrices within a Frobenius ball;
    writes ``results.csv``.
``cfar``
    Spectral-norm covariance fitting over the positive semidefinite cone;
    writes ``results.csv``.
``example-mirsky``
    Regression run of the 2x2 rank-one counterexample in all three norms;
    prints a table and exits 0 only if every value and certificate matches.
``prox``
    Apply one Schatten proximal operator to a matrix; writes ``Y.csv``.

Config files are JSON; the schema is documented in the repository README.
Exit codes: 0 success, 1 numeric failure, 2 capability error, 3 I/O or
parse error.  ``NEARKIT_THREADS`` caps trial parallelism in the benches.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import constraints as cn
from . import dykstra as dk
from . import experiments as ex
from .constraints import CapabilityError
from .io import ParseError, read_matrix, write_matrix, write_results
from .matlin import NumericError
from .prox import prox_apply, schatten_norm, schatten_p

__all__ = ["main"]

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_CAPABILITY = 2
EXIT_IO = 3


class ConfigError(ValueError):
    """Invalid or missing configuration value; reported as an I/O error."""


# ---------------------------------------------------------------------------
# config handling

def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, "r") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return cfg


def parse_p(raw):
    """Accept 1, any number >= 1, or the string 'inf'."""
    if isinstance(raw, str):
        if raw.lower() in ("inf", "infinity"):
            return np.inf
        try:
            raw = float(raw)
        except ValueError:
            raise ConfigError(f"invalid Schatten exponent {raw!r}") from None
    try:
        return schatten_p(raw)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _relpath(cfg_dir, path):
    if os.path.isabs(path):
        return path
    return os.path.join(cfg_dir, path)


def _maybe_matrix(cfg, key, cfg_dir):
    if key not in cfg or cfg[key] is None:
        return None
    return read_matrix(_relpath(cfg_dir, cfg[key]))


def parse_constraint(desc, cfg_dir):
    """Build a constraint object from its JSON descriptor (keyed by 'kind')."""
    if desc is None:
        return cn.Unconstrained()
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError("constraint descriptor must be an object with a "
                          "'kind' field")
    kind = desc["kind"]
    try:
        if kind == "unconstrained":
            return cn.Unconstrained()
        if kind == "rank":
            return cn.RankAtMost(int(desc["r"]))
        if kind == "psd":
            return cn.PsdCone()
        if kind == "structural":
            return cn.Structural(desc["structure"])
        if kind == "ball":
            center = read_matrix(_relpath(cfg_dir, desc["center"]))
            return cn.FrobeniusBall(center=center,
                                    radius=float(desc["radius"]))
        if kind == "eigenvalue":
            return cn.PrescribedEigenvalue(float(desc["value"]))
        if kind == "product":
            return cn.ProductConstraint(
                F=read_matrix(_relpath(cfg_dir, desc["F"])),
                G=read_matrix(_relpath(cfg_dir, desc["G"])),
                H=read_matrix(_relpath(cfg_dir, desc["H"])))
        if kind == "intersection":
            members = tuple(parse_constraint(m, cfg_dir)
                            for m in desc["members"])
            return cn.Intersection(members)
    except KeyError as e:
        raise ConfigError(
            f"constraint kind {kind!r} is missing field {e.args[0]!r}") \
            from None
    raise ConfigError(f"unknown constraint kind {kind!r}")


def _out_dir(cfg, args):
    out = args.out or cfg.get("out") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _seed(cfg, args):
    if args.seed is not None:
        return args.seed
    return int(cfg.get("seed", 0))


def _p_name(p):
    if np.isinf(p):
        return "inf"
    return format(p, "g")


# ---------------------------------------------------------------------------
# commands

def cmd_solve(cfg, args):
    cfg_dir = os.path.dirname(os.path.abspath(args.config)) if args.config else "."
    A = _maybe_matrix(cfg, "A", cfg_dir)
    if A is None:
        raise ConfigError("solve config needs an 'A' matrix path")
    B = _maybe_matrix(cfg, "B", cfg_dir)
    C = _maybe_matrix(cfg, "C", cfg_dir)
    if B is None:
        B = np.eye(A.shape[0])
    if C is None:
        C = np.eye(A.shape[1])
    constraint = parse_constraint(cfg.get("constraint"), cfg_dir)
    p = parse_p(cfg.get("p", 2))
    problem = dk.NearnessProblem(A=A, B=B, C=C, constraint=constraint, p=p)
    options = dk.SolverOptions(mu=float(cfg.get("mu", 1.0)),
                               tol=float(cfg.get("tol", 1e-10)),
                               max_iter=int(cfg.get("max_iter", 100_000)),
                               seed=_seed(cfg, args))
    out = _out_dir(cfg, args)
    with open(os.path.join(out, "trace.csv"), "w") as trace_fh:
        trace_fh.write("k,objective,step_norm,constraint_residual,elapsed_ms\n")

        def stream(k, obj, step_norm, resid, elapsed_ms):
            trace_fh.write(f"{k},{obj:.17g},{step_norm:.17g},"
                           f"{resid:.17g},{elapsed_ms:.3f}\n")
            return False

        report = dk.solve(problem, options, callback=stream)
    write_matrix(os.path.join(out, "X_star.csv"), report.X_star)
    with open(os.path.join(out, "report.json"), "w") as fh:
        json.dump({
            "objective": report.objective,
            "iterations": report.iterations,
            "converged": report.converged,
            "p": _p_name(p),
            "mu": options.mu,
            "attainment_guarantee": report.attainment_guarantee,
        }, fh, indent=2)
        fh.write("\n")
    print(f"objective {report.objective:.12g} after {report.iterations} "
          f"iterations (converged={report.converged})")
    return EXIT_OK


def cmd_recover_bench(cfg, args):
    out = _out_dir(cfg, args)
    p_list = tuple(parse_p(p) for p in cfg.get("p_list", [1, 1.5, "inf"]))
    cases = tuple(cfg.get("cases", ex.RECOVERY_CASES))
    results = ex.run_recover_bench(
        n=int(cfg.get("n", 32)), p_list=p_list, cases=cases,
        trials=int(cfg.get("trials", 10)), seed=_seed(cfg, args),
        tol=float(cfg.get("tol", 1e-14)),
        max_iter=int(cfg.get("max_iter", 100_000)),
        stop_fwd=float(cfg.get("stop_fwd", 1e-8)),
        with_matrices=True)
    audit = os.path.join(out, "audit")
    os.makedirs(audit, exist_ok=True)
    rows = []
    for row, X, X_true in results:
        rows.append(row)
        tag = (f"{row['experiment']}_p{_p_name(row['p'])}"
               f"_t{row['seed'] - _seed(cfg, args)}")
        write_matrix(os.path.join(audit, f"X_true_{tag}.csv"), X_true)
        write_matrix(os.path.join(audit, f"X_star_{tag}.csv"), X)
    write_results(os.path.join(out, "results.csv"), rows)
    worst = max(r["forward_error"] for r in rows)
    print(f"{len(rows)} trials; worst relative forward error {worst:.3e}")
    return EXIT_OK


def cmd_sysid(cfg, args):
    out = _out_dir(cfg, args)
    rows = ex.run_sysid(n_list=tuple(cfg.get("n_list", [10, 20])),
                        delta=float(cfg.get("delta", 0.5)),
                        seed=_seed(cfg, args),
                        tol=float(cfg.get("tol", 1e-10)),
                        max_iter=int(cfg.get("max_iter", 100_000)))
    write_results(os.path.join(out, "results.csv"), rows)
    worst = max(r["feasibility_violation"] for r in rows)
    print(f"{len(rows)} instances; worst feasibility violation {worst:.3e}")
    return EXIT_OK


def cmd_cfar(cfg, args):
    out = _out_dir(cfg, args)
    n = int(cfg.get("n", 10))
    pprimes = cfg.get("pprime_list")
    pprimes = tuple(int(v) for v in pprimes) if pprimes else None
    rows = ex.run_cfar(n=n, pprime_list=pprimes, seed=_seed(cfg, args),
                       tol=float(cfg.get("tol", 1e-9)),
                       max_iter=int(cfg.get("max_iter", 100_000)))
    write_results(os.path.join(out, "results.csv"), rows)
    worst = max(r["feasibility_violation"] for r in rows)
    print(f"{len(rows)} instances; worst cone violation {worst:.3e}")
    return EXIT_OK


def cmd_example_mirsky(cfg, args):
    results = ex.run_mirsky(mu=float(cfg.get("mu", 1.0)),
                            tol=float(cfg.get("tol", 1e-12)),
                            max_iter=int(cfg.get("max_iter", 50_000)))
    ok = True
    print(f"{'p':>5} {'objective':>12} {'expected':>12} "
          f"{'corner':>9} {'certificate':>11}")
    for r in results:
        match = (abs(r["objective"] - r["expected"]) <= 1e-6
                 and abs(r["corner"] - r["expected_corner"]) <= 1e-4
                 and r["certificate_ok"])
        ok = ok and match
        print(f"{_p_name(r['p']):>5} {r['objective']:>12.8f} "
              f"{r['expected']:>12.8f} {r['corner']:>9.5f} "
              f"{'ok' if r['certificate_ok'] else 'FAIL':>11}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_prox(cfg, args):
    cfg_dir = os.path.dirname(os.path.abspath(args.config)) if args.config else "."
    M = _maybe_matrix(cfg, "M", cfg_dir)
    if M is None:
        raise ConfigError("prox config needs an 'M' matrix path")
    mu = float(cfg.get("mu", 1.0))
    p = parse_p(cfg.get("p", 2))
    Y = prox_apply(M, mu, p)
    out = _out_dir(cfg, args)
    write_matrix(os.path.join(out, "Y.csv"), Y)
    print(f"||Y||_{_p_name(p)} = {schatten_norm(Y, p):.12g}")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "recover-bench": cmd_recover_bench,
    "sysid": cmd_sysid,
    "cfar": cmd_cfar,
    "example-mirsky": cmd_example_mirsky,
    "prox": cmd_prox,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="nearkit",
        description="Solvers for min over X in S of ||A - B X C|| in "
                    "Schatten norms.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out", default=None,
                        help="override the config output directory")
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except (ParseError, ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except CapabilityError as e:
        print(f"capability error: {e}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (NumericError, np.linalg.LinAlgError) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        # bad shapes / parameters from user-supplied data
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Matrix and result file I/O.

Matrix files are plain CSV: one matrix row per line, comma-separated decimal
floats, no header; dimensions are inferred.  The writer emits 17 significant
digits so a write/read round trip is exact.
"""

from __future__ import annotations

import csv

import numpy as np

from .matlin import as_matrix

__all__ = ["ParseError", "read_matrix", "write_matrix",
           "RESULTS_HEADER", "write_results", "read_results"]

RESULTS_HEADER = ("experiment", "n", "p", "constraint", "iters", "objective",
                  "forward_error", "feasibility_violation", "wall_ms", "seed")


class ParseError(ValueError):
    """Malformed input file; the message names the offending line."""


def read_matrix(path):
    rows = []
    width = None
    with open(path, "r", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = line.split(",")
            if width is None:
                width = len(tokens)
            elif len(tokens) != width:
                raise ParseError(
                    f"{path}:{lineno}: ragged row ({len(tokens)} fields, "
                    f"expected {width})")
            try:
                rows.append([float(t) for t in tokens])
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: non-numeric value in {line!r}") from None
    if not rows:
        raise ParseError(f"{path}: empty matrix file")
    M = np.array(rows, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ParseError(f"{path}: non-finite entries")
    return M


def write_matrix(path, M):
    M = as_matrix(M)
    with open(path, "w", newline="") as fh:
        for row in M:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def write_results(path, rows):
    """Write result rows (dicts keyed by RESULTS_HEADER) as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for row in rows:
            writer.writerow([_fmt(row.get(k)) for k in RESULTS_HEADER])


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def read_results(path):
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty results file") from None
        if tuple(header) != RESULTS_HEADER:
            raise ParseError(f"{path}: unexpected results header {header}")
        return [dict(zip(RESULTS_HEADER, row)) for row in reader]

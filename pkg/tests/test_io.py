"""Matrix and results file round-trip and error-reporting tests."""

import numpy as np
import pytest

from nearkit.io import (
    RESULTS_HEADER, ParseError, read_matrix, read_results, write_matrix,
    write_results,
)


def test_matrix_roundtrip_exact(tmp_path):
    M = np.random.default_rng(0).standard_normal((5, 7))
    path = tmp_path / "m.csv"
    write_matrix(path, M)
    assert np.array_equal(read_matrix(path), M)


def test_empty_file_rejected(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(ParseError, match="empty"):
        read_matrix(path)


def test_ragged_row_names_line(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(ParseError, match=":2:"):
        read_matrix(path)


def test_non_numeric_names_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,x\n")
    with pytest.raises(ParseError, match=":2:"):
        read_matrix(path)


def test_decimal_point_is_dot(tmp_path):
    # comma is the field separator, never the decimal mark
    path = tmp_path / "locale.csv"
    path.write_text("1.5,2.25\n")
    M = read_matrix(path)
    assert np.array_equal(M, [[1.5, 2.25]])
    write_matrix(path, M)
    assert "," in path.read_text() and ".5" in path.read_text()


def test_nonfinite_rejected(tmp_path):
    path = tmp_path / "inf.csv"
    path.write_text("1,inf\n")
    with pytest.raises(ParseError, match="non-finite"):
        read_matrix(path)


def test_results_roundtrip(tmp_path):
    rows = [{"experiment": "recover-i", "n": 4, "p": np.inf, "constraint": "U",
             "iters": 10, "objective": 1.5, "forward_error": 1e-9,
             "feasibility_violation": 0.0, "wall_ms": 3.25, "seed": 0},
            {"experiment": "sysid", "n": 10, "p": 1.0, "constraint": "H",
             "iters": 20, "objective": 2.0, "forward_error": None,
             "feasibility_violation": 0.0, "wall_ms": 1.0, "seed": 1}]
    path = tmp_path / "results.csv"
    write_results(path, rows)
    out = read_results(path)
    assert len(out) == 2
    assert out[0]["experiment"] == "recover-i"
    assert float(out[0]["p"]) == np.inf
    assert out[1]["forward_error"] == ""


def test_results_header_rejected(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ParseError, match="header"):
        read_results(path)
    path.write_text("")
    with pytest.raises(ParseError, match="empty"):
        read_results(path)


def test_results_header_schema():
    assert RESULTS_HEADER == ("experiment", "n", "p", "constraint", "iters",
                              "objective", "forward_error",
                              "feasibility_violation", "wall_ms", "seed")

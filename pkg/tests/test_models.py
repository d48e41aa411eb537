import sys

import numpy as np
import pytest

from group_explain.games import GameError
from group_explain.models import (AnalyticModel, OracleProtocolError,
                                  SubprocessModel, parse_analytic_model)

ECHO_SUM = (
    "import sys\n"
    "batch=[]\n"
    "for line in sys.stdin:\n"
    "    line=line.strip()\n"
    "    if not line:\n"
    "        for row in batch: print(repr(sum(row)))\n"
    "        sys.stdout.flush(); batch=[]\n"
    "        continue\n"
    "    batch.append([float(v) for v in line.split(',')])\n"
)


def test_parse_linear():
    m = parse_analytic_model("linear:1,0.5,-2", 3)
    X = np.array([[2.0, 2.0, 1.0]])
    assert m(X)[0] == pytest.approx(1.0)


def test_parse_bilinear_with_names():
    m = parse_analytic_model("bilinear:3*b*c", 3, feature_names=["a", "b", "c"])
    X = np.array([[9.0, 2.0, -1.0]])
    assert m(X)[0] == pytest.approx(-6.0)


def test_parse_bilinear_index_form():
    m = parse_analytic_model("bilinear:2*x0*x2", 3)
    X = np.array([[3.0, 9.0, 0.5]])
    assert m(X)[0] == pytest.approx(3.0)


def test_parse_product_sum_const():
    X = np.array([[2.0, 3.0]])
    assert parse_analytic_model("product", 2)(X)[0] == 6.0
    assert parse_analytic_model("sum", 2)(X)[0] == 5.0
    assert parse_analytic_model("const:1.5", 2)(X)[0] == 1.5


def test_parse_errors():
    with pytest.raises(GameError):
        parse_analytic_model("linear:1,2", 3)
    with pytest.raises(GameError):
        parse_analytic_model("bilinear:3*x0*x9", 3)
    with pytest.raises(GameError):
        parse_analytic_model("mystery:1", 3)


def test_analytic_model_arity_check():
    m = AnalyticModel("f", 2, lambda X: X[:, 0])
    with pytest.raises(GameError):
        m(np.ones((3, 5)))


def test_subprocess_round_trip_batching():
    with SubprocessModel([sys.executable, "-c", ECHO_SUM], arity=3,
                         batch_size=4) as oracle:
        X = np.arange(33, dtype=float).reshape(11, 3)
        assert np.allclose(oracle(X), X.sum(axis=1))
        # precision round trip at 17 significant digits
        X2 = np.array([[0.1, 0.2, 1e-15]])
        assert oracle(X2)[0] == pytest.approx(0.1 + 0.2 + 1e-15, abs=0)


def test_subprocess_short_output_raises():
    script = ("import sys\n"
              "for line in sys.stdin:\n"
              "    if not line.strip():\n"
              "        print('1.0'); sys.stdout.flush(); break\n")
    with SubprocessModel([sys.executable, "-c", script], arity=2) as oracle:
        with pytest.raises(OracleProtocolError, match="scores"):
            oracle(np.ones((3, 2)))


def test_subprocess_garbage_output_raises():
    script = ("import sys\n"
              "for line in sys.stdin:\n"
              "    if not line.strip():\n"
              "        print('banana'); sys.stdout.flush()\n")
    with SubprocessModel([sys.executable, "-c", script], arity=2) as oracle:
        with pytest.raises(OracleProtocolError, match="non-numeric"):
            oracle(np.ones((1, 2)))


def test_subprocess_bad_command():
    with pytest.raises(OracleProtocolError):
        SubprocessModel("/no/such/binary-here", arity=2)

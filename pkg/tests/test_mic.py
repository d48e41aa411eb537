import math

import numpy as np
import pytest

from group_explain.games import GameError
from group_explain.mic import MicConfig, discrete_mutual_information, mic_e
from group_explain.reference import mic_brute_force


def test_dmi_perfect_association():
    assert discrete_mutual_information([[5, 0], [0, 5]]) == pytest.approx(1.0)


def test_dmi_independence():
    assert discrete_mutual_information([[25, 25], [25, 25]]) == pytest.approx(0.0)


def test_dmi_partial_association():
    # I = 1 - H(3/4) bits for the table [[3,1],[1,3]]
    h = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
    assert discrete_mutual_information([[3, 1], [1, 3]]) == pytest.approx(1 - h)


def test_dmi_rejects_all_zero():
    with pytest.raises(GameError):
        discrete_mutual_information([[0, 0], [0, 0]])


def test_mic_identity_is_one():
    rng = np.random.default_rng(0)
    x = rng.uniform(size=1000)
    assert mic_e(x, x) == pytest.approx(1.0, abs=1e-9)


def test_mic_monotone_transform_invariance():
    # identical ranks give identical MIC values
    rng = np.random.default_rng(1)
    x = rng.uniform(size=300)
    y = x ** 2 + rng.normal(0, 0.01, 300)
    assert mic_e(x, y) == pytest.approx(mic_e(np.exp(x), y ** 3), abs=1e-12)


def test_mic_constant_input_is_zero():
    rng = np.random.default_rng(2)
    x = rng.uniform(size=100)
    assert mic_e(x, np.zeros(100)) == 0.0
    assert mic_e(np.ones(100), np.ones(100)) == 0.0


def test_mic_independent_uniforms_small():
    rng = np.random.default_rng(3)
    x = rng.uniform(size=10000)
    y = rng.uniform(size=10000)
    assert mic_e(x, y) <= 0.15


def test_mic_symmetric():
    rng = np.random.default_rng(4)
    x = rng.uniform(size=200)
    y = np.sin(3 * x) + rng.normal(0, 0.1, 200)
    assert mic_e(x, y) == mic_e(y, x)


def test_mic_in_unit_interval():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(8, 200))
        x = rng.normal(size=n)
        y = rng.normal(size=n) + rng.uniform(-1, 1) * x
        v = mic_e(x, y)
        assert 0.0 <= v <= 1.0


def test_mic_rejects_bad_inputs():
    with pytest.raises(GameError):
        mic_e([1, 2, 3], [1, 2])
    with pytest.raises(GameError):
        mic_e([1, 2, 3], [4, 5, 6])  # fewer than 8 samples
    with pytest.raises(GameError):
        mic_e([np.nan] * 10, list(range(10)))


def test_mic_config_validation():
    with pytest.raises(GameError):
        MicConfig(b_exponent=1.5)
    with pytest.raises(GameError):
        MicConfig(max_clumps_factor=0)
    assert MicConfig().grid_budget(10000) == 252


def test_matches_exhaustive_oracle():
    rng = np.random.default_rng(6)
    cfg = MicConfig()
    for trial in range(40):
        n = int(rng.integers(8, 31))
        x = rng.uniform(size=n)
        kind = trial % 4
        if kind == 0:
            y = x + rng.normal(0, 0.05, n)
        elif kind == 1:
            y = rng.uniform(size=n)
        elif kind == 2:
            y = np.round(3 * x) + 0.5 * rng.integers(0, 2, n)  # heavy ties
        else:
            y = np.abs(x - 0.5)
        budget = cfg.grid_budget(n)
        cap = (budget - 1) // 2
        expected = mic_brute_force(x, y, cap, cap, b_limit=budget)
        assert mic_e(x, y, cfg) == pytest.approx(expected, abs=1e-9), \
            (n, kind)


def test_oracle_diagonal_eight_points():
    x = np.arange(8, dtype=float)
    assert mic_brute_force(x, x, 2, 2) == pytest.approx(1.0)


def test_oracle_constant_y():
    x = np.arange(8, dtype=float)
    assert mic_brute_force(x, np.zeros(8), 2, 2) == 0.0


def test_oracle_checkerboard_regression_pin():
    pts = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    value = mic_brute_force(pts[:, 0], pts[:, 1], 2, 2)
    # independence pattern: the only 2x2 grid has uniform counts
    assert value == pytest.approx(0.0, abs=1e-12)


def test_oracle_size_guards():
    big = np.arange(40, dtype=float)
    with pytest.raises(GameError):
        mic_brute_force(big, big, 2, 2)
    small = np.arange(10, dtype=float)
    with pytest.raises(GameError):
        mic_brute_force(small, small, 5, 5)

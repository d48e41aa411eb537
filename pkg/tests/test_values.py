import numpy as np
import pytest

from group_explain import (Game, GameError, WeightedValueSpec, axiom_check,
                           banzhaf, canonical_coeffs, extend_centered, shapley,
                           weighted_value)
from group_explain.reference import random_game, shapley_by_permutations
from group_explain.values import BANZHAF_SPEC, SHAPLEY_SPEC


def test_shapley_two_player():
    assert shapley(Game.from_dense([0, 1, 2, 4])).tolist() == [1.5, 2.5]


def test_shapley_null_player():
    v = Game.from_dense([0, 1, 0, 1])
    assert shapley(v).tolist() == [1.0, 0.0]


def test_shapley_majority_symmetric(majority3):
    assert np.allclose(shapley(majority3), [1 / 3] * 3)


def test_banzhaf_two_player_matches_shapley():
    v = Game.from_dense([0, 1, 2, 4])
    assert np.allclose(banzhaf(v), shapley(v))


def test_banzhaf_majority(majority3):
    assert np.allclose(banzhaf(majority3), [0.5, 0.5, 0.5])


def test_banzhaf_null_player():
    v = Game.from_dense([0, 1, 0, 1])
    assert banzhaf(v)[1] == pytest.approx(0.0, abs=1e-15)


def test_weighted_value_reproduces_named():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        v = random_game(n, rng, cooperative=False)
        assert np.allclose(weighted_value(SHAPLEY_SPEC, v), shapley(v), atol=1e-12)
        assert np.allclose(weighted_value(BANZHAF_SPEC, v), banzhaf(v), atol=1e-12)


def test_weighted_value_constant_game_is_zero():
    spec = WeightedValueSpec("uniform", lambda s, n: 1.0 / (1 << (n - 1)))
    v = Game.from_dense([3.0] * 8)
    assert np.allclose(weighted_value(spec, v), 0.0)


def test_extend_centered_efficiency():
    v = Game.from_dense([1, 2, 3, 5])
    vals = extend_centered(shapley, v)
    assert np.allclose(vals, [1.5, 2.5])
    assert vals.sum() == pytest.approx(v.value(3) - v.value(0))


def test_extend_centered_is_identity_on_cooperative():
    rng = np.random.default_rng(1)
    v = random_game(4, rng)
    assert np.allclose(extend_centered(shapley, v), shapley(v))


def test_extend_centered_kills_unit_game():
    u = Game.from_dense(np.ones(8))
    assert np.allclose(extend_centered(shapley, u), 0.0)


def test_efficiency_of_extension_random():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        v = random_game(n, rng, cooperative=False)
        total = shapley(v).sum()
        target = v.value((1 << n) - 1) - v.empty_value
        assert abs(total - target) <= 1e-12 * max(1.0, abs(target))


def test_linearity_random():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(2, 7))
        a = float(rng.uniform(-2, 2))
        t1 = rng.uniform(-1, 1, 1 << n)
        t2 = rng.uniform(-1, 1, 1 << n)
        lhs = shapley(Game.from_dense(a * t1 + t2))
        rhs = a * shapley(Game.from_dense(t1)) + shapley(Game.from_dense(t2))
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_symmetry_permutation_commutes():
    rng = np.random.default_rng(4)
    n = 5
    table = rng.uniform(-1, 1, 1 << n)
    perm = list(rng.permutation(n))
    inv = np.argsort(perm)
    permuted = np.empty_like(table)
    for s in range(1 << n):
        target = 0
        for i in range(n):
            if s >> i & 1:
                target |= 1 << int(inv[i])
        permuted[s] = table[target]
    base = shapley(Game.from_dense(table))
    moved = shapley(Game.from_dense(permuted))
    assert np.allclose(moved[perm], base, atol=1e-12)


def test_non_essential_game_returns_singleton_worth():
    rng = np.random.default_rng(5)
    n = 5
    singles = rng.uniform(-1, 1, n)
    table = np.array([singles[[i for i in range(n) if s >> i & 1]].sum()
                      for s in range(1 << n)])
    vals = shapley(Game.from_dense(table))
    assert np.allclose(vals, singles, atol=1e-12)


def test_oracle_equivalence_small():
    rng = np.random.default_rng(6)
    for _ in range(40):
        n = int(rng.integers(2, 7))
        v = random_game(n, rng, cooperative=False)
        assert np.allclose(shapley(v), shapley_by_permutations(v), atol=1e-11)


def test_canonical_coeffs_shapley_n2():
    gamma = canonical_coeffs(shapley, 2)
    assert np.allclose(gamma[0], [-0.5, 0.5, -0.5, 0.5])
    assert np.allclose(gamma[1], [-0.5, -0.5, 0.5, 0.5])


def test_canonical_coeffs_banzhaf_n1():
    gamma = canonical_coeffs(banzhaf, 1)
    assert np.allclose(gamma[0], [-1.0, 1.0])


def test_canonical_reconstruction_random():
    rng = np.random.default_rng(7)
    for n in (2, 3, 4):
        gamma = canonical_coeffs(shapley, n)
        for _ in range(100 // n):
            table = rng.uniform(-1, 1, 1 << n)
            direct = shapley(Game.from_dense(table))
            assert np.allclose(gamma @ table, direct, atol=1e-12)


def test_canonical_coeffs_rejects_nonlinear():
    def warped(v):
        return np.square(shapley(v))

    with pytest.raises(GameError, match="not linear"):
        canonical_coeffs(warped, 3)


def test_axiom_check_shapley_passes_all():
    for axiom in ("LP", "EP", "SP", "NPP", "CDP", "SEP"):
        report = axiom_check(shapley, axiom, trials=150, seed=11)
        assert report.passed, (axiom, report.witness)


def test_axiom_check_banzhaf_ep_fails_with_witness(majority3):
    report = axiom_check(banzhaf, "EP", trials=200, seed=12)
    assert not report.passed
    assert report.witness is not None
    # the majority game is itself a witness: sum of Banzhaf values is 1.5
    assert banzhaf(majority3).sum() == pytest.approx(1.5)


def test_axiom_check_banzhaf_tpp_passes():
    report = axiom_check(banzhaf, "TPP", trials=150, seed=13)
    assert report.passed, report.witness


def test_axiom_check_zero_value_fails_ep():
    zero = lambda v: np.zeros(v.n)  # noqa: E731
    report = axiom_check(zero, "EP", trials=50, seed=14)
    assert not report.passed and report.witness is not None


def test_axiom_report_json():
    import json

    report = axiom_check(shapley, "EP", trials=5, seed=0)
    doc = json.loads(report.to_json())
    assert doc["axiom"] == "EP" and doc["trials"] == 5 and doc["failures"] == 0

"""Linear game values: Shapley, Banzhaf, generic weighted forms, axiom checks.

A *value function* here is any callable ``Game -> ndarray`` assigning one real
per player.  Values in weighted marginal-contribution form extend to
non-cooperative games by the same formula, which realizes the centered
extension (constant games map to zero).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from ._backend import kernels
from .games import Game, GameError, center, mask_of, members

ValueFunction = Callable[[Game], np.ndarray]

Axiom = Literal["LP", "EP", "SP", "TPP", "NPP", "CDP", "SEP"]

AXIOMS: tuple[str, ...] = ("LP", "EP", "SP", "TPP", "NPP", "CDP", "SEP")


def shapley_wtable(n: int) -> np.ndarray:
    """Weights s!(n-s-1)!/n! indexed by coalition bitmask."""
    by_size = np.array([math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n)
                        for s in range(n)], dtype=np.float64)
    sizes = np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)
    out = np.zeros(1 << n, dtype=np.float64)
    valid = sizes < n
    out[valid] = by_size[sizes[valid]]
    return out


def banzhaf_wtable(n: int) -> np.ndarray:
    return np.full(1 << n, 2.0 ** (1 - n), dtype=np.float64)


def shapley(v: Game) -> np.ndarray:
    """Shapley value; on non-cooperative games this is the centered extension."""
    return kernels.lin_value_dense(v.table(), shapley_wtable(v.n), v.n)


def banzhaf(v: Game) -> np.ndarray:
    """Banzhaf value (centered extension on non-cooperative games)."""
    return kernels.lin_value_dense(v.table(), banzhaf_wtable(v.n), v.n)


@dataclass(frozen=True)
class WeightedValueSpec:
    """Value determined by coalition weights w(S, n), independent of the player."""

    name: str
    weight: Callable[[int, int], float]

    def wtable(self, n: int) -> np.ndarray:
        # w(S, n) is only defined on proper subsets; the full-set entry is unused
        full = (1 << n) - 1
        return np.array([self.weight(s, n) if s != full else 0.0
                         for s in range(1 << n)], dtype=np.float64)


SHAPLEY_SPEC = WeightedValueSpec(
    "shapley",
    lambda s, n: math.factorial(s.bit_count()) *
    math.factorial(n - s.bit_count() - 1) / math.factorial(n),
)
BANZHAF_SPEC = WeightedValueSpec("banzhaf", lambda s, n: 2.0 ** (1 - n))


def weighted_value(spec: WeightedValueSpec, v: Game) -> np.ndarray:
    """h_i = sum over S without i of w(S,n) * (v(S+i) - v(S)), including S=empty."""
    return kernels.lin_value_dense(v.table(), spec.wtable(v.n), v.n)


def extend_centered(h: ValueFunction, v: Game) -> np.ndarray:
    """Apply ``h`` to the game with its empty-coalition value subtracted.

    This is the unique linear extension to non-cooperative games that kills
    constant games; weighted-form values already satisfy it.
    """
    return np.asarray(h(center(v)), dtype=np.float64)


def canonical_coeffs(h: ValueFunction, n: int, *, trials: int = 8,
                     rtol: float = 1e-9, seed: int = 0) -> np.ndarray:
    """Coefficients gamma[i, S] with h_i[v] = sum_S gamma[i, S] * v(S).

    Obtained by evaluating ``h`` on indicator basis games (including the
    empty-coalition indicator, which yields the extension constants).
    Reconstruction is verified on random games; a mismatch means ``h`` is not
    linear and raises GameError.
    """
    if n > 12:
        raise GameError("canonical coefficients enumerate 2**n basis games; n <= 12")
    size = 1 << n
    gamma = np.empty((n, size), dtype=np.float64)
    for s in range(size):
        basis = np.zeros(size)
        basis[s] = 1.0
        gamma[:, s] = h(Game.from_dense(basis))
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        table = rng.uniform(-1.0, 1.0, size)
        direct = np.asarray(h(Game.from_dense(table)))
        recon = gamma @ table
        if not np.allclose(direct, recon, rtol=0, atol=rtol * max(1.0, np.abs(direct).max())):
            raise GameError("value function is not linear: canonical "
                            "reconstruction failed on a random game")
    return gamma


@dataclass
class AxiomReport:
    axiom: str
    trials: int
    failures: int
    tolerance: float
    witness: dict | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_json(self) -> str:
        doc = {"axiom": self.axiom, "trials": self.trials, "failures": self.failures,
               "tolerance": self.tolerance}
        if self.witness is not None:
            doc["witness"] = self.witness
        return json.dumps(doc)


def _perm_mask(mask: int, perm: list[int]) -> int:
    out = 0
    for i in members(mask):
        out |= 1 << perm[i]
    return out


def _compress(mask: int, keep: list[int]) -> int:
    out = 0
    for local, p in enumerate(keep):
        if mask >> p & 1:
            out |= 1 << local
    return out


def axiom_check(h: ValueFunction, axiom: Axiom, trials: int = 1000, seed: int = 0,
                *, n_range: tuple[int, int] = (2, 8),
                tolerance: float = 1e-9) -> AxiomReport:
    """Randomized axiom test on cooperative games with uniform[-1,1] payoffs.

    Failures are reported (with the first witness game), never raised.  The
    total-payoff-growth axiom is not checkable (it quantifies over an
    unspecified growth function) and is not offered here.
    """
    if axiom not in AXIOMS:
        raise GameError(f"unknown axiom {axiom!r}; choose from {AXIOMS}")
    if trials < 1:
        raise GameError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    failures = 0
    witness: dict | None = None

    def random_table(n: int) -> np.ndarray:
        table = rng.uniform(-1.0, 1.0, 1 << n)
        table[0] = 0.0
        return table

    for _ in range(trials):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        err = 0.0
        note = ""
        if axiom == "LP":
            a = float(rng.uniform(-2.0, 2.0))
            tv, tw = random_table(n), random_table(n)
            lhs = np.asarray(h(Game.from_dense(a * tv + tw)))
            rhs = a * np.asarray(h(Game.from_dense(tv))) + np.asarray(h(Game.from_dense(tw)))
            err = float(np.abs(lhs - rhs).max())
            table = tv
            note = f"a={a}"
        elif axiom == "EP":
            table = random_table(n)
            vals = np.asarray(h(Game.from_dense(table)))
            err = abs(float(vals.sum()) - float(table[-1]))
        elif axiom == "SP":
            table = random_table(n)
            perm = list(rng.permutation(n))
            inv = [0] * n
            for i, p in enumerate(perm):
                inv[p] = i
            permuted = np.empty_like(table)
            for s in range(1 << n):
                permuted[s] = table[_perm_mask(s, inv)]
            base = np.asarray(h(Game.from_dense(table)))
            moved = np.asarray(h(Game.from_dense(permuted)))
            err = float(np.abs(moved[perm] - base).max())
            note = f"perm={perm}"
        elif axiom == "TPP":
            table = random_table(n)
            vals = np.asarray(h(Game.from_dense(table)))
            total = 0.0
            for i in range(n):
                bit = 1 << i
                for s in range(1 << n):
                    if not s & bit:
                        total += table[s | bit] - table[s]
            err = abs(float(vals.sum()) - total / 2 ** (n - 1))
        elif axiom == "NPP":
            i = int(rng.integers(0, n))
            keep = [p for p in range(n) if p != i]
            base = random_table(n - 1)
            table = np.array([base[_compress(s, keep)] for s in range(1 << n)])
            vals = np.asarray(h(Game.from_dense(table)))
            err = abs(float(vals[i]))
            note = f"null_player={i}"
        elif axiom == "CDP":
            t = max(1, int(rng.integers(1, n)))
            keep = sorted(rng.choice(n, size=t, replace=False).tolist())
            base = random_table(t)
            table = np.array([base[_compress(s & mask_of(keep), keep)]
                              for s in range(1 << n)])
            on_full = np.asarray(h(Game.from_dense(table)))
            on_carrier = np.asarray(h(Game.from_dense(base)))
            err = float(np.abs(on_full[keep] - on_carrier).max())
            note = f"carrier={keep}"
        else:  # SEP
            n = 1
            table = np.array([0.0, float(rng.uniform(-1.0, 1.0))])
            vals = np.asarray(h(Game.from_dense(table)))
            err = abs(float(vals[0]) - float(table[1]))
        if err > tolerance:
            failures += 1
            if witness is None:
                witness = {"n": n, "values": np.asarray(table).tolist(),
                           "error": err, "note": note}
    return AxiomReport(axiom=axiom, trials=trials, failures=failures,
                       tolerance=tolerance, witness=witness)


NAMED_VALUES: dict[str, ValueFunction] = {
    "shapley": shapley,
    "banzhaf": banzhaf,
}

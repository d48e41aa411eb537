"""Coalitional game values: Owen, Banzhaf-Owen, two-step Shapley, symmetric Banzhaf.

Each named value is computed two ways: by its direct double-sum formula and
through the generic two-step evaluator (an outer value across blocks applied
to a family of intermediate games, then an inner value within the block).
Non-cooperative games are handled uniformly by centering (subtracting the
empty-coalition payoff), which matches the centered extension.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from ._backend import kernels
from .games import Game, GameError, Partition, center, members, quotient_game
from .values import (ValueFunction, axiom_check, banzhaf, banzhaf_wtable,
                     shapley, shapley_wtable)

Intermediate = Literal["modified_quotient", "tsh"]

_INTERMEDIATE_CODE = {"modified_quotient": kernels.INTERMEDIATE_MODIFIED_QUOTIENT,
                      "tsh": kernels.INTERMEDIATE_TSH}

_WTABLE = {"shapley": shapley_wtable, "banzhaf": banzhaf_wtable}
_VALUE_FN = {"shapley": shapley, "banzhaf": banzhaf}


def _size_weights(kind: str, k: int) -> np.ndarray:
    """Per-|S| weights of the Shapley/Banzhaf sum over a k-player set."""
    if kind == "shapley":
        return np.array([math.factorial(s) * math.factorial(k - s - 1) / math.factorial(k)
                         for s in range(k)], dtype=np.float64)
    return np.full(k, 2.0 ** (1 - k), dtype=np.float64)


@dataclass(frozen=True)
class CoalitionalValueSpec:
    """A coalitional value in two-step form: (outer h1, inner h2, intermediate family).

    Named kinds fix both values to Shapley/Banzhaf; ``custom`` carries explicit
    value functions, validated at construction (h1 linear, symmetric and the
    identity on one player; h2 linear with the singleton efficiency property).
    """

    kind: str
    h1_kind: str = ""
    h2_kind: str = ""
    intermediate: Intermediate = "modified_quotient"
    h1: ValueFunction | None = None
    h2: ValueFunction | None = None
    name: str = ""

    @classmethod
    def owen(cls) -> "CoalitionalValueSpec":
        return cls("owen", "shapley", "shapley", "modified_quotient", name="owen")

    @classmethod
    def banzhaf_owen(cls) -> "CoalitionalValueSpec":
        return cls("banzhaf_owen", "banzhaf", "banzhaf", "modified_quotient",
                   name="banzhaf-owen")

    @classmethod
    def two_step_shapley(cls) -> "CoalitionalValueSpec":
        return cls("two_step_shapley", "shapley", "shapley", "tsh",
                   name="two-step-shapley")

    @classmethod
    def symmetric_banzhaf(cls) -> "CoalitionalValueSpec":
        return cls("symmetric_banzhaf", "banzhaf", "shapley", "modified_quotient",
                   name="symmetric-banzhaf")

    @classmethod
    def custom(cls, h1: ValueFunction, h2: ValueFunction,
               intermediate: Intermediate = "modified_quotient",
               name: str = "custom", *, validate: bool = True,
               validation_trials: int = 64) -> "CoalitionalValueSpec":
        if validate:
            problems = []
            for fn, axiom, who in ((h1, "LP", "h1"), (h1, "SP", "h1"),
                                   (h1, "SEP", "h1"), (h2, "LP", "h2"),
                                   (h2, "SEP", "h2")):
                report = axiom_check(fn, axiom, trials=validation_trials, seed=7,
                                     n_range=(1, 5) if axiom == "SEP" else (2, 5))
                if not report.passed:
                    problems.append(f"{who} fails {axiom}")
            if problems:
                raise GameError("invalid custom coalitional spec: " + ", ".join(problems)
                                + " (h1 must be linear/symmetric and the identity on "
                                "one player; h2 must be linear and satisfy SEP)")
        return cls("custom", intermediate=intermediate, h1=h1, h2=h2, name=name)

    @classmethod
    def from_name(cls, name: str) -> "CoalitionalValueSpec":
        key = name.lower().replace("_", "-")
        table = {"owen": cls.owen, "banzhaf-owen": cls.banzhaf_owen,
                 "two-step-shapley": cls.two_step_shapley,
                 "symmetric-banzhaf": cls.symmetric_banzhaf}
        if key not in table:
            raise GameError(f"unknown coalitional value {name!r}; "
                            f"choose from {sorted(table)}")
        return table[key]()

    @property
    def is_named(self) -> bool:
        return self.kind != "custom"

    @property
    def is_efficient(self) -> bool:
        """Efficiency holds when both the outer and inner values are efficient."""
        return self.h1_kind == "shapley" and self.h2_kind == "shapley"

    @property
    def satisfies_qp(self) -> bool:
        """Quotient-game property holds when the inner value is efficient."""
        return self.h2_kind == "shapley"

    def outer_value(self) -> ValueFunction:
        return self.h1 if self.h1 is not None else _VALUE_FN[self.h1_kind]

    def inner_value(self) -> ValueFunction:
        return self.h2 if self.h2 is not None else _VALUE_FN[self.h2_kind]


def owen(v: Game, partition: Partition) -> np.ndarray:
    """Owen value: Shapley-weighted double sum over block subsets and within-block coalitions."""
    return _direct_double_sum(v, partition, "shapley", "shapley")


def banzhaf_owen(v: Game, partition: Partition) -> np.ndarray:
    """Banzhaf-Owen value: uniform 2^(1-m) * 2^(1-s_j) weights."""
    return _direct_double_sum(v, partition, "banzhaf", "banzhaf")


def symmetric_banzhaf(v: Game, partition: Partition) -> np.ndarray:
    """Symmetric Banzhaf value: Banzhaf weights across blocks, Shapley within."""
    return _direct_double_sum(v, partition, "banzhaf", "shapley")


def two_step_shapley(v: Game, partition: Partition) -> np.ndarray:
    """Two-step Shapley: within-block Shapley plus an equal share of the block's
    quotient-Shapley surplus over its standalone worth."""
    _check(v, partition)
    w = center(v)
    table = w.table()
    m = partition.m
    unions = partition.union_masks().astype(np.int64)
    phi_m = kernels.lin_value_dense(table[unions], shapley_wtable(m), m)
    out = np.zeros(v.n, dtype=np.float64)
    for j, bj in enumerate(partition.blocks):
        players = members(bj)
        sj = len(players)
        tmasks = _local_masks(players)
        local = kernels.lin_value_dense(table[tmasks], shapley_wtable(sj), sj)
        out[players] = local + (phi_m[j] - table[bj]) / sj
    return out


def _local_masks(players: list[int]) -> np.ndarray:
    masks = np.zeros(1 << len(players), dtype=np.int64)
    for a in range(1, 1 << len(players)):
        low = a & -a
        masks[a] = masks[a ^ low] | (1 << players[low.bit_length() - 1])
    return masks


def _check(v: Game, partition: Partition) -> None:
    if partition.n != v.n:
        raise GameError(f"partition is over {partition.n} players, game has {v.n}")


def _direct_double_sum(v: Game, partition: Partition, outer: str, inner: str) -> np.ndarray:
    _check(v, partition)
    w = center(v)
    outer_w = _size_weights(outer, partition.m) if partition.m > 0 else np.array([])
    inner_w = [_size_weights(inner, b.bit_count()) for b in partition.blocks]
    return kernels.coalitional_direct_dense(w.table(), v.n, partition.blocks,
                                            outer_w, inner_w)


DIRECT_FUNCTIONS: dict[str, Callable[[Game, Partition], np.ndarray]] = {
    "owen": owen,
    "banzhaf_owen": banzhaf_owen,
    "two_step_shapley": two_step_shapley,
    "symmetric_banzhaf": symmetric_banzhaf,
}


def coalitional_value(spec: CoalitionalValueSpec, v: Game,
                      partition: Partition) -> np.ndarray:
    """Per-player values by the direct formula (named specs) or two-step (custom)."""
    if spec.is_named:
        return DIRECT_FUNCTIONS[spec.kind](v, partition)
    return two_step_evaluate(spec, v, partition)


def two_step_evaluate(spec: CoalitionalValueSpec, v: Game,
                      partition: Partition) -> np.ndarray:
    """Evaluate a coalitional value through its two-step formulation.

    For every block j and every within-block coalition T, an intermediate
    block game is formed; the outer value of block j on it defines a game on
    the block's players, to which the inner value is applied.
    """
    _check(v, partition)
    w = center(v)
    if spec.is_named:
        table = w.table()
        h1w = _WTABLE[spec.h1_kind](partition.m)
        h2w = [_WTABLE[spec.h2_kind](b.bit_count()) for b in partition.blocks]
        return kernels.two_step_dense(table, v.n, partition.blocks, h1w, h2w,
                                      _INTERMEDIATE_CODE[spec.intermediate])
    out = np.zeros(v.n, dtype=np.float64)
    for j in range(partition.m):
        players = members(partition.blocks[j])
        out[players] = two_step_block_values(spec, w, partition, j)
    return out


def two_step_block_values(spec: CoalitionalValueSpec, w: Game,
                          partition: Partition, j: int) -> np.ndarray:
    """Inner-value vector of block ``j`` (``w`` must already be cooperative).

    Lazily builds intermediate games as memoized closures over ``w``, so the
    number of underlying game evaluations stays O(2^(|S_j|+m)).
    """
    h1 = spec.outer_value()
    h2 = spec.inner_value()
    players = members(partition.blocks[j])
    unions = partition.union_masks().astype(np.int64)
    jbit = 1 << j
    m = partition.m
    sj = len(players)
    block_mask = int(partition.blocks[j])

    def expand(tlocal: int) -> int:
        mask = 0
        for li in range(sj):
            if tlocal >> li & 1:
                mask |= 1 << players[li]
        return mask

    def intermediate(tmask: int) -> Game:
        if spec.intermediate == "modified_quotient":
            def val(a: int) -> float:
                if a & jbit:
                    return w.value(int(unions[a ^ jbit]) | tmask)
                return w.value(int(unions[a]))
        else:
            ratio = tmask.bit_count() / sj
            shift = w.value(tmask) - ratio * w.value(block_mask)

            def val(a: int) -> float:
                return ratio * w.value(int(unions[a])) + a.bit_count() * shift
        return Game(m, fn=val)

    def block_game(tlocal: int) -> float:
        return float(np.asarray(h1(intermediate(expand(tlocal))))[j])

    return np.asarray(h2(Game(sj, fn=block_game)), dtype=np.float64)


@dataclass
class CoalitionalResult:
    """Per-player values plus block aggregates and the quotient-game values."""

    per_player: np.ndarray
    per_block: np.ndarray
    quotient: np.ndarray
    spec_name: str
    partition: Partition

    def to_json(self) -> str:
        return json.dumps({
            "per_player": self.per_player.tolist(),
            "per_block": self.per_block.tolist(),
            "quotient": self.quotient.tolist(),
            "spec_name": self.spec_name,
            "partition": self.partition.to_lists(),
        })


def evaluate_with_blocks(spec: CoalitionalValueSpec, v: Game,
                         partition: Partition) -> CoalitionalResult:
    per_player = coalitional_value(spec, v, partition)
    per_block = np.array([per_player[members(b)].sum() for b in partition.blocks])
    quotient = np.asarray(spec.outer_value()(center(quotient_game(v, partition))),
                          dtype=np.float64)
    return CoalitionalResult(per_player, per_block, quotient,
                             spec.name or spec.kind, partition)


@dataclass
class QuotientPropertyReport:
    passed: bool
    max_abs_deviation: float
    deviations: list[float]
    tolerance: float

    def to_json(self) -> str:
        return json.dumps({"passed": self.passed,
                           "max_abs_deviation": self.max_abs_deviation,
                           "deviations": self.deviations,
                           "tolerance": self.tolerance})


def quotient_property_check(spec: CoalitionalValueSpec, v: Game,
                            partition: Partition,
                            tolerance: float = 1e-10) -> QuotientPropertyReport:
    """Compare block sums of the coalitional value with the outer value of the
    quotient game; equality is the quotient-game property."""
    result = evaluate_with_blocks(spec, v, partition)
    deviations = np.abs(result.per_block - result.quotient)
    dev = float(deviations.max()) if deviations.size else 0.0
    return QuotientPropertyReport(passed=dev <= tolerance, max_abs_deviation=dev,
                                  deviations=deviations.tolist(), tolerance=tolerance)

"""Brute-force reference implementations for cross-checking the fast paths.

These are deliberately naive (permutation averaging, explicit double loops,
exhaustive grid search) and share no code with the main implementations beyond
the ``Game``/``Partition`` types.  They back the test suite and the
``gamecheck`` CLI subcommand; they are not tuned for speed.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .coalitions import CoalitionalValueSpec, coalitional_value, two_step_evaluate
from .games import Game, GameError, Partition, center, members, quotient_game

PERMUTATION_CAP = 8


def shapley_by_permutations(v: Game) -> np.ndarray:
    """Average marginal contribution over all n! player orders."""
    n = v.n
    if n > PERMUTATION_CAP:
        raise GameError(f"permutation oracle enumerates n!; capped at {PERMUTATION_CAP}")
    table = v.table()
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    prefix = np.bitwise_or.accumulate(1 << perms, axis=1)
    prev = np.concatenate([np.zeros((perms.shape[0], 1), dtype=np.int64),
                           prefix[:, :-1]], axis=1)
    marginal = table[prefix] - table[prev]
    out = np.zeros(n, dtype=np.float64)
    np.add.at(out, perms, marginal)
    return out / perms.shape[0]


def _owen_like_loops(v: Game, partition: Partition, outer: str, inner: str) -> np.ndarray:
    """Direct double sum over outside-block subsets and within-block coalitions."""
    w = center(v)
    m = partition.m
    out = np.zeros(v.n, dtype=np.float64)
    for j, bj in enumerate(partition.blocks):
        others = [k for k in range(m) if k != j]
        block_players = members(bj)
        sj = len(block_players)
        for i in block_players:
            total = 0.0
            for rsize in range(m):
                for rset in itertools.combinations(others, rsize):
                    q = 0
                    for k in rset:
                        q |= partition.blocks[k]
                    if outer == "shapley":
                        w_out = (math.factorial(rsize) * math.factorial(m - rsize - 1)
                                 / math.factorial(m))
                    else:
                        w_out = 2.0 ** (1 - m)
                    for tsize in range(sj):
                        for tset in itertools.combinations(
                                [p for p in block_players if p != i], tsize):
                            t = 0
                            for p in tset:
                                t |= 1 << p
                            if inner == "shapley":
                                w_in = (math.factorial(tsize) *
                                        math.factorial(sj - tsize - 1) /
                                        math.factorial(sj))
                            else:
                                w_in = 2.0 ** (1 - sj)
                            total += w_out * w_in * (w.value(q | t | (1 << i))
                                                     - w.value(q | t))
            out[i] = total
    return out


def _two_step_shapley_loops(v: Game, partition: Partition) -> np.ndarray:
    w = center(v)
    qgame = quotient_game(w, partition)
    phi_m = shapley_by_permutations(qgame)
    out = np.zeros(v.n, dtype=np.float64)
    for j, bj in enumerate(partition.blocks):
        block_players = members(bj)
        sj = len(block_players)
        restricted = Game(sj, fn=lambda s, _p=block_players, _w=w: _w.value(
            sum(1 << _p[li] for li in range(len(_p)) if s >> li & 1)))
        local = shapley_by_permutations(restricted)
        for li, p in enumerate(block_players):
            out[p] = local[li] + (phi_m[j] - w.value(bj)) / sj
    return out


def coalitional_reference(kind: str, v: Game, partition: Partition) -> np.ndarray:
    """Reference evaluation of a named coalitional value by explicit loops."""
    if kind == "owen":
        return _owen_like_loops(v, partition, "shapley", "shapley")
    if kind == "banzhaf_owen":
        return _owen_like_loops(v, partition, "banzhaf", "banzhaf")
    if kind == "symmetric_banzhaf":
        return _owen_like_loops(v, partition, "banzhaf", "shapley")
    if kind == "two_step_shapley":
        return _two_step_shapley_loops(v, partition)
    raise GameError(f"no reference formula for kind {kind!r}")


def iter_partitions(n: int, max_blocks: int) -> Iterator[Partition]:
    """All set partitions of {0..n-1} with at most ``max_blocks`` blocks."""

    def grow(i: int, labels: list[int], used: int) -> Iterator[list[int]]:
        if i == n:
            yield labels[:]
            return
        for lab in range(min(used + 1, max_blocks)):
            labels.append(lab)
            yield from grow(i + 1, labels, max(used, lab + 1))
            labels.pop()

    for labels in grow(0, [], 0):
        nblocks = max(labels) + 1
        masks = [0] * nblocks
        for player, lab in enumerate(labels):
            masks[lab] |= 1 << player
        yield Partition(tuple(masks), n)


def random_partition(n: int, max_blocks: int, rng: np.random.Generator) -> Partition:
    nblocks = int(rng.integers(1, min(max_blocks, n) + 1))
    labels = rng.integers(0, nblocks, size=n)
    labels[rng.permutation(n)[:nblocks]] = np.arange(nblocks)  # no empty block
    masks = [0] * nblocks
    for player, lab in enumerate(labels):
        masks[int(lab)] |= 1 << player
    return Partition(tuple(masks), n)


def random_game(n: int, rng: np.random.Generator, *, cooperative: bool = True) -> Game:
    table = rng.uniform(-1.0, 1.0, 1 << n)
    if cooperative:
        table[0] = 0.0
    return Game.from_dense(table)


@dataclass
class OracleReport:
    max_abs_deviation: float
    trials: int
    witness: dict | None = None

    @property
    def passed(self) -> bool:
        return self.witness is None or self.max_abs_deviation == 0.0

    def to_json(self) -> str:
        doc = {"max_abs_deviation": self.max_abs_deviation, "trials": self.trials}
        if self.witness is not None:
            doc["witness"] = self.witness
        return json.dumps(doc)


def crosscheck(spec: CoalitionalValueSpec, trials: int = 200, seed: int = 0,
               *, expect_kind: str | None = None,
               tolerance: float = 1e-10) -> OracleReport:
    """Compare direct formulas, the two-step evaluator, and the reference loops
    on random games and partitions; reports the worst deviation and a witness
    beyond ``tolerance``."""
    rng = np.random.default_rng(seed)
    kind = expect_kind or (spec.kind if spec.is_named else None)
    worst = 0.0
    witness = None
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        game = random_game(n, rng, cooperative=bool(rng.integers(0, 2)))
        partition = random_partition(n, 4, rng)
        candidates = [two_step_evaluate(spec, game, partition)]
        if spec.is_named:
            candidates.append(coalitional_value(spec, game, partition))
        if kind is not None:
            candidates.append(coalitional_reference(kind, game, partition))
        base = candidates[0]
        dev = max(float(np.abs(base - other).max()) for other in candidates[1:])
        if dev > worst:
            worst = dev
            if dev > tolerance:
                player = int(np.abs(base - candidates[-1]).argmax())
                witness = {"n": n, "values": game.table().tolist(),
                           "partition": partition.to_lists(),
                           "player": player, "deviation": dev}
    return OracleReport(max_abs_deviation=worst, trials=trials, witness=witness)


def _equipartition_labels(values: Sequence[float], bins: int) -> np.ndarray:
    """Mass-based equipartition with ties assigned to the lower bin.

    Independent reimplementation used only by the MIC oracle.
    """
    arr = np.asarray(values, dtype=np.float64)
    n = arr.size
    order = np.argsort(arr, kind="stable")
    labels = np.empty(n, dtype=np.int64)
    current = 0
    placed = 0
    pos = 0
    while pos < n:
        end = pos
        while end < n and arr[order[end]] == arr[order[pos]]:
            end += 1
        labels[order[pos:end]] = current
        placed += end - pos
        while current < bins - 1 and placed * bins >= n * (current + 1):
            current += 1
        pos = end
    return labels


def _mutual_information(col: np.ndarray, row: np.ndarray, k: int, ell: int) -> float:
    counts = np.zeros((k, ell), dtype=np.float64)
    np.add.at(counts, (col, row), 1.0)
    n = counts.sum()
    pj = counts / n
    pc = pj.sum(axis=1, keepdims=True)
    pr = pj.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(pj > 0, pj * np.log(pj / (pc * pr)), 0.0)
    return float(terms.sum())


def mic_brute_force(x: Sequence[float], y: Sequence[float], max_k: int, max_l: int,
                    *, b_limit: int | None = None) -> float:
    """Exhaustive maximal-information search on tiny samples.

    For every grid shape (k, l) within the caps (and ``k*l < b_limit`` when
    given), the larger-dimension axis is mass-equipartitioned and all cut
    placements of the other axis are enumerated; the mirrored orientation is
    covered by the (k, l) range itself.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise GameError("inputs must have equal length")
    if x.size > 30:
        raise GameError("exhaustive MIC oracle capped at 30 samples")
    if max_k * max_l > 16:
        raise GameError("exhaustive MIC oracle capped at max_k*max_l <= 16")

    def best_for(free: np.ndarray, fixed: np.ndarray, parts: int, bins: int) -> float:
        rows = _equipartition_labels(fixed, bins)
        order = np.argsort(free, kind="stable")
        sorted_free = free[order]
        sorted_rows = rows[order]
        boundaries = [i for i in range(1, free.size)
                      if sorted_free[i] != sorted_free[i - 1]]
        best = 0.0
        for ncuts in range(parts):
            for cuts in itertools.combinations(boundaries, ncuts):
                col = np.zeros(free.size, dtype=np.int64)
                for c in cuts:
                    col[c:] += 1
                best = max(best, _mutual_information(col, sorted_rows,
                                                     ncuts + 1, bins))
        return best

    best = 0.0
    for k in range(2, max_k + 1):
        for ell in range(2, max_l + 1):
            if b_limit is not None and k * ell >= b_limit:
                continue
            if k < ell:
                raw = best_for(x, y, k, ell)
            else:
                raw = best_for(y, x, ell, k)
            best = max(best, raw / math.log(min(k, ell)))
    return best

"""Finite cooperative (and non-cooperative) games over bitmask-encoded player sets.

Players are indices ``0..n-1`` and coalitions are ints whose bit ``i`` marks
membership of player ``i``.  A game may carry a nonzero value on the empty
coalition; it is *cooperative* when that value is zero.  Dense games store all
``2**n`` payoffs in bitmask order; lazy games wrap a pure callable and memoize.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

MAX_DENSE_PLAYERS = 24
MAX_PLAYERS = 64


class GameError(ValueError):
    """Invalid game, partition, or coalition input."""


def mask_of(players: Iterable[int]) -> int:
    """Bitmask of a collection of player indices."""
    mask = 0
    for p in players:
        mask |= 1 << p
    return mask


def members(mask: int) -> list[int]:
    """Sorted player indices contained in ``mask``."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def iter_submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask``, including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def full_mask(n: int) -> int:
    return (1 << n) - 1


def validate_playerset(mask: int, n: int) -> int:
    if not 1 <= n <= MAX_PLAYERS:
        raise GameError(f"player count must be in 1..{MAX_PLAYERS}, got {n}")
    if mask < 0 or mask >> n:
        raise GameError(f"coalition {bin(mask)} has bits outside 0..{n - 1}")
    return mask


@dataclass(frozen=True)
class Partition:
    """Ordered partition of ``{0..n-1}`` into disjoint nonempty blocks (bitmasks)."""

    blocks: tuple[int, ...]
    n: int
    block_of: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.blocks:
            raise GameError("partition needs at least one block")
        seen = 0
        owner = [-1] * self.n
        for j, b in enumerate(self.blocks):
            validate_playerset(b, self.n)
            if b == 0:
                raise GameError(f"block {j} is empty")
            if seen & b:
                raise GameError(f"block {j} overlaps an earlier block")
            seen |= b
            for i in members(b):
                owner[i] = j
        if seen != full_mask(self.n):
            missing = members(full_mask(self.n) & ~seen)
            raise GameError(f"players {missing} not covered by any block")
        object.__setattr__(self, "block_of", tuple(owner))

    @classmethod
    def from_lists(cls, blocks: Sequence[Sequence[int]], n: int) -> "Partition":
        return cls(tuple(mask_of(b) for b in blocks), n)

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(tuple(1 << i for i in range(n)), n)

    @classmethod
    def grand(cls, n: int) -> "Partition":
        return cls((full_mask(n),), n)

    @property
    def m(self) -> int:
        return len(self.blocks)

    def block_sizes(self) -> list[int]:
        return [b.bit_count() for b in self.blocks]

    def to_lists(self) -> list[list[int]]:
        return [members(b) for b in self.blocks]

    def union_masks(self) -> np.ndarray:
        """Union bitmask of every subset of blocks, indexed by block-subset mask."""
        m = self.m
        out = np.zeros(1 << m, dtype=np.uint64)
        for a in range(1, 1 << m):
            low = a & -a
            out[a] = out[a ^ low] | np.uint64(self.blocks[low.bit_length() - 1])
        return out


class Game:
    """Real-valued set function on coalitions of ``n`` players.

    ``kind`` is ``"dense"`` (full payoff table) or ``"lazy"`` (memoized
    closure).  Games are immutable after construction and safe to evaluate
    concurrently; lazy closures must be pure.
    """

    __slots__ = ("n", "kind", "empty_value", "_table", "_fn", "_memo")

    def __init__(self, n: int, *, table: np.ndarray | None = None,
                 fn: Callable[[int], float] | None = None):
        if not 1 <= n <= MAX_PLAYERS:
            raise GameError(f"player count must be in 1..{MAX_PLAYERS}, got {n}")
        self.n = n
        if table is not None:
            if n > MAX_DENSE_PLAYERS:
                raise GameError(f"dense games capped at {MAX_DENSE_PLAYERS} players")
            table = np.asarray(table, dtype=np.float64)
            if table.shape != (1 << n,):
                raise GameError(f"dense table must have 2**{n} entries, got {table.shape}")
            self._table = table
            self._table.setflags(write=False)
            self._fn = None
            self._memo = None
            self.kind = "dense"
            self.empty_value = float(table[0])
        elif fn is not None:
            self._table = None
            self._fn = fn
            self._memo = {}
            self.kind = "lazy"
            self.empty_value = float(fn(0))
            self._memo[0] = self.empty_value
        else:
            raise GameError("a Game needs either a dense table or a closure")

    @classmethod
    def from_dense(cls, values: Sequence[float] | np.ndarray) -> "Game":
        values = np.asarray(values, dtype=np.float64)
        size = values.shape[0]
        n = size.bit_length() - 1
        if size != 1 << n or size < 2:
            raise GameError(f"dense table length {size} is not a power of two >= 2")
        return cls(n, table=values)

    @classmethod
    def from_function(cls, n: int, fn: Callable[[int], float]) -> "Game":
        return cls(n, fn=fn)

    @property
    def is_cooperative(self) -> bool:
        return self.empty_value == 0.0

    def value(self, mask: int) -> float:
        validate_playerset(mask, self.n)
        if self._table is not None:
            return float(self._table[mask])
        memo = self._memo
        got = memo.get(mask)
        if got is None:
            got = memo[mask] = float(self._fn(mask))
        return got

    def __call__(self, mask: int) -> float:
        return self.value(mask)

    def table(self) -> np.ndarray:
        """Dense payoff table (materializes lazy games; requires n <= dense cap)."""
        if self._table is not None:
            return self._table
        if self.n > MAX_DENSE_PLAYERS:
            raise GameError(f"cannot materialize a lazy game on {self.n} > "
                            f"{MAX_DENSE_PLAYERS} players")
        out = np.fromiter((self.value(s) for s in range(1 << self.n)),
                          dtype=np.float64, count=1 << self.n)
        return out

    def to_dense(self) -> "Game":
        return self if self.kind == "dense" else Game(self.n, table=self.table())

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "values": self.table().tolist()})

    @classmethod
    def from_json(cls, text: str) -> "Game":
        doc = json.loads(text)
        game = cls.from_dense(doc["values"])
        if game.n != doc["n"]:
            raise GameError(f"declared n={doc['n']} but table encodes n={game.n}")
        return game

    def __repr__(self) -> str:
        return f"Game(n={self.n}, kind={self.kind}, empty_value={self.empty_value})"


def project(v: Game) -> Game:
    """Cooperative projection: zero out the empty-coalition value."""
    if v.empty_value == 0.0:
        return v
    if v.kind == "dense":
        table = v.table().copy()
        table[0] = 0.0
        return Game(v.n, table=table)
    return Game(v.n, fn=lambda s, _v=v: 0.0 if s == 0 else _v.value(s))


def center(v: Game) -> Game:
    """Subtract the empty-coalition value from every nonempty coalition.

    The result is the cooperative game ``S -> v(S) - v(empty)``; linear values
    applied to it realize the centered extension to non-cooperative games.
    """
    c = v.empty_value
    if c == 0.0:
        return v
    if v.kind == "dense":
        table = v.table() - c
        return Game(v.n, table=table)
    return Game(v.n, fn=lambda s, _v=v, _c=c: _v.value(s) - _c)


def quotient_game(v: Game, partition: Partition) -> Game:
    """Game on blocks: a subset of blocks is worth the union coalition's payoff."""
    if partition.n != v.n:
        raise GameError(f"partition is over {partition.n} players, game has {v.n}")
    unions = partition.union_masks()
    if v.kind == "dense" and partition.m <= MAX_DENSE_PLAYERS:
        return Game(partition.m, table=v.table()[unions.astype(np.int64)])
    return Game(partition.m, fn=lambda a, _v=v, _u=unions: _v.value(int(_u[a])))


def modified_quotient_game(v: Game, partition: Partition, j: int, t_mask: int) -> Game:
    """Quotient game where block ``j``'s participation is replaced by ``T``.

    A block subset containing ``j`` is worth the payoff of the union of the
    other participating blocks together with ``T`` instead of all of block j.
    """
    _check_block_subset(v, partition, j, t_mask)
    unions = partition.union_masks()
    jbit = 1 << j
    m = partition.m

    def value(a: int, _v=v, _u=unions, _jbit=jbit, _t=t_mask) -> float:
        if a & _jbit:
            return _v.value(int(_u[a ^ _jbit]) | _t)
        return _v.value(int(_u[a]))

    if v.kind == "dense" and m <= MAX_DENSE_PLAYERS:
        table = np.fromiter((value(a) for a in range(1 << m)),
                            dtype=np.float64, count=1 << m)
        return Game(m, table=table)
    return Game(m, fn=value)


def tsh_intermediate_game(v: Game, partition: Partition, j: int, t_mask: int) -> Game:
    """Intermediate block game used by the two-step Shapley construction.

    Worth of a block subset A: ``(|T|/|S_j|) * vP(A) + |A| * (v(T) -
    (|T|/|S_j|) * vP({j}))`` where vP is the quotient game.
    """
    _check_block_subset(v, partition, j, t_mask)
    if t_mask == 0:
        raise GameError("intermediate game requires a nonempty T")
    unions = partition.union_masks()
    ratio = t_mask.bit_count() / partition.blocks[j].bit_count()
    v_t = v.value(t_mask)
    v_block = v.value(int(unions[1 << j]))
    shift = v_t - ratio * v_block
    m = partition.m

    def value(a: int, _v=v, _u=unions) -> float:
        return ratio * _v.value(int(_u[a])) + a.bit_count() * shift

    if v.kind == "dense" and m <= MAX_DENSE_PLAYERS:
        table = np.fromiter((value(a) for a in range(1 << m)),
                            dtype=np.float64, count=1 << m)
        return Game(m, table=table)
    return Game(m, fn=value)


def restrict_to_carrier(v: Game, t_mask: int) -> Game:
    """Restrict ``v`` to a carrier ``T``, relabelling T's players to 0..|T|-1.

    Dense games are checked (a violating coalition is reported); lazy games
    are trusted.
    """
    validate_playerset(t_mask, v.n)
    if t_mask == 0:
        raise GameError("carrier must be nonempty")
    carriers = members(t_mask)
    if v.kind == "dense":
        table = v.table()
        for s in range(1 << v.n):
            if table[s] != table[s & t_mask]:
                raise GameError(
                    f"T={members(t_mask)} is not a carrier: v({members(s)})="
                    f"{table[s]} != v(S & T)={table[s & t_mask]}")
    expand = {}
    for sub in range(1 << len(carriers)):
        expand[sub] = mask_of(carriers[i] for i in members(sub))
    if v.kind == "dense" and len(carriers) <= MAX_DENSE_PLAYERS:
        table = np.fromiter((v.value(expand[s]) for s in range(1 << len(carriers))),
                            dtype=np.float64, count=1 << len(carriers))
        return Game(len(carriers), table=table)
    return Game(len(carriers), fn=lambda s, _v=v, _e=expand: _v.value(_e[s]))


def _check_block_subset(v: Game, partition: Partition, j: int, t_mask: int) -> None:
    if partition.n != v.n:
        raise GameError(f"partition is over {partition.n} players, game has {v.n}")
    if not 0 <= j < partition.m:
        raise GameError(f"block index {j} out of range for {partition.m} blocks")
    validate_playerset(t_mask, v.n)
    if t_mask & ~partition.blocks[j]:
        raise GameError(
            f"T={members(t_mask)} is not a subset of block {j}="
            f"{members(partition.blocks[j])}")

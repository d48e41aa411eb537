"""Maximal-information-coefficient estimation on sample pairs.

The estimator searches grids (k, l) with ``k * l < B(n)``: the axis carrying
the larger grid dimension is mass-equipartitioned and the other axis's
partition is optimized exactly by dynamic programming over clump boundaries;
the discrete mutual information is normalized by ``log min(k, l)``.  Results
are deterministic and invariant under swapping the inputs.

Equipartition places tied values entirely in the lower bin.  This keeps the
procedure deterministic on repeated data but means bins carry slightly uneven
mass in the presence of heavy ties (a deliberate deviation from quantile
interpolation conventions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._backend import kernels
from .games import GameError

MIN_SAMPLES = 8


@dataclass(frozen=True)
class MicConfig:
    """Grid budget B(n) = ceil(n**b_exponent) (at least 4) and the cap on
    candidate cut positions (``max_clumps_factor`` * parts)."""

    b_exponent: float = 0.6
    max_clumps_factor: int = 15

    def __post_init__(self) -> None:
        if not 0.0 < self.b_exponent < 1.0:
            raise GameError("b_exponent must lie in (0, 1)")
        if self.max_clumps_factor < 1:
            raise GameError("max_clumps_factor must be >= 1")

    def grid_budget(self, n: int) -> int:
        # the strict k*l < B admission needs B >= 5 for even the 2x2 grid
        return max(5, math.ceil(n ** self.b_exponent))


def discrete_mutual_information(joint_counts: Sequence[Sequence[float]]) -> float:
    """Mutual information of a contingency table, in bits.

    Zero cells contribute nothing; an all-zero table is rejected.
    """
    counts = np.asarray(joint_counts, dtype=np.float64)
    if counts.ndim != 2:
        raise GameError("joint_counts must be a 2-D table")
    if (counts < 0).any():
        raise GameError("counts must be nonnegative")
    total = counts.sum()
    if total <= 0:
        raise GameError("joint_counts sums to zero")
    p = counts / total
    pr = p.sum(axis=1, keepdims=True)
    pc = p.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(p / (pr * pc)), 0.0)
    return float(terms.sum() / math.log(2))


class _Axis:
    """Precomputed sort order and tie-group structure of one sample vector."""

    def __init__(self, values: np.ndarray):
        self.order = np.argsort(values, kind="stable")
        svals = values[self.order]
        n = values.size
        changes = np.flatnonzero(svals[1:] != svals[:-1]) + 1
        self.group_starts = np.concatenate([[0], changes])
        self.group_sizes = np.diff(np.concatenate([self.group_starts, [n]]))
        self.n = n

    def equipartition(self, bins: int) -> np.ndarray:
        """Per-sample bin labels (original order), ties to the lower bin."""
        before = self.group_starts.astype(np.int64)
        group_bins = np.minimum(bins - 1, before * bins // self.n)
        sorted_labels = np.repeat(group_bins, self.group_sizes)
        labels = np.empty(self.n, dtype=np.int64)
        labels[self.order] = sorted_labels
        return labels


def _clump_bounds(rows_sorted: np.ndarray, atom_starts: np.ndarray,
                  n: int) -> np.ndarray:
    """Candidate cut positions: boundaries between clumps.

    Atoms (maximal runs of equal free-axis values) are atomic; consecutive
    atoms sharing one constant row label merge into a clump, and an optimal
    partition never needs to cut inside a clump.
    """
    if atom_starts.size == 1:
        return np.array([0, n], dtype=np.int64)
    firsts = rows_sorted[atom_starts]
    mins = np.minimum.reduceat(rows_sorted, atom_starts)
    maxs = np.maximum.reduceat(rows_sorted, atom_starts)
    pure = mins == maxs
    # boundary before atom a survives if either side is mixed or labels differ
    keep = (~pure[1:]) | (~pure[:-1]) | (firsts[1:] != firsts[:-1])
    inner = atom_starts[1:][keep]
    return np.concatenate([[0], inner, [n]]).astype(np.int64)


def _cap_bounds(bounds: np.ndarray, cap: int, n: int) -> np.ndarray:
    """Thin candidate positions down to ~cap by mass-equipartition of clumps."""
    if bounds.size - 1 <= cap:
        return bounds
    targets = np.arange(1, cap) * n / cap
    picks = bounds[np.searchsorted(bounds, targets)]
    return np.unique(np.concatenate([[0], picks, [n]])).astype(np.int64)


def mic_e(x: Sequence[float], y: Sequence[float],
          cfg: MicConfig = MicConfig()) -> float:
    """Regularized maximal information coefficient of a sample pair, in [0, 1].

    Deterministic given the inputs; symmetric in its arguments.  Constant
    input on either axis yields 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise GameError("mic_e expects two equal-length 1-D sample vectors")
    if x.size < MIN_SAMPLES:
        raise GameError(f"mic_e needs at least {MIN_SAMPLES} samples, got {x.size}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise GameError("mic_e inputs must be finite")
    n = x.size
    axes = {"x": _Axis(x), "y": _Axis(y)}
    if axes["x"].group_sizes.size == 1 or axes["y"].group_sizes.size == 1:
        return 0.0
    budget = cfg.grid_budget(n)
    best = 0.0
    # orientation "x": optimize the x-partition (k parts) with y equipartitioned
    # into b rows, covering shapes k < l; orientation "y" covers k >= l.
    for free_name, fixed_name, strict in (("x", "y", True), ("y", "x", False)):
        free, fixed = axes[free_name], axes[fixed_name]
        for b in range(2, (budget - 1) // 2 + 1):
            t_max = min(b - 1 if strict else b, (budget - 1) // b)
            if t_max < 2:
                continue
            labels = fixed.equipartition(b)
            rows_sorted = labels[free.order]
            counts = np.bincount(rows_sorted, minlength=b)
            nz = counts[counts > 0]
            h_row = float(-(nz / n * np.log(nz / n)).sum())
            bounds = _clump_bounds(rows_sorted, free.group_starts, n)
            bounds = _cap_bounds(bounds, cfg.max_clumps_factor * t_max, n)
            f_best = kernels.mic_optimize_free_axis(rows_sorted, bounds, b, t_max)
            for t in range(2, t_max + 1):
                if not np.isfinite(f_best[t]):
                    continue
                info = max(0.0, h_row + float(f_best[t]))
                best = max(best, info / math.log(t))
    return min(1.0, best)

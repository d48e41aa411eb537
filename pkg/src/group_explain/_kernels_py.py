"""Pure numpy implementations of the hot kernels.

Mirrors the compiled extension in ``_kernels.pyx``; selected at import time by
``_backend`` when the extension is unavailable (or forced via
``GROUP_EXPLAIN_FORCE_PY=1``).  Semantics of the two implementations are
identical and covered by equivalence tests.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _popcounts(size: int) -> np.ndarray:
    return np.bitwise_count(np.arange(size, dtype=np.uint64)).astype(np.int64)


def lin_value_dense(table: np.ndarray, wtable: np.ndarray, n: int) -> np.ndarray:
    """h_i = sum over coalitions S not containing i of w[S] * (v[S+i] - v[S])."""
    idx = np.arange(table.size, dtype=np.int64)
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        bit = 1 << i
        s = idx[(idx & bit) == 0]
        out[i] = wtable[s] @ (table[s | bit] - table[s])
    return out


def coalitional_direct_dense(table: np.ndarray, n: int, blocks: tuple[int, ...],
                             outer_by_size: np.ndarray,
                             inner_by_size: list[np.ndarray]) -> np.ndarray:
    """Double-sum coalitional value with size-based outer/inner weights.

    ``outer_by_size[r]`` weighs block subsets R of size r (R excludes the own
    block), ``inner_by_size[j][t]`` weighs within-block coalitions T of size t
    (T excludes the own player).
    """
    m = len(blocks)
    out = np.zeros(n, dtype=np.float64)
    for j, bj in enumerate(blocks):
        others = [blocks[k] for k in range(m) if k != j]
        nsub = 1 << (m - 1)
        qmasks = np.zeros(nsub, dtype=np.int64)
        for a in range(1, nsub):
            low = a & -a
            qmasks[a] = qmasks[a ^ low] | others[low.bit_length() - 1]
        wq = outer_by_size[_popcounts(nsub)]
        bj_players = [p for p in range(n) if bj >> p & 1]
        sj = len(bj_players)
        tsub = 1 << sj
        tmasks = np.zeros(tsub, dtype=np.int64)
        for a in range(1, tsub):
            low = a & -a
            tmasks[a] = tmasks[a ^ low] | (1 << bj_players[low.bit_length() - 1])
        tsizes = _popcounts(tsub)
        tlocal = np.arange(tsub, dtype=np.int64)
        for li, p in enumerate(bj_players):
            sel = tlocal[(tlocal & (1 << li)) == 0]
            wt = inner_by_size[j][tsizes[sel]]
            qt = qmasks[:, None] | tmasks[sel][None, :]
            diff = table[qt | (1 << p)] - table[qt]
            out[p] = (wq[:, None] * wt[None, :] * diff).sum()
    return out


INTERMEDIATE_MODIFIED_QUOTIENT = 0
INTERMEDIATE_TSH = 1


def two_step_dense(table: np.ndarray, n: int, blocks: tuple[int, ...],
                   h1_wtable: np.ndarray, h2_wtables: list[np.ndarray],
                   intermediate: int) -> np.ndarray:
    """Two-step evaluation: h1 across blocks on intermediate games, h2 within.

    ``h1_wtable`` indexes block subsets (2**m entries), ``h2_wtables[j]``
    indexes local within-block coalitions (2**|S_j| entries).  The input table
    must belong to a cooperative (centered) game.
    """
    m = len(blocks)
    nsub = 1 << m
    unions = np.zeros(nsub, dtype=np.int64)
    for a in range(1, nsub):
        low = a & -a
        unions[a] = unions[a ^ low] | blocks[low.bit_length() - 1]
    qtable = table[unions]
    asizes = _popcounts(nsub)
    out = np.zeros(n, dtype=np.float64)
    amask = np.arange(nsub, dtype=np.int64)
    for j, bj in enumerate(blocks):
        jbit = 1 << j
        bj_players = [p for p in range(n) if bj >> p & 1]
        sj = len(bj_players)
        tsub = 1 << sj
        tmasks = np.zeros(tsub, dtype=np.int64)
        for a in range(1, tsub):
            low = a & -a
            tmasks[a] = tmasks[a ^ low] | (1 << bj_players[low.bit_length() - 1])
        if intermediate == INTERMEDIATE_MODIFIED_QUOTIENT:
            vhat = np.empty((tsub, nsub), dtype=np.float64)
            for a in range(nsub):
                if a & jbit:
                    vhat[:, a] = table[unions[a ^ jbit] | tmasks]
                else:
                    vhat[:, a] = qtable[a]
        elif intermediate == INTERMEDIATE_TSH:
            ratios = _popcounts(tsub).astype(np.float64) / sj
            shift = table[tmasks] - ratios * qtable[jbit]
            vhat = ratios[:, None] * qtable[None, :] + asizes[None, :] * shift[:, None]
        else:
            raise ValueError(f"unknown intermediate family {intermediate}")
        a_noj = amask[(amask & jbit) == 0]
        vj = (h1_wtable[a_noj][None, :] *
              (vhat[:, a_noj | jbit] - vhat[:, a_noj])).sum(axis=1)
        w2 = h2_wtables[j]
        tlocal = np.arange(tsub, dtype=np.int64)
        for li, p in enumerate(bj_players):
            sel = tlocal[(tlocal & (1 << li)) == 0]
            out[p] = w2[sel] @ (vj[sel | (1 << li)] - vj[sel])
    return out


def mic_optimize_free_axis(rows: np.ndarray, bounds: np.ndarray, ell: int,
                           tmax: int) -> np.ndarray:
    """Best (H_col - H_joint) over partitions of the free axis into t intervals.

    ``rows`` are fixed-axis bin labels in free-axis-sorted order; ``bounds``
    are candidate cut positions (ascending, starting at 0 and ending at
    len(rows)).  Returns, for each t in 0..tmax, the maximum over partitions
    of the free axis into exactly t intervals with endpoints drawn from
    ``bounds`` of  sum_c [ sum_r (n_cr/n) log(n_cr/n) - (n_c/n) log(n_c/n) ];
    adding the fixed-axis entropy H_row yields the mutual information.
    Entries for infeasible t are -inf.
    """
    n = rows.size
    m = bounds.size - 1
    cum = np.zeros((m + 1, ell), dtype=np.float64)
    for b in range(1, m + 1):
        seg = rows[bounds[b - 1]:bounds[b]]
        cum[b] = cum[b - 1] + np.bincount(seg, minlength=ell)
    # score[s_prev, s]: contribution of one column covering (bounds[s_prev], bounds[s]]
    score = np.full((m + 1, m + 1), -np.inf, dtype=np.float64)
    for s in range(1, m + 1):
        c = cum[s][None, :] - cum[:s]            # (s, ell)
        tot = c.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            joint = np.where(c > 0, c / n * np.log(c / n), 0.0).sum(axis=1)
            colh = np.where(tot > 0, tot / n * np.log(tot / n), 0.0)
        score[:s, s] = joint - colh
    best = np.full(tmax + 1, -np.inf, dtype=np.float64)
    tcap = min(tmax, m)
    dp_prev = score[0, :].copy()                 # exactly one column
    if tcap >= 1:
        best[1] = dp_prev[m]
    for t in range(2, tcap + 1):
        dp_cur = np.full(m + 1, -np.inf, dtype=np.float64)
        for s in range(t, m + 1):
            dp_cur[s] = np.max(dp_prev[t - 1:s] + score[t - 1:s, s])
        dp_prev = dp_cur
        best[t] = dp_prev[m]
    return best

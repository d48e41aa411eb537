"""Dependence-based predictor clustering.

Pairwise dependence is estimated with the regularized maximal information
coefficient; ``1 - MIC`` serves as the dissimilarity, and average-linkage
agglomeration turns it into a partition tree whose height cut at a threshold
yields the predictor groups.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import squareform

from .games import GameError
from .mic import MicConfig, mic_e
from .tree import HEIGHT_EPS, PartitionTree


@dataclass
class DissimilarityMatrix:
    """Symmetric zero-diagonal matrix of 1 - MIC values in [0, 1]."""

    values: np.ndarray
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        d = self.values
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise GameError("dissimilarity matrix must be square")
        if not np.allclose(d, d.T, atol=1e-12):
            raise GameError("dissimilarity matrix must be symmetric")
        if np.abs(np.diag(d)).max(initial=0.0) > 1e-12:
            raise GameError("dissimilarity matrix must have a zero diagonal")
        if d.min(initial=0.0) < -1e-12 or d.max(initial=0.0) > 1 + 1e-12:
            raise GameError("dissimilarity entries must lie in [0, 1]")
        if not self.feature_names:
            self.feature_names = [f"x{i}" for i in range(d.shape[0])]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([""] + self.feature_names)
            for name, row in zip(self.feature_names, self.values):
                writer.writerow([name] + [f"{v:.10g}" for v in row])

    @classmethod
    def from_csv(cls, path: str | Path) -> "DissimilarityMatrix":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)[1:]
            rows = [[float(v) for v in row[1:]] for row in reader if row]
        return cls(np.array(rows), header)


def dissimilarity_matrix(data: np.ndarray, cfg: MicConfig = MicConfig(),
                         feature_names: list[str] | None = None) -> DissimilarityMatrix:
    """All-pairs 1 - MIC over the columns of ``data`` (>= 8 samples)."""
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    n_samples, n_features = data.shape
    if n_samples < 8:
        raise GameError(f"need at least 8 samples, got {n_samples}")
    out = np.zeros((n_features, n_features))
    for i in range(n_features):
        for j in range(i + 1, n_features):
            out[i, j] = out[j, i] = 1.0 - mic_e(data[:, i], data[:, j], cfg)
    return DissimilarityMatrix(out, feature_names or [f"x{i}" for i in range(n_features)])


def average_linkage_cluster(d: DissimilarityMatrix | np.ndarray,
                            feature_names: list[str] | None = None,
                            method: str = "average") -> PartitionTree:
    """Agglomerative group-average clustering into a partition tree.

    Merge heights are the group-average dissimilarities; heights above 1 are
    rescaled linearly so the root lands at min(1, max merge height).  Raw
    merge heights and any monotonicity repairs are kept in the tree metadata.
    ``method`` is reserved for future linkages; only "average" is supported.
    """
    if method != "average":
        raise GameError(f"linkage method {method!r} is reserved for future use; "
                        "only 'average' is supported")
    if isinstance(d, DissimilarityMatrix):
        names = d.feature_names
        matrix = d.values
    else:
        matrix = np.asarray(d, dtype=np.float64)
        names = feature_names or [f"x{i}" for i in range(matrix.shape[0])]
    n = matrix.shape[0]
    if n < 2:
        raise GameError("clustering needs at least two features")
    z = linkage(squareform(matrix, checks=False), method="average")
    raw = z[:, 2].copy()
    heights = raw.copy()
    inversions = []
    best_child = np.zeros(2 * n - 1)
    for k in range(n - 1):
        a, b = int(z[k, 0]), int(z[k, 1])
        floor = max(best_child[a], best_child[b])
        # leaves sit at 0 and parents must sit strictly above their children,
        # so zero-height and tied merges get an epsilon lift; true inversions
        # (possible only for non-average linkages) are recorded
        if heights[k] <= floor:
            if heights[k] < floor - 1e-15:
                inversions.append(k)
            heights[k] = floor + HEIGHT_EPS
        best_child[n + k] = heights[k]
    top = heights.max()
    if top > 1.0:
        heights = heights / top
    merges = [(int(z[k, 0]), int(z[k, 1]), float(heights[k])) for k in range(n - 1)]
    meta = {"raw_merge_heights": raw.tolist(), "inversions": inversions,
            "feature_names": list(names), "linkage": "average"}
    return PartitionTree.from_merges(n, merges, metadata=meta)


def cluster_features(data: np.ndarray, threshold: float,
                     cfg: MicConfig = MicConfig(),
                     feature_names: list[str] | None = None):
    """Convenience pipeline: dissimilarities, tree, and the cut at ``threshold``.

    Returns ``(dissimilarity, tree, partition)``.
    """
    dis = dissimilarity_matrix(data, cfg, feature_names)
    tree = average_linkage_cluster(dis)
    return dis, tree, tree.cut(threshold)

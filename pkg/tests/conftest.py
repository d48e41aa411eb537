import numpy as np
import pytest

from group_explain import Game, Partition
from group_explain.tree import PartitionTree


@pytest.fixture
def majority3() -> Game:
    """Three-player majority game: worth 1 iff the coalition has >= 2 players."""
    return Game.from_dense([1.0 if bin(s).count("1") >= 2 else 0.0
                            for s in range(8)])


@pytest.fixture
def pair_partition() -> Partition:
    return Partition.from_lists([[0, 1], [2]], 3)


def make_random_tree(n: int, rng: np.random.Generator,
                     max_height: float = 1.0) -> PartitionTree:
    """Random binary merge tree with sorted random heights."""
    clusters = list(range(n))
    heights = np.sort(rng.uniform(0.05, max_height, n - 1))
    heights[-1] = max_height
    merges = []
    for k in range(n - 1):
        i, j = sorted(rng.choice(len(clusters), 2, replace=False))
        a, b = clusters[i], clusters[j]
        clusters = [c for t, c in enumerate(clusters) if t not in (i, j)]
        clusters.append(n + k)
        merges.append((a, b, float(heights[k])))
    return PartitionTree.from_merges(n, merges)

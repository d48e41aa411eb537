import numpy as np
import pytest

from group_explain.clustering import (DissimilarityMatrix, average_linkage_cluster,
                                      cluster_features, dissimilarity_matrix)
from group_explain.games import GameError
from group_explain.synthetic import MIC_TEST_GROUPS, generate_mic_test


def as_sets(blocks):
    return sorted(map(sorted, blocks))


def test_duplicated_feature_distance_zero():
    rng = np.random.default_rng(0)
    x = rng.uniform(size=200)
    data = np.column_stack([x, x, rng.uniform(size=200)])
    d = dissimilarity_matrix(data)
    assert d.values[0, 1] == pytest.approx(0.0, abs=1e-9)
    assert d.values[0, 2] > 0.5


def test_independent_features_near_one():
    rng = np.random.default_rng(1)
    data = rng.uniform(size=(5000, 3))
    d = dissimilarity_matrix(data)
    off = d.values[np.triu_indices(3, 1)]
    assert (off > 0.85).all()


def test_matrix_validation():
    with pytest.raises(GameError):
        DissimilarityMatrix(np.array([[0.0, 0.5], [0.4, 0.0]]))  # asymmetric
    with pytest.raises(GameError):
        DissimilarityMatrix(np.array([[0.2, 0.5], [0.5, 0.0]]))  # diagonal
    with pytest.raises(GameError):
        DissimilarityMatrix(np.array([[0.0, 1.5], [1.5, 0.0]]))  # range


def test_requires_eight_samples():
    with pytest.raises(GameError):
        dissimilarity_matrix(np.random.default_rng(0).uniform(size=(5, 3)))


def test_csv_round_trip(tmp_path):
    d = DissimilarityMatrix(np.array([[0.0, 0.3], [0.3, 0.0]]), ["a", "b"])
    path = tmp_path / "d.csv"
    d.to_csv(path)
    back = DissimilarityMatrix.from_csv(path)
    assert np.allclose(back.values, d.values)
    assert back.feature_names == ["a", "b"]


def test_two_feature_tree():
    d = DissimilarityMatrix(np.array([[0.0, 0.37], [0.37, 0.0]]))
    tree = average_linkage_cluster(d)
    assert tree.n == 2
    root = tree.nodes[tree.root]
    assert root.height == pytest.approx(0.37)
    assert tree.cut(0.2).to_lists() == [[0], [1]]
    assert tree.cut(0.5).to_lists() == [[0, 1]]


def test_identical_pair_merges_first_at_zero():
    rng = np.random.default_rng(2)
    x = rng.uniform(size=300)
    data = np.column_stack([rng.uniform(size=300), x, x])
    _, tree, _ = cluster_features(data, 0.5)
    first = min(tree.merge_heights())
    assert first <= 1e-9
    assert as_sets(tree.cut(0.4).to_lists()) == [[0], [1, 2]]


def test_merge_heights_monotone():
    rng = np.random.default_rng(3)
    data = rng.uniform(size=(600, 5))
    _, tree, _ = cluster_features(data, 0.7)
    hs = [tree.nodes[n + 5].height for n in range(4)]  # merge order
    assert all(a <= b + 1e-12 for a, b in zip(hs, hs[1:]))
    assert tree.metadata["inversions"] == []


def test_average_linkage_heights_are_group_averages():
    # three points: d(0,1) small; merging {0,1} with 2 at mean(d02, d12)
    d = np.array([[0.0, 0.1, 0.6], [0.1, 0.0, 0.8], [0.6, 0.8, 0.0]])
    tree = average_linkage_cluster(DissimilarityMatrix(d))
    heights = sorted(tree.merge_heights())
    assert heights[0] == pytest.approx(0.1)
    assert heights[1] == pytest.approx(0.7)


@pytest.mark.slow
def test_mic_test_model_grouping_single_seed():
    data, names = generate_mic_test(10000, seed=0)
    dis, tree, partition = cluster_features(data, 0.7, feature_names=names)
    assert as_sets(partition.to_lists()) == as_sets(MIC_TEST_GROUPS)
    # paper-style threshold facts: in-group distances below 0.7, x4 isolated
    d = dis.values
    assert d[0, 1] < 0.7 and d[0, 2] < 0.7 and d[0, 3] < 0.7
    assert (np.delete(d[4], 4) > 0.7).all()

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.cluster import HDBSCAN
from sklearn.metrics import adjusted_rand_score

from mcbp.cluster import hdbscan, hdbscan_fit
from mcbp.cluster.hdbscan import (
    core_distances,
    minimum_spanning_tree,
    mutual_reachability,
    pairwise_distances,
    select_clusters_eom,
    single_linkage,
)
from mcbp.data import TWO_BLOB_CENTERS, gen_blobs, gen_moons, load_iris, standardize
from mcbp.errors import ParameterError
from oracles import mst_weight_exhaustive


def _random_graph(rng, n, ties=False):
    w = rng.integers(1, 4, (n, n)).astype(float) if ties else rng.random((n, n))
    w = np.triu(w, 1)
    return w + w.T


@pytest.mark.parametrize("n", range(2, 9))
def test_mst_weight_matches_exhaustive(n):
    rng = np.random.default_rng(n)
    for ties in (False, True):
        for _ in range(3):
            w = _random_graph(rng, n, ties)
            mst = minimum_spanning_tree(w)
            assert mst[:, 2].sum() == pytest.approx(mst_weight_exhaustive(w), abs=1e-12)


@pytest.mark.slow
def test_mst_weight_matches_exhaustive_nine():
    w = _random_graph(np.random.default_rng(9), 9)
    assert minimum_spanning_tree(w)[:, 2].sum() == pytest.approx(mst_weight_exhaustive(w), abs=1e-12)


def test_mst_is_spanning_tree(rng):
    w = _random_graph(rng, 30)
    mst = minimum_spanning_tree(w)
    assert len(mst) == 29
    link = single_linkage(mst, 30)
    assert link[-1, 3] == 30
    assert np.all(np.diff(link[:, 2]) >= 0)


def test_core_distance_counts_self():
    d = pairwise_distances(np.array([[0.0], [1.0], [3.0]]))
    np.testing.assert_array_equal(core_distances(d, 1), 0.0)
    np.testing.assert_array_equal(core_distances(d, 2), [1.0, 1.0, 2.0])
    mr = mutual_reachability(d, core_distances(d, 2))
    assert mr[0, 1] == 1.0 and mr[0, 2] == 3.0 and mr[1, 2] == 2.0
    assert np.all(np.diag(mr) == 0.0)


def test_two_separated_blobs():
    data = gen_blobs(400, TWO_BLOB_CENTERS, rng_seed=0)
    res = hdbscan(data, 5)
    assert res.n_clusters == 2
    core = res.labels >= 0
    assert adjusted_rand_score(data.labels[core], res.labels[core]) >= 0.95


def test_short_line_is_at_most_one_cluster():
    x = np.column_stack([np.linspace(0, 1, 20), np.zeros(20)])
    assert hdbscan(x, 10).n_clusters <= 1


def test_duplicated_clusters():
    x = np.vstack([np.zeros((12, 2)), np.full((12, 2), 5.0)])
    res = hdbscan(x, 5)
    assert res.n_clusters == 2 and res.n_noise == 0
    assert len(set(res.labels[:12])) == 1 and res.labels[0] != res.labels[-1]


def test_too_small_for_mcs(rng):
    with pytest.raises(ParameterError):
        hdbscan(rng.standard_normal((9, 2)), 5)
    with pytest.raises(ParameterError):
        hdbscan(rng.standard_normal((30, 2)), 1)


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_condensed_tree_invariants(seed):
    rng = np.random.default_rng(seed)
    x = np.vstack([rng.standard_normal((25, 2)), rng.standard_normal((25, 2)) + 5])
    res, tree = hdbscan_fit(x, 5)
    points = tree.child[~tree.is_cluster]
    assert sorted(points.tolist()) == list(range(50))
    assert np.all(tree.lam > 0)
    assert np.all(tree.child_size[tree.is_cluster] >= 5)
    for c, b in tree.birth.items():
        if c:
            assert tree.lam[tree.is_cluster & (tree.child == c)][0] == b
        out = tree.lam[tree.parent == c]
        assert np.all(out >= b - 1e-12)
    assert all(s >= -1e-9 for s in tree.stability.values())
    assert 0 not in select_clusters_eom(tree)
    assert res.labels.min() >= -1 and res.n_clusters == len(res.meta["selected_clusters"])


def test_permutation_invariance(rng):
    data = gen_moons(200, 0.05, rng_seed=3)
    perm = rng.permutation(200)
    a = hdbscan(data, 10).labels
    b = hdbscan(data.features[perm], 10).labels
    assert adjusted_rand_score(a[perm], b) == 1.0
    assert np.array_equal(a[perm] >= 0, b >= 0)


@pytest.mark.parametrize("mcs", [5, 10, 20])
@pytest.mark.parametrize("name", ["moons", "iris"])
def test_agrees_with_sklearn(name, mcs):
    data = gen_moons(300, 0.08, rng_seed=1) if name == "moons" else standardize(load_iris())
    ours = hdbscan(data, mcs).labels
    ref = HDBSCAN(min_cluster_size=mcs).fit(data.features).labels_
    assert adjusted_rand_score(ours, ref) >= 0.95


def test_meta_records_mst_weight(rng):
    x = rng.standard_normal((40, 2))
    res = hdbscan(x, 5)
    d = pairwise_distances(x)
    mr = mutual_reachability(d, core_distances(d, 5))
    assert res.meta["mst_weight"] == pytest.approx(minimum_spanning_tree(mr)[:, 2].sum())
    assert res.meta["min_samples"] == 5

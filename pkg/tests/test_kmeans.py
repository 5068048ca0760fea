import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcbp.cluster import kmeans, kmeans_pp, kmeans_pp_init
from mcbp.errors import ParameterError


def test_four_points_two_pairs():
    x = np.array([[0.0], [1.0], [9.0], [10.0]])
    res = kmeans_pp(x, 2, rng_seed=3)
    np.testing.assert_allclose(np.sort(res.centroids[:, 0]), [0.5, 9.5])
    assert res.inertia == pytest.approx(1.0)
    assert res.labels[0] == res.labels[1] != res.labels[2] == res.labels[3]


def test_one_cluster_per_point(rng):
    x = rng.standard_normal((12, 2))
    res = kmeans_pp(x, 12, rng_seed=0)
    assert res.inertia == pytest.approx(0.0, abs=1e-20)
    assert len(np.unique(res.labels)) == 12


def test_single_cluster_is_the_mean(rng):
    x = rng.standard_normal((30, 3))
    res = kmeans_pp(x, 1)
    np.testing.assert_allclose(res.centroids[0], x.mean(axis=0), atol=1e-12)
    assert np.all(res.labels == 0)


def test_seeding_splits_far_pairs():
    # two tight pairs 1000 apart: D^2 sampling puts the second centre in the other pair almost surely
    x = np.array([[0.0, 0.0], [0.1, 0.0], [1000.0, 0.0], [1000.1, 0.0]])
    hits = 0
    for seed in range(1000):
        _, idx = kmeans_pp_init(x, 2, rng_seed=seed, return_indices=True)
        hits += (idx[0] < 2) != (idx[1] < 2)
    assert hits / 1000 >= 0.95


def test_seeding_is_deterministic(rng):
    x = rng.standard_normal((50, 2))
    np.testing.assert_array_equal(kmeans_pp_init(x, 4, 11), kmeans_pp_init(x, 4, 11))


def test_duplicate_points_still_pick_distinct_rows():
    x = np.zeros((5, 2))
    _, idx = kmeans_pp_init(x, 3, rng_seed=0, return_indices=True)
    assert len(set(idx.tolist())) == 3


def test_empty_cluster_reseeded():
    x = np.array([[0.0], [0.1], [0.2], [10.0]])
    res = kmeans(x, np.array([[0.1], [50.0], [60.0]]))
    assert len(np.unique(res.labels)) == 3
    assert res.meta["empty_clusters"] == 0


@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_lloyd_invariants(seed, c):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((40, 2)) + rng.integers(0, 3, 40)[:, None] * 4
    res = kmeans_pp(x, c, rng_seed=seed)
    hist = res.meta["inertia_history"]
    assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(hist, hist[1:]))
    for j in np.unique(res.labels):
        np.testing.assert_allclose(res.centroids[j], x[res.labels == j].mean(axis=0), atol=1e-9)
    d2 = ((x[:, None] - res.centroids[None]) ** 2).sum(axis=2)
    assert np.all(d2[np.arange(40), res.labels] <= d2.min(axis=1) + 1e-12)
    assert res.inertia == pytest.approx(d2.min(axis=1).sum())


def test_max_iter_reports_unconverged(rng):
    x = rng.standard_normal((200, 2))
    res = kmeans_pp(x, 8, rng_seed=1, max_iter=1)
    assert res.iterations == 1 and not res.converged


def test_bad_arguments(rng):
    x = rng.standard_normal((5, 2))
    with pytest.raises(ParameterError):
        kmeans_pp(x, 6)
    with pytest.raises(ParameterError):
        kmeans_pp(x, 0)
    with pytest.raises(ParameterError):
        kmeans(x, np.zeros((2, 3)))


def test_result_serialisation(tmp_path, rng):
    res = kmeans_pp(rng.standard_normal((10, 2)), 2)
    res.to_csv(tmp_path / "l.csv")
    assert (tmp_path / "l.csv").read_text().splitlines()[0] == "index,label"
    d = res.to_dict()
    assert d["n_clusters"] == 2 and len(d["labels"]) == 10

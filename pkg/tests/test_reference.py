import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_instance
from sparsepam.core import build_matrix, evaluate_loss
from sparsepam.reference import brute_force, central_points, dense_fasterpam, geometric_median, min_cover_size
from sparsepam.swap import SwapConfig, dyn_swap
from sparsepam.initialize import dyn_build

NINE_POINTS = [
    (1.000000, -0.426151),
    (0.375152, 1.000000),
    (0.050578, -0.045320),
    (-0.734840, -0.010723),
    (-1.000000, -0.422913),
    (-0.892265, -0.632368),
    (-0.314216, -1.000000),
    (0.174161, -0.886315),
    (-0.500000, -0.500000),
]


def euclid(n, seed):
    pts = np.random.default_rng(seed).normal(size=(n, 2))
    return np.linalg.norm(pts[:, None] - pts[None], axis=2)


def td(dense, med):
    return float(dense[:, med].min(axis=1).sum())


def test_k_equals_n():
    d = euclid(7, 0)
    total, med = dense_fasterpam(d, 7, seed=1)
    assert total == 0
    assert sorted(med) == list(range(7))


@pytest.mark.parametrize("k", [0, 8])
def test_k_out_of_range(k):
    with pytest.raises(ValueError):
        dense_fasterpam(euclid(7, 0), k)


@pytest.mark.parametrize("seed", range(12))
def test_dense_is_local_optimum_and_bounded_by_exhaustive(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 9))
    k = int(rng.integers(1, 4))
    d = rng.uniform(0, 10, size=(n, n))
    total, med = dense_fasterpam(d, k, seed=seed)
    assert total == pytest.approx(td(d, med))
    best = min(td(d, list(c)) for c in itertools.combinations(range(n), k))
    assert total >= best - 1e-12
    for i, c in itertools.product(range(k), range(n)):
        if c in med:
            continue
        trial = med[:i] + [c] + med[i + 1 :]
        assert td(d, trial) >= total - 1e-9


def test_dense_deterministic():
    d = euclid(30, 2)
    assert dense_fasterpam(d, 4, seed=9) == dense_fasterpam(d, 4, seed=9)


def test_brute_force_single_cover():
    m = build_matrix([(o, 1, 1.0) for o in range(3)] + [(0, 0, 0.5)], 3, 2)
    assert brute_force(m, 2).min_feasible_k == 1


def test_brute_force_components():
    m = build_matrix([(0, 0, 1.0), (1, 0, 1.0), (2, 1, 1.0)], 3, 2)
    res = brute_force(m, 2)
    assert res.min_feasible_k == 2
    assert res.best[1].penalty == 1
    assert res.witness[2] == (0, 1)


def test_brute_force_uncoverable():
    assert brute_force(build_matrix([], 2, 3), 1).min_feasible_k is None


def test_brute_force_guard():
    with pytest.raises(ValueError):
        brute_force(build_matrix([], 1, 21), 1)


@pytest.mark.parametrize("seed", range(15))
def test_brute_force_beats_dyn_swap(seed):
    rng = np.random.default_rng(seed)
    m = random_instance(rng, 12, 6, density=0.35)
    res = brute_force(m, 6)
    for k in range(1, 7):
        got = evaluate_loss(m, res.witness[k])
        assert got.penalty == res.best[k].penalty
        assert got.dist == pytest.approx(res.best[k].dist, rel=1e-12)
    _, start, _ = dyn_build(m, 1)
    loss, med, _, _ = dyn_swap(m, start, SwapConfig(allow_decrease=True, seed=seed))
    opt = res.best[len(med)]
    assert (opt.penalty, opt.dist) <= (loss.penalty, loss.dist + 1e-9)


@given(st.integers(0, 2**32 - 1))
def test_min_k_monotone_in_edges(seed):
    rng = np.random.default_rng(seed)
    sparse = random_instance(rng, 10, 6, density=0.2)
    present = {(o, j) for o, j, _ in sparse.entries()}
    extra = [(o, j, 1.0) for o in range(10) for j in range(6) if (o, j) not in present and rng.random() < 0.2]
    denser = build_matrix(sparse.entries() + extra, 10, 6)
    assert brute_force(denser, 1).min_feasible_k <= brute_force(sparse, 1).min_feasible_k


def test_nine_point_distance_sums():
    res = central_points(NINE_POINTS)
    assert res["medoid"].center.tolist() == [-0.5, -0.5]
    assert res["medoid"].l2 == pytest.approx(6.726, abs=1e-3)
    assert res["mean"].l2_squared == pytest.approx(6.330, abs=1e-3)
    assert res["median"].l1 == pytest.approx(8.267, abs=1e-3)
    assert res["geometric_median"].l2 == pytest.approx(6.712, abs=1e-3)
    # the remaining cells of the table
    assert res["mean"].l2 == pytest.approx(6.909, abs=1e-3)
    assert res["mean"].l1 == pytest.approx(8.674, abs=1e-3)
    assert res["median"].l2 == pytest.approx(6.761, abs=1e-3)
    assert res["median"].l2_squared == pytest.approx(6.530, abs=1e-3)
    assert res["geometric_median"].l2_squared == pytest.approx(7.008, abs=1e-3)
    assert res["geometric_median"].l1 == pytest.approx(8.431, abs=1e-3)
    assert res["medoid"].l2_squared == pytest.approx(7.391, abs=1e-3)
    assert res["medoid"].l1 == pytest.approx(8.526, abs=1e-3)


def test_single_point():
    res = central_points([(2.0, 3.0)])
    for cp in res.values():
        assert cp.center.tolist() == [2.0, 3.0]
        assert cp.l2 == cp.l2_squared == cp.l1 == 0


def test_two_points():
    res = central_points([(0.0, 0.0), (3.0, 4.0)])
    assert res["medoid"].l2 == pytest.approx(5.0)
    assert res["mean"].center.tolist() == [1.5, 2.0]
    assert res["mean"].l2 == pytest.approx(5.0)


def test_empty_points():
    with pytest.raises(ValueError):
        central_points([])


def test_weiszfeld_on_data_point():
    # the mean of this set is a data point
    pts = np.array([(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)])
    gm = geometric_median(pts)
    assert np.allclose(gm, 0.0, atol=1e-6)


@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=1, max_size=15))
def test_each_center_wins_its_own_criterion(points):
    res = central_points(points)
    tol = 1e-6
    assert res["mean"].l2_squared <= min(cp.l2_squared for cp in res.values()) + tol
    assert res["median"].l1 <= min(cp.l1 for cp in res.values()) + tol
    assert res["geometric_median"].l2 <= min(cp.l2 for cp in res.values()) + tol


def test_min_cover_size_matches_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(40):
        m = random_instance(rng, int(rng.integers(3, 15)), int(rng.integers(2, 10)), density=0.25)
        assert min_cover_size(m) == brute_force(m, 1).min_feasible_k


def test_min_cover_size_isolated():
    assert min_cover_size(build_matrix([(0, 0, 1.0)], 2, 1)) is None

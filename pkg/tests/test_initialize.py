import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_instance
from sparsepam.core import build_matrix, evaluate_loss
from sparsepam.initialize import InfeasibleError, dyn_build, random_init, sparse_pp
from sparsepam.swap import refresh_caches


def disjoint(sizes):
    """Candidate j reaches its own block of ``sizes[j]`` demands at cost 1."""
    entries, o = [], 0
    for j, s in enumerate(sizes):
        for _ in range(s):
            entries.append((o, j, 1.0))
            o += 1
    return build_matrix(entries, o, len(sizes))


def test_single_covering_candidate():
    m = build_matrix([(o, 0, 1.0 + o) for o in range(4)], 4, 1)
    loss, med, _ = dyn_build(m, 1)
    assert med == [0]
    assert loss.penalty == 0


def test_k_grows_to_cover_components():
    loss, med, _ = dyn_build(disjoint([2, 2]), 1)
    assert sorted(med) == [0, 1]
    assert loss.penalty == 0


@pytest.mark.parametrize("seed", range(15))
def test_first_medoid_is_best_singleton(seed):
    rng = np.random.default_rng(seed)
    m = random_instance(rng, 30, 10, density=0.3)
    trace = []
    dyn_build(m, 2, trace=trace)
    losses = [evaluate_loss(m, [j]) for j in range(10)]
    best = min(range(10), key=lambda j: (losses[j], j))
    assert trace[0][0] == best


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_incremental_loss_matches_scratch(seed, k):
    rng = np.random.default_rng(seed)
    m = random_instance(rng, 20, 8, density=0.25, int_penalties=True)
    trace = []
    loss, med, assignment = dyn_build(m, k, trace=trace)
    chosen = []
    for j, running in trace:
        chosen.append(j)
        scratch = evaluate_loss(m, chosen)
        assert running.penalty == scratch.penalty
        assert running.dist == pytest.approx(scratch.dist, rel=1e-9, abs=1e-9)
    assert chosen == med
    assert loss.penalty == 0
    assert len(med) >= min(k, m.n_candidates)
    ref = refresh_caches(m, med)
    assert (assignment.d1, assignment.d2) == (ref.d1, ref.d2)


@given(st.integers(0, 2**32 - 1))
def test_dyn_build_deterministic(seed):
    rng = np.random.default_rng(seed)
    m = random_instance(rng, 15, 6, density=0.3)
    assert dyn_build(m, 2) == dyn_build(m, 2)


def test_dyn_build_strict_and_lenient():
    m = build_matrix([(0, 0, 1.0)], 2, 1)
    with pytest.raises(InfeasibleError):
        dyn_build(m, 1)
    with pytest.warns(RuntimeWarning):
        loss, med, _ = dyn_build(m, 1, strict=False)
    assert med == [0]
    assert loss.penalty == 1.0


def test_dyn_build_honors_k_even_without_gain():
    m = build_matrix([(0, j, 1.0) for j in range(3)], 1, 3)
    loss, med, _ = dyn_build(m, 3)
    assert sorted(med) == [0, 1, 2]
    assert loss.dist == 1.0


def test_random_fraction_all():
    m = random_instance(np.random.default_rng(0), 10, 7)
    assert random_init(m, 1.0, 3) == list(range(7))


def test_random_fraction_uses_ceiling():
    m = random_instance(np.random.default_rng(0), 10, 20)
    assert len(random_init(m, 0.05, 3)) == 1
    m30 = random_instance(np.random.default_rng(0), 10, 30)
    assert len(random_init(m30, 0.1, 3)) == 3


def test_random_seeded():
    m = random_instance(np.random.default_rng(0), 10, 20)
    assert random_init(m, 0.3, 9) == random_init(m, 0.3, 9)
    assert random_init(m, 5, 9) == random_init(m, 5, 9)
    assert len(random_init(m, 5, 9)) == 5


@pytest.mark.parametrize("bad", [0, 21, 0.0, 1.5])
def test_random_count_out_of_range(bad):
    m = random_instance(np.random.default_rng(0), 10, 20)
    with pytest.raises(ValueError):
        random_init(m, bad, 1)


def test_sparse_pp_single_candidate():
    m = build_matrix([(o, 0, 1.0) for o in range(4)], 4, 1)
    assert sparse_pp(m, 1, 0) == [0]


def test_sparse_pp_first_draw_probability():
    m = disjoint([3, 1])
    n = 4000
    first = sum(sparse_pp(m, 1, seed)[0] == 0 for seed in range(n))
    sd = math.sqrt(n * 0.75 * 0.25)
    assert abs(first - 0.75 * n) <= 3 * sd


def test_sparse_pp_multinomial_frequencies():
    m = disjoint([1, 2, 3, 4])
    n = 10_000
    counts = np.zeros(4)
    for seed in range(n):
        counts[sparse_pp(m, 1, seed)[0]] += 1
    p = np.array([1, 2, 3, 4]) / 10
    sd = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) <= 3 * sd)


def test_sparse_pp_weights_by_penalty_mass():
    entries = [(0, 0, 1.0), (1, 0, 1.0), (2, 1, 1.0)]
    m = build_matrix(entries, 3, 2, penalties=[1.0, 1.0, 6.0])
    n = 4000
    first = sum(sparse_pp(m, 1, s)[0] == 1 for s in range(n))
    sd = math.sqrt(n * 0.75 * 0.25)
    assert abs(first - 0.75 * n) <= 3 * sd


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_sparse_pp_covers_and_reaches_k(seed, k):
    rng = np.random.default_rng(seed)
    m = random_instance(rng, 20, 8, density=0.2)
    med = sparse_pp(m, k, seed)
    assert len(set(med)) == len(med) >= min(k, 8)
    assert evaluate_loss(m, med).penalty == 0
    assert med == sparse_pp(m, k, seed)


def test_sparse_pp_isolated():
    m = build_matrix([(0, 0, 1.0)], 2, 2)
    with pytest.raises(InfeasibleError):
        sparse_pp(m, 1, 0)
    with pytest.warns(RuntimeWarning):
        assert sparse_pp(m, 1, 0, strict=False) == [0]

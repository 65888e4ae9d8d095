import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sparsepam.core import build_matrix

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_instance(rng, n_demand, n_candidates, density=0.4, coverable=True, int_penalties=False, ties=False):
    """Random sparse matrix; with ``coverable`` every demand gets at least one entry."""
    entries = {}
    for o in range(n_demand):
        for j in range(n_candidates):
            if rng.random() < density:
                entries[(o, j)] = float(rng.integers(0, 5)) if ties else float(rng.uniform(0.1, 10.0))
        if coverable and not any((o, j) in entries for j in range(n_candidates)):
            j = int(rng.integers(n_candidates))
            entries[(o, j)] = float(rng.uniform(0.1, 10.0))
    penalties = None
    if int_penalties:
        penalties = rng.integers(1, 4, size=n_demand).astype(float).tolist()
    return build_matrix([(o, j, c) for (o, j), c in entries.items()], n_demand, n_candidates, penalties)


def dense_loss(matrix, medoids):
    """Oracle: double loop over the inf-padded dense matrix."""
    dense = [[math.inf] * matrix.n_candidates for _ in range(matrix.n_demand)]
    for o, j, c in matrix.entries():
        dense[o][j] = c
    pen = dist = 0.0
    for o in range(matrix.n_demand):
        best = math.inf
        for j in medoids:
            best = min(best, dense[o][j])
        if best == math.inf:
            pen += matrix.penalties[o]
        else:
            dist += best
    return pen, dist


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

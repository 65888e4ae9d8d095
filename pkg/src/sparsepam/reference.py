"""Yardsticks: a dense FasterPAM baseline, an exhaustive oracle and 2-D central points."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csr_matrix

from .core import INF, LossPair, SparseCostMatrix, distance_tolerance


def dense_fasterpam(dense, k: int, seed=None, initial_medoids=None, max_sweeps: int = 100):
    """FasterPAM on a dense cost matrix (rows are points, columns candidate medoids).

    Random initialization unless ``initial_medoids`` is given, then eager
    first-improvement swaps with a shared accumulator. Improvements and
    argmin ties below :func:`sparsepam.core.distance_tolerance` are ignored,
    as in the sparse version. The candidate order
    and stopping rule are the same as :func:`sparsepam.swap.dyn_swap`, so both
    walk identical paths on a complete matrix.

    Returns ``(total_deviation, medoids)``.
    """
    dense = np.asarray(dense, dtype=float)
    if dense.ndim != 2:
        raise ValueError("dense matrix must be 2-D")
    n, m = dense.shape
    if not 1 <= k <= m:
        raise ValueError(f"k must be in [1, {m}], got {k}")
    if not np.all(np.isfinite(dense)):
        raise ValueError("dense matrix must be finite")
    rng = np.random.default_rng(seed)
    if initial_medoids is None:
        medoids = rng.choice(m, size=k, replace=False).tolist()
    else:
        medoids = [int(c) for c in initial_medoids]
        if len(medoids) != k or len(set(medoids)) != k:
            raise ValueError("initial_medoids must hold k distinct candidates")
    cols = dense.T.tolist()
    tol = distance_tolerance(dense.max(axis=1))

    def assign():
        n1 = [0] * n
        d1 = [INF] * n
        d2 = [INF] * n
        for i, c in enumerate(medoids):
            col = cols[c]
            for o in range(n):
                d = col[o]
                if d < d1[o]:
                    n1[o], d1[o], d2[o] = i, d, d1[o]
                elif d < d2[o]:
                    d2[o] = d
        removal = [0.0] * k
        if k > 1:
            for o in range(n):
                removal[n1[o]] += d2[o] - d1[o]
        return n1, d1, d2, removal

    n1, d1, d2, removal = assign()
    td = math.fsum(d1)
    is_medoid = [False] * m
    for c in medoids:
        is_medoid[c] = True

    checked = [-1] * m
    version = 0
    n_checked = 0
    sweeps = 0
    converged = k == m
    while not converged and sweeps < max_sweeps:
        sweeps += 1
        for c in rng.permutation(m).tolist():
            if is_medoid[c] or checked[c] == version:
                continue
            col = cols[c]
            if k == 1:
                best, change = 0, math.fsum(col) - td
            else:
                delta = removal[:]
                acc = 0.0
                for o in range(n):
                    d = col[o]
                    a = d1[o]
                    if d < a:
                        acc += d - a
                        delta[n1[o]] += a - d2[o]
                    else:
                        b = d2[o]
                        if d < b:
                            delta[n1[o]] += d - b
                best = 0
                for i in range(1, k):
                    if delta[i] < delta[best] - tol:
                        best = i
                change = delta[best] + acc
            if change < -tol:
                is_medoid[medoids[best]] = False
                is_medoid[c] = True
                medoids[best] = c
                n1, d1, d2, removal = assign()
                td = math.fsum(d1)
                version += 1
                n_checked = 0
            else:
                checked[c] = version
                n_checked += 1
                if n_checked >= m - k:
                    converged = True
                    break
    return td, medoids


@dataclass
class BruteForceResult:
    min_feasible_k: int | None
    best: dict[int, LossPair] = field(default_factory=dict)
    witness: dict[int, tuple[int, ...]] = field(default_factory=dict)


MAX_BRUTE_FORCE_CANDIDATES = 20


def brute_force(matrix: SparseCostMatrix, k_max: int) -> BruteForceResult:
    """Exhaustive search over candidate subsets.

    Reports the smallest k that covers every demand (None if impossible) and,
    for each k <= k_max, the lexicographically optimal loss with the first
    optimal subset in ``itertools.combinations`` order.
    """
    m = matrix.n_candidates
    if m > MAX_BRUTE_FORCE_CANDIDATES:
        raise ValueError(f"brute force is limited to {MAX_BRUTE_FORCE_CANDIDATES} candidates, got {m}")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")

    full = (1 << matrix.n_demand) - 1
    masks = [sum(1 << o for o in matrix.fwd_idx[j]) for j in range(m)]
    min_k = None
    if not matrix.isolated_demands():
        for size in range(1, m + 1):
            if any(_union(masks, combo) == full for combo in itertools.combinations(range(m), size)):
                min_k = size
                break

    result = BruteForceResult(min_k)
    dense = matrix.to_dense()
    pen = np.asarray(matrix.penalties)
    for size in range(1, min(k_max, m) + 1):
        combos = np.array(list(itertools.combinations(range(m), size)), dtype=np.intp)
        mins = dense[:, combos].min(axis=2)  # N x C
        missing = np.isinf(mins)
        penalty = (pen[:, None] * missing).sum(axis=0)
        dist = np.where(missing, 0.0, mins).sum(axis=0)
        order = np.lexsort((np.arange(len(combos)), dist, penalty))
        i = int(order[0])
        result.best[size] = LossPair(float(penalty[i]), float(dist[i]))
        result.witness[size] = tuple(int(c) for c in combos[i])
    return result


def min_cover_size(matrix: SparseCostMatrix, time_limit: float | None = None) -> int | None:
    """Smallest number of candidates reaching every demand, via an integer program.

    Exact unless ``time_limit`` cuts the solver short (then ``RuntimeError``).
    Returns None if some demand is unreachable.
    """
    if matrix.isolated_demands():
        return None
    rows = [o for j in range(matrix.n_candidates) for o in matrix.fwd_idx[j]]
    cols = [j for j in range(matrix.n_candidates) for _ in matrix.fwd_idx[j]]
    a = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(matrix.n_demand, matrix.n_candidates))
    m = matrix.n_candidates
    res = milp(
        np.ones(m),
        constraints=LinearConstraint(a, lb=1),
        integrality=np.ones(m),
        bounds=Bounds(0, 1),
        options={} if time_limit is None else {"time_limit": time_limit},
    )
    if res.status != 0:
        raise RuntimeError(f"set cover solver did not finish: {res.message}")
    return int(round(res.fun))


def _union(masks, combo):
    acc = 0
    for j in combo:
        acc |= masks[j]
    return acc


@dataclass
class CentralPoint:
    center: np.ndarray
    l2: float
    l2_squared: float
    l1: float


def _distance_sums(points: np.ndarray, center: np.ndarray) -> tuple[float, float, float]:
    diff = points - center
    sq = (diff**2).sum(axis=1)
    return float(np.sqrt(sq).sum()), float(sq.sum()), float(np.abs(diff).sum())


def geometric_median(points, tol: float = 1e-9, max_iter: int = 100_000) -> np.ndarray:
    """Weiszfeld iteration, nudged off data points it lands on."""
    points = np.asarray(points, dtype=float)
    if len(points) == 1:
        return points[0].copy()
    x = points.mean(axis=0)
    scale = max(float(np.abs(points).max()), 1.0)
    rng = np.random.default_rng(0)
    for _ in range(max_iter):
        dist = np.linalg.norm(points - x, axis=1)
        if np.any(dist == 0.0):
            x = x + rng.normal(scale=1e-7 * scale, size=x.shape)
            continue
        w = 1.0 / dist
        nxt = (points * w[:, None]).sum(axis=0) / w.sum()
        if np.linalg.norm(nxt - x) <= tol * scale:
            return nxt
        x = nxt
    return x


def central_points(points) -> dict[str, CentralPoint]:
    """Arithmetic mean, per-axis median, geometric median and Euclidean medoid.

    Each comes with its L2, squared L2 and L1 distance sums over ``points``.
    """
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        raise ValueError("need at least one point")
    if points.ndim != 2:
        raise ValueError("points must be a 2-D array of coordinates")
    l2_sums = [_distance_sums(points, p)[0] for p in points]
    centers = {
        "mean": points.mean(axis=0),
        "median": np.median(points, axis=0),
        "geometric_median": geometric_median(points),
        "medoid": points[int(np.argmin(l2_sums))].copy(),
    }
    return {name: CentralPoint(c, *_distance_sums(points, c)) for name, c in centers.items()}

"""Initial medoid sets: DynBUILD, Random^p and Sparse++."""

from __future__ import annotations

import math
import warnings

import numpy as np

from .core import INF, Assignment, LossPair, SparseCostMatrix
from .swap import SwapState


class InfeasibleError(ValueError):
    """Some demand has no reachable candidate, so full coverage is impossible."""


def _isolated(matrix: SparseCostMatrix, strict: bool) -> list[int]:
    isolated = matrix.isolated_demands()
    if isolated:
        msg = f"{len(isolated)} demand(s) have no reachable candidate (first: {isolated[0]})"
        if strict:
            raise InfeasibleError(msg)
        warnings.warn(msg + "; they stay uncovered", RuntimeWarning, stacklevel=3)
    return isolated


def dyn_build(
    matrix: SparseCostMatrix,
    k: int,
    strict: bool = True,
    trace: list | None = None,
) -> tuple[LossPair, list[int], Assignment]:
    """Greedy BUILD that keeps adding medoids until every demand is covered.

    Returns at least ``k`` medoids (fewer only if ``m < k``). Ties go to the
    lowest candidate id. If ``trace`` is a list, ``(medoid, running loss)``
    is appended after each step.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    m = matrix.n_candidates
    if m < 1:
        raise ValueError("matrix has no candidates")
    n_isolated = len(_isolated(matrix, strict))
    pen = matrix.penalties
    total = matrix.total_penalty()

    best_j, best = -1, None
    for j in range(m):
        covered = math.fsum(pen[o] for o in matrix.fwd_idx[j])
        loss_j = LossPair(total - covered, math.fsum(matrix.fwd_cost[j]))
        if best is None or loss_j < best:
            best_j, best = j, loss_j
    state = SwapState(matrix, [best_j])
    loss = LossPair(state._snap(best.penalty), best.dist)
    if trace is not None:
        trace.append((best_j, loss))

    d1 = state.d1
    while state.k < m and (state.k < k or state.uncovered > n_isolated):
        best_j, best_p, best_d = -1, INF, INF
        for j in range(m):
            if state.slot_of[j] >= 0:
                continue
            dp = 0.0
            dd = 0.0
            for o, c in zip(matrix.fwd_idx[j], matrix.fwd_cost[j]):
                d1o = d1[o]
                if d1o == INF:
                    dp -= pen[o]
                    dd += c
                elif c < d1o:
                    dd += c - d1o
            dp = state._snap(dp)
            if dp < best_p or (dp == best_p and dd < best_d):
                best_j, best_p, best_d = j, dp, dd
        state.add(best_j)
        loss = LossPair(state._snap(loss.penalty + best_p), loss.dist + best_d)
        if trace is not None:
            trace.append((best_j, loss))
    return loss, list(state.medoids), state.assignment()


def random_count(n_candidates: int, fraction_or_count: float | int) -> int:
    """Number of medoids for Random^p: an int is a count, a float a fraction of m."""
    if isinstance(fraction_or_count, (int, np.integer)) and not isinstance(fraction_or_count, bool):
        count = int(fraction_or_count)
    else:
        # round first so that e.g. 0.1 * 30 does not ceil to 4
        count = math.ceil(round(float(fraction_or_count) * n_candidates, 9))
    if not 1 <= count <= n_candidates:
        raise ValueError(f"random init needs between 1 and {n_candidates} medoids, got {count}")
    return count


def random_init(matrix: SparseCostMatrix, fraction_or_count: float | int, rng_seed=None) -> list[int]:
    """Uniform sample of candidates without replacement; coverage is not guaranteed."""
    count = random_count(matrix.n_candidates, fraction_or_count)
    rng = np.random.default_rng(rng_seed)
    return sorted(rng.choice(matrix.n_candidates, size=count, replace=False).tolist())


def sparse_pp(matrix: SparseCostMatrix, k: int, rng_seed=None, strict: bool = True) -> list[int]:
    """k-means++ analogue: draw candidates proportionally to the uncovered penalty mass they reach.

    Drawing continues until at least ``k`` candidates are chosen and every
    coverable demand is covered. Once everything is covered, missing
    centers up to ``k`` are drawn uniformly. Returned in draw order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    m = matrix.n_candidates
    if m < 1:
        raise ValueError("matrix has no candidates")
    n_isolated = len(_isolated(matrix, strict))
    rng = np.random.default_rng(rng_seed)
    pen = matrix.penalties

    weight = np.array([math.fsum(pen[o] for o in matrix.fwd_idx[j]) for j in range(m)])
    count = np.array([len(row) for row in matrix.fwd_idx])
    covered = [False] * matrix.n_demand
    uncovered = matrix.n_demand - n_isolated
    chosen: list[int] = []
    is_chosen = np.zeros(m, dtype=bool)

    while len(chosen) < m and (len(chosen) < k or uncovered > 0):
        if uncovered > 0:
            cum = np.cumsum(weight)
            j = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            if j >= m:
                j = int(np.flatnonzero(weight > 0)[-1])
        else:
            j = int(rng.choice(np.flatnonzero(~is_chosen)))
        chosen.append(j)
        is_chosen[j] = True
        for o in matrix.fwd_idx[j]:
            if covered[o]:
                continue
            covered[o] = True
            uncovered -= 1
            for jj in matrix.rev_idx[o]:
                count[jj] -= 1
                weight[jj] = weight[jj] - pen[o] if count[jj] else 0.0
    return chosen

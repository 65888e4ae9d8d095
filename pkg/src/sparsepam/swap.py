"""DynSWAP local search over a sparse cost matrix.

FasterPAM-style eager swapping with a shared accumulator and cached removal
losses, extended with dynamic removal (down) and addition (up) of medoids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import INF, Assignment, LossPair, SparseCostMatrix, evaluate_loss


class CacheMismatch(AssertionError):
    """Incrementally maintained state disagrees with a full recomputation."""


def _rescan(matrix: SparseCostMatrix, o: int, is_medoid) -> tuple[int, float, float]:
    n1, b1, b2 = -1, INF, INF
    for j, c in zip(matrix.rev_idx[o], matrix.rev_cost[o]):
        if not is_medoid(j):
            continue
        if c < b1:
            n1, b1, b2 = j, c, b1
        elif c < b2:
            b2 = c
    return n1, b1, b2


def refresh_caches(matrix: SparseCostMatrix, medoids: Sequence[int]) -> Assignment:
    """Recompute nearest medoid and the two smallest distances for every demand."""
    members = set(medoids)
    result = Assignment.empty(matrix.n_demand)
    for o in range(matrix.n_demand):
        n1, b1, b2 = _rescan(matrix, o, members.__contains__)
        result.nearest[o] = n1
        result.d1[o] = b1
        result.d2[o] = b2
    return result


def removal_losses(
    matrix: SparseCostMatrix, assignment: Assignment, medoids: Sequence[int]
) -> list[LossPair]:
    """Loss change of removing each medoid on its own, in ``medoids`` order."""
    slot = {m: i for i, m in enumerate(medoids)}
    pen = [[] for _ in medoids]
    dist = [[] for _ in medoids]
    for o, n1 in enumerate(assignment.nearest):
        if n1 < 0:
            continue
        s = slot[n1]
        if assignment.d2[o] == INF:
            pen[s].append(matrix.penalties[o])
            dist[s].append(-assignment.d1[o])
        else:
            dist[s].append(assignment.d2[o] - assignment.d1[o])
    return [LossPair(math.fsum(p), math.fsum(d)) for p, d in zip(pen, dist)]


class SwapState:
    """Mutable medoid set with incrementally maintained caches.

    Removal losses are kept per slot; ``medoids[slot]`` is the candidate id
    and ``slot_of[candidate]`` the inverse (-1 for non-medoids). Removing a
    medoid moves the last slot into the freed one.
    """

    def __init__(self, matrix: SparseCostMatrix, medoids: Sequence[int] = (), debug: bool = False):
        self.matrix = matrix
        self.debug = debug
        m = matrix.n_candidates
        self.medoids: list[int] = []
        self.slot_of = [-1] * m
        a = Assignment.empty(matrix.n_demand)
        self.nearest, self.d1, self.d2 = a.nearest, a.d1, a.d2
        self.rem_pen: list[float] = []
        self.rem_dist: list[float] = []
        # number of demands covered only by the slot; zero means removal is safe
        self.rem_cnt: list[int] = []
        self.loss_pen = matrix.total_penalty()
        self.loss_dist = 0.0
        self.uncovered = matrix.n_demand
        for c in medoids:
            if not 0 <= c < m:
                raise ValueError(f"unknown candidate id {c}")
            if self.slot_of[c] >= 0:
                raise ValueError(f"duplicate medoid {c}")
            self._add(c)
        if self.debug:
            self.check()

    @property
    def k(self) -> int:
        return len(self.medoids)

    @property
    def loss(self) -> LossPair:
        return LossPair(self._snap(self.loss_pen), self.loss_dist)

    def assignment(self) -> Assignment:
        return Assignment(list(self.nearest), list(self.d1), list(self.d2))

    def removal_loss(self, slot: int) -> LossPair:
        return LossPair(self.rem_pen[slot], self.rem_dist[slot])

    def _snap(self, p: float) -> float:
        tol = self.matrix.penalty_tol
        return 0.0 if tol and -tol <= p <= tol else p

    # contribution of demand o to the removal loss of its nearest medoid
    def _contrib(self, o: int, sign: int) -> None:
        s = self.slot_of[self.nearest[o]]
        d2 = self.d2[o]
        if d2 == INF:
            self.rem_pen[s] += sign * self.matrix.penalties[o]
            self.rem_dist[s] -= sign * self.d1[o]
            self.rem_cnt[s] += sign
            if self.rem_cnt[s] == 0:
                self.rem_pen[s] = 0.0
        else:
            self.rem_dist[s] += sign * (d2 - self.d1[o])

    def _add(self, c: int) -> None:
        mat = self.matrix
        self.slot_of[c] = len(self.medoids)
        self.medoids.append(c)
        self.rem_pen.append(0.0)
        self.rem_dist.append(0.0)
        self.rem_cnt.append(0)
        nearest, d1, d2 = self.nearest, self.d1, self.d2
        for o, d in zip(mat.fwd_idx[c], mat.fwd_cost[c]):
            d1o = d1[o]
            if d < d1o:
                if nearest[o] < 0:
                    self.loss_pen -= mat.penalties[o]
                    self.uncovered -= 1
                    self.loss_dist += d
                else:
                    self._contrib(o, -1)
                    self.loss_dist += d - d1o
                nearest[o], d1[o], d2[o] = c, d, d1o
                self._contrib(o, +1)
            elif d < d2[o]:
                self._contrib(o, -1)
                d2[o] = d
                self._contrib(o, +1)
        if self.uncovered == 0:
            self.loss_pen = 0.0

    def _remove(self, slot: int) -> int:
        mat = self.matrix
        r = self.medoids[slot]
        nearest, d1, d2 = self.nearest, self.d1, self.d2
        affected = [
            o
            for o, d in zip(mat.fwd_idx[r], mat.fwd_cost[r])
            if nearest[o] == r or d <= d2[o]
        ]
        for o in affected:
            if nearest[o] != r:
                self._contrib(o, -1)
        last = len(self.medoids) - 1
        moved = self.medoids[last]
        self.medoids[slot] = moved
        self.slot_of[moved] = slot
        self.rem_pen[slot] = self.rem_pen[last]
        self.rem_dist[slot] = self.rem_dist[last]
        self.rem_cnt[slot] = self.rem_cnt[last]
        del self.medoids[last], self.rem_pen[last], self.rem_dist[last], self.rem_cnt[last]
        self.slot_of[r] = -1

        slot_of = self.slot_of
        for o in affected:
            old = d1[o]
            n1, b1, b2 = _rescan(mat, o, lambda j: slot_of[j] >= 0)
            if b1 == INF:
                self.loss_pen += mat.penalties[o]
                self.uncovered += 1
                self.loss_dist -= old
            else:
                self.loss_dist += b1 - old
            nearest[o], d1[o], d2[o] = n1, b1, b2
            if n1 >= 0:
                self._contrib(o, +1)
        if self.uncovered == 0:
            self.loss_pen = 0.0
        return r

    def add(self, c: int) -> None:
        """Make candidate ``c`` an additional medoid."""
        if self.slot_of[c] >= 0:
            raise ValueError(f"candidate {c} already is a medoid")
        self._add(c)
        if self.debug:
            self.check()

    def remove(self, slot: int) -> int:
        """Remove the medoid in ``slot``; returns its candidate id."""
        r = self._remove(slot)
        if self.debug:
            self.check()
        return r

    def swap(self, slot: int, c: int) -> int:
        """Replace the medoid in ``slot`` by ``c``, which takes over the slot."""
        if self.slot_of[c] >= 0:
            raise ValueError(f"candidate {c} already is a medoid")
        self._add(c)
        r = self._remove(slot)
        if self.debug:
            self.check()
        return r

    def evaluate_candidate(self, c: int) -> tuple[int, float, float, float, float]:
        """Best swap for non-medoid ``c``.

        Returns ``(slot, swap_pen, swap_dist, add_pen, add_dist)`` where the
        swap pair is the loss change of replacing ``medoids[slot]`` by ``c``
        and the add pair (the shared accumulator) that of adding ``c``.
        """
        mat = self.matrix
        pen = mat.penalties
        nearest, d1, d2, slot_of = self.nearest, self.d1, self.d2, self.slot_of
        dp = self.rem_pen[:]
        dd = self.rem_dist[:]
        acc_p = 0.0
        acc_d = 0.0
        for o, doc in zip(mat.fwd_idx[c], mat.fwd_cost[c]):
            d1o = d1[o]
            if d1o == INF:
                acc_p -= pen[o]
                acc_d += doc
            elif doc < d1o:
                acc_d += doc - d1o
                s = slot_of[nearest[o]]
                d2o = d2[o]
                if d2o == INF:
                    dp[s] -= pen[o]
                    dd[s] += d1o
                else:
                    dd[s] += d1o - d2o
            else:
                d2o = d2[o]
                if d2o == INF:
                    s = slot_of[nearest[o]]
                    dp[s] -= pen[o]
                    dd[s] += doc
                elif doc < d2o:
                    dd[slot_of[nearest[o]]] += doc - d2o
        snap = self._snap
        tol = mat.dist_tol
        best = -1
        bp = bd = INF
        for i in range(len(dp)):
            p = snap(dp[i])
            if p < bp or (p == bp and dd[i] < bd - tol):
                best, bp, bd = i, p, dd[i]
        if best < 0:
            return -1, INF, INF, snap(acc_p), acc_d
        return best, snap(bp + acc_p), bd + acc_d, snap(acc_p), acc_d

    def best_removal(self) -> int:
        """Slot with the lexicographically smallest removal loss (lowest slot on near-ties)."""
        tol = self.matrix.dist_tol
        best = 0
        for i in range(1, len(self.medoids)):
            p, bp = self.rem_pen[i], self.rem_pen[best]
            if p < bp or (p == bp and self.rem_dist[i] < self.rem_dist[best] - tol):
                best = i
        return best

    def check(self, rel_tol: float = 1e-9) -> None:
        """Compare every cache with a from-scratch recomputation."""
        mat = self.matrix
        ref = refresh_caches(mat, self.medoids)
        for o in range(mat.n_demand):
            if ref.d1[o] != self.d1[o] or ref.d2[o] != self.d2[o]:
                raise CacheMismatch(
                    f"demand {o}: cached ({self.d1[o]}, {self.d2[o]}) != ({ref.d1[o]}, {ref.d2[o]})"
                )
            n1 = self.nearest[o]
            if (n1 < 0) != (ref.nearest[o] < 0):
                raise CacheMismatch(f"demand {o}: nearest {n1} vs {ref.nearest[o]}")
            if n1 >= 0:
                if self.slot_of[n1] < 0:
                    raise CacheMismatch(f"demand {o}: nearest {n1} is not a medoid")
                cost = dict(mat.reverse(o)).get(n1)
                if cost != self.d1[o]:
                    raise CacheMismatch(f"demand {o}: nearest {n1} is at {cost}, not {self.d1[o]}")
        for s, c in enumerate(self.medoids):
            if self.slot_of[c] != s:
                raise CacheMismatch(f"slot map broken for medoid {c}")
        if sum(1 for s in self.slot_of if s >= 0) != len(self.medoids):
            raise CacheMismatch("slot map has stale entries")

        scale = max(1.0, math.fsum(abs(d) for d in ref.d1 if d != INF))
        expected = removal_losses(mat, self.assignment(), self.medoids)
        for s, exp in enumerate(expected):
            got = self.removal_loss(s)
            if self._snap(got.penalty - exp.penalty) != 0.0:
                raise CacheMismatch(f"slot {s}: removal penalty {got.penalty} != {exp.penalty}")
            if not math.isclose(got.dist, exp.dist, rel_tol=rel_tol, abs_tol=rel_tol * scale):
                raise CacheMismatch(f"slot {s}: removal dist {got.dist} != {exp.dist}")
        loss = evaluate_loss(mat, self.medoids)
        if self._snap(self.loss_pen - loss.penalty) != 0.0:
            raise CacheMismatch(f"loss penalty {self.loss_pen} != {loss.penalty}")
        if not math.isclose(self.loss_dist, loss.dist, rel_tol=rel_tol, abs_tol=rel_tol * scale):
            raise CacheMismatch(f"loss dist {self.loss_dist} != {loss.dist}")


@dataclass
class SwapConfig:
    allow_decrease: bool = False
    allow_increase: bool = False
    seed: int | None = 0
    max_sweeps: int = 100
    debug: bool = False
    record_history: bool = False

    @classmethod
    def from_variant(cls, variant: str, **kwargs) -> SwapConfig:
        """``variant`` is one of ``none``, ``down``, ``up``, ``both``."""
        flags = {
            "none": (False, False),
            "down": (True, False),
            "up": (False, True),
            "both": (True, True),
        }
        if variant not in flags:
            raise ValueError(f"unknown swap variant {variant!r}; expected one of {sorted(flags)}")
        down, up = flags[variant]
        return cls(allow_decrease=down, allow_increase=up, **kwargs)


@dataclass
class SwapStats:
    sweeps: int = 0
    swaps: int = 0
    removals: int = 0
    additions: int = 0
    evaluations: int = 0
    truncated: bool = False
    last_change: int = -1
    # (event, k, penalty, dist) after every change; only with record_history
    history: list[tuple[str, int, float, float]] = field(default_factory=list)

    @property
    def medoid_changes(self) -> int:
        return self.swaps + self.removals + self.additions


def dyn_swap(
    matrix: SparseCostMatrix,
    initial_medoids: Sequence[int],
    config: SwapConfig | None = None,
) -> tuple[LossPair, list[int], Assignment, SwapStats]:
    """Run DynSWAP from ``initial_medoids``.

    Candidates are visited in a fresh seeded permutation per sweep. The
    search stops once every non-medoid has been evaluated without a change
    since the last change, or after ``config.max_sweeps`` sweeps (then
    ``stats.truncated`` is set).
    """
    config = config or SwapConfig()
    if len(initial_medoids) == 0:
        raise ValueError("dyn_swap needs at least one initial medoid")
    state = SwapState(matrix, initial_medoids, debug=config.debug)
    stats = SwapStats()
    rng = np.random.default_rng(config.seed)
    m = matrix.n_candidates

    def record(event):
        if config.record_history:
            stats.history.append((event, state.k, state._snap(state.loss_pen), state.loss_dist))

    record("start")
    # checked[c] == version: c was evaluated since the last change
    checked = [-1] * m
    version = 0
    n_checked = 0
    converged = False
    while not converged:
        if state.k == m:
            converged = True
            break
        if stats.sweeps >= config.max_sweeps:
            stats.truncated = True
            break
        stats.sweeps += 1
        for c in rng.permutation(m).tolist():
            if state.slot_of[c] >= 0 or checked[c] == version:
                continue
            stats.evaluations += 1
            slot, sp, sd, ap, ad = state.evaluate_candidate(c)
            if slot >= 0 and (sp < 0 or (sp == 0 and sd < -matrix.dist_tol)):
                state.swap(slot, c)
                stats.swaps += 1
                record("swap")
                if config.allow_decrease and state.k > 1:
                    r = state.best_removal()
                    if state.rem_cnt[r] == 0:
                        state.remove(r)
                        stats.removals += 1
                        record("remove")
            elif config.allow_increase and ap < 0:
                state.add(c)
                stats.additions += 1
                record("add")
            else:
                checked[c] = version
                n_checked += 1
                if n_checked >= m - state.k:
                    converged = True
                    break
                continue
            version += 1
            n_checked = 0
            stats.last_change = c
            if state.k == m:
                converged = True
                break
    # report the distance re-summed from the assignment, free of incremental drift
    loss = LossPair(state._snap(state.loss_pen), math.fsum(d for d in state.d1 if d != INF))
    return loss, list(state.medoids), state.assignment(), stats

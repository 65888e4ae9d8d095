"""Loss pairs and the sparse bipartite cost matrix.

Demands are indexed ``0..N-1`` and candidate facilities ``0..m-1``. A missing
entry between a demand and a candidate means the cost is infinite.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

INF = math.inf


@dataclass(frozen=True, order=True, slots=True)
class LossPair:
    """Two-component loss ``(penalty, dist)`` ordered lexicographically.

    Mathematically the loss is ``penalty * pi + dist`` with ``pi -> inf``;
    keeping the components apart avoids the overflow.
    """

    penalty: float = 0.0
    dist: float = 0.0

    def __post_init__(self):
        if math.isnan(self.penalty) or math.isnan(self.dist):
            raise ValueError(f"NaN in loss pair ({self.penalty}, {self.dist})")

    def __add__(self, other: LossPair) -> LossPair:
        return LossPair(self.penalty + other.penalty, self.dist + other.dist)

    def __sub__(self, other: LossPair) -> LossPair:
        return LossPair(self.penalty - other.penalty, self.dist - other.dist)

    def __neg__(self) -> LossPair:
        return LossPair(-self.penalty, -self.dist)

    def as_tuple(self) -> tuple[float, float]:
        return (self.penalty, self.dist)


ZERO = LossPair(0.0, 0.0)


def loss_compare(a: LossPair, b: LossPair) -> int:
    """Return -1, 0 or 1 as ``a`` is less than, equal to or greater than ``b``."""
    if a.penalty != b.penalty:
        return -1 if a.penalty < b.penalty else 1
    if a.dist != b.dist:
        return -1 if a.dist < b.dist else 1
    return 0


DIST_RTOL = 1e-12


def distance_tolerance(row_maxima) -> float:
    """Smallest distance change treated as real: a tiny fraction of the largest possible loss.

    Incrementally maintained sums drift by a few ulps, so improvements and
    argmin ties below this are considered zero.
    """
    return DIST_RTOL * math.fsum(row_maxima)


class SparseCostMatrix:
    """Bipartite demand/candidate costs, stored from both sides.

    ``fwd_idx[j]``/``fwd_cost[j]`` hold the demands reachable from candidate
    ``j`` and ``rev_idx[o]``/``rev_cost[o]`` the candidates reachable from
    demand ``o``; both sorted by neighbor id. Treat instances as immutable.
    """

    __slots__ = (
        "n_demand",
        "n_candidates",
        "fwd_idx",
        "fwd_cost",
        "rev_idx",
        "rev_cost",
        "penalties",
        "penalty_tol",
        "dist_tol",
    )

    def __init__(self, n_demand, n_candidates, fwd_idx, fwd_cost, rev_idx, rev_cost, penalties):
        self.n_demand = n_demand
        self.n_candidates = n_candidates
        self.fwd_idx = fwd_idx
        self.fwd_cost = fwd_cost
        self.rev_idx = rev_idx
        self.rev_cost = rev_cost
        self.penalties = penalties
        # Integer-valued penalties sum exactly in floating point; otherwise
        # absorb rounding residue when testing a penalty component for zero.
        if all(float(p).is_integer() for p in penalties):
            self.penalty_tol = 0.0
        else:
            self.penalty_tol = 1e-9 * math.fsum(penalties)
        self.dist_tol = distance_tolerance(max(row) for row in rev_cost if row)

    @property
    def nnz(self) -> int:
        return sum(len(row) for row in self.fwd_idx)

    @property
    def sparsity(self) -> float:
        """Fraction of demand/candidate pairs without a stored cost."""
        total = self.n_demand * self.n_candidates
        return 1.0 - self.nnz / total if total else 1.0

    def forward(self, j: int) -> list[tuple[int, float]]:
        return list(zip(self.fwd_idx[j], self.fwd_cost[j]))

    def reverse(self, o: int) -> list[tuple[int, float]]:
        return list(zip(self.rev_idx[o], self.rev_cost[o]))

    def entries(self) -> list[tuple[int, int, float]]:
        return [
            (o, j, c)
            for j in range(self.n_candidates)
            for o, c in zip(self.fwd_idx[j], self.fwd_cost[j])
        ]

    def isolated_demands(self) -> list[int]:
        """Demands with no reachable candidate; they can never be covered."""
        return [o for o in range(self.n_demand) if not self.rev_idx[o]]

    def total_penalty(self) -> float:
        return math.fsum(self.penalties)

    def to_dense(self):
        """Return an ``N x m`` numpy array padded with ``inf``."""
        import numpy as np

        dense = np.full((self.n_demand, self.n_candidates), INF)
        for o, j, c in self.entries():
            dense[o, j] = c
        return dense

    def __repr__(self):
        return f"SparseCostMatrix(N={self.n_demand}, m={self.n_candidates}, nnz={self.nnz})"


def build_matrix(
    entries: Iterable[tuple[int, int, float]],
    n_demand: int,
    n_candidates: int,
    penalties: Sequence[float] | None = None,
) -> SparseCostMatrix:
    """Build a :class:`SparseCostMatrix` from ``(demand, candidate, cost)`` triples.

    Duplicate pairs and negative or non-finite costs are rejected.
    """
    if n_demand < 0 or n_candidates < 0:
        raise ValueError("sizes must be nonnegative")
    if penalties is None:
        penalties = [1.0] * n_demand
    penalties = tuple(float(p) for p in penalties)
    if len(penalties) != n_demand:
        raise ValueError(f"expected {n_demand} penalties, got {len(penalties)}")
    for o, p in enumerate(penalties):
        if not (p > 0 and math.isfinite(p)):
            raise ValueError(f"penalty of demand {o} must be finite and > 0, got {p}")

    fwd: list[list[tuple[int, float]]] = [[] for _ in range(n_candidates)]
    rev: list[list[tuple[int, float]]] = [[] for _ in range(n_demand)]
    seen = set()
    for o, j, c in entries:
        o, j, c = int(o), int(j), float(c)
        if not 0 <= o < n_demand:
            raise ValueError(f"demand index {o} out of range [0, {n_demand})")
        if not 0 <= j < n_candidates:
            raise ValueError(f"candidate index {j} out of range [0, {n_candidates})")
        if not math.isfinite(c) or c < 0:
            raise ValueError(f"cost for ({o}, {j}) must be finite and >= 0, got {c}")
        if (o, j) in seen:
            raise ValueError(f"duplicate entry for demand {o}, candidate {j}")
        seen.add((o, j))
        fwd[j].append((o, c))
        rev[o].append((j, c))

    for row in fwd:
        row.sort()
    for row in rev:
        row.sort()
    return SparseCostMatrix(
        n_demand,
        n_candidates,
        tuple(tuple(o for o, _ in row) for row in fwd),
        tuple(tuple(c for _, c in row) for row in fwd),
        tuple(tuple(j for j, _ in row) for row in rev),
        tuple(tuple(c for _, c in row) for row in rev),
        penalties,
    )


def from_dense(dense, penalties=None) -> SparseCostMatrix:
    """Build a matrix from a 2-D array; ``inf`` entries are left out."""
    entries = []
    for o, row in enumerate(dense):
        for j, c in enumerate(row):
            if math.isfinite(c):
                entries.append((o, j, float(c)))
    n_demand = len(dense)
    n_candidates = len(dense[0]) if n_demand else 0
    return build_matrix(entries, n_demand, n_candidates, penalties)


def _check_medoids(matrix: SparseCostMatrix, medoids) -> set[int]:
    checked = set()
    for j in medoids:
        try:
            j = operator.index(j)
        except TypeError:
            raise ValueError(f"unknown candidate id {j!r}") from None
        if not 0 <= j < matrix.n_candidates:
            raise ValueError(f"unknown candidate id {j!r}")
        checked.add(j)
    return checked


def evaluate_loss(matrix: SparseCostMatrix, medoids: Iterable[int]) -> LossPair:
    """Compute the loss of a medoid set from scratch."""
    medoids = _check_medoids(matrix, medoids)
    penalty = []
    dist = []
    for o in range(matrix.n_demand):
        best = INF
        for j, c in zip(matrix.rev_idx[o], matrix.rev_cost[o]):
            if c < best and j in medoids:
                best = c
        if best == INF:
            penalty.append(matrix.penalties[o])
        else:
            dist.append(best)
    return LossPair(math.fsum(penalty), math.fsum(dist))


@dataclass
class Assignment:
    """Per-demand nearest medoid and nearest/second-nearest distances.

    ``nearest[o]`` is a candidate id or -1 when ``o`` is uncovered.
    """

    nearest: list[int]
    d1: list[float]
    d2: list[float]

    @classmethod
    def empty(cls, n_demand: int) -> Assignment:
        return cls([-1] * n_demand, [INF] * n_demand, [INF] * n_demand)

    def copy(self) -> Assignment:
        return Assignment(list(self.nearest), list(self.d1), list(self.d2))

    def loss(self, matrix: SparseCostMatrix) -> LossPair:
        pen = math.fsum(p for p, d in zip(matrix.penalties, self.d1) if d == INF)
        dist = math.fsum(d for d in self.d1 if d != INF)
        return LossPair(pen, dist)


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def read_matrix(path: str | Path, penalties_path: str | Path | None = None) -> SparseCostMatrix:
    """Read the text format: header ``N m nnz`` then ``demand candidate cost`` lines."""
    lines = _data_lines(path)
    try:
        _, header = next(lines)
    except StopIteration:
        raise ValueError(f"{path}: missing header line") from None
    if len(header) != 3:
        raise ValueError(f"{path}: header must be 'N m nnz'")
    n_demand, n_candidates, nnz = (int(x) for x in header)
    entries = []
    for lineno, fields in lines:
        if len(fields) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'demand candidate cost'")
        entries.append((int(fields[0]), int(fields[1]), float(fields[2])))
    if len(entries) != nnz:
        raise ValueError(f"{path}: header announces {nnz} entries, found {len(entries)}")
    penalties = read_penalties(penalties_path, n_demand) if penalties_path else None
    return build_matrix(entries, n_demand, n_candidates, penalties)


def read_penalties(path: str | Path, n_demand: int) -> list[float]:
    """Read ``demand pi`` lines; demands not listed keep penalty 1.0."""
    penalties = [1.0] * n_demand
    for lineno, fields in _data_lines(path):
        if len(fields) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'demand pi'")
        o = int(fields[0])
        if not 0 <= o < n_demand:
            raise ValueError(f"{path}:{lineno}: demand {o} out of range")
        penalties[o] = float(fields[1])
    return penalties


def write_matrix(matrix: SparseCostMatrix, path: str | Path, comments: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(f"{matrix.n_demand}\t{matrix.n_candidates}\t{matrix.nnz}\n")
        for o in range(matrix.n_demand):
            for j, c in zip(matrix.rev_idx[o], matrix.rev_cost[o]):
                fh.write(f"{o}\t{j}\t{c!r}\n")


def write_penalties(matrix: SparseCostMatrix, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for o, p in enumerate(matrix.penalties):
            fh.write(f"{o}\t{p!r}\n")

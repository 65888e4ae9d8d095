"""Street-network style graphs and their truncated demand/candidate cost matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .core import SparseCostMatrix, build_matrix

Node = Hashable


@dataclass
class InstanceGraph:
    """Undirected weighted graph with demand loads and candidate markers.

    ``nodes`` fixes the node order; ``coords`` is only used for plotting.
    """

    nodes: list[Node] = field(default_factory=list)
    coords: dict[Node, tuple[float, float]] = field(default_factory=dict)
    edges: list[tuple[Node, Node, float]] = field(default_factory=list)
    loads: dict[Node, float] = field(default_factory=dict)
    candidates: set[Node] = field(default_factory=set)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ValueError("duplicate node ids")
        for u, v, length in self.edges:
            if u not in known or v not in known:
                raise ValueError(f"edge ({u}, {v}) references an unknown node")
            if not (math.isfinite(length) and length > 0):
                raise ValueError(f"edge ({u}, {v}) needs a finite positive length, got {length}")
        for node, load in self.loads.items():
            if node not in known:
                raise ValueError(f"demand marker on unknown node {node}")
            if not (math.isfinite(load) and load > 0):
                raise ValueError(f"demand {node} needs a finite positive load, got {load}")
        for node in self.candidates:
            if node not in known:
                raise ValueError(f"candidate marker on unknown node {node}")

    @property
    def demands(self) -> list[Node]:
        """Demand nodes in node order."""
        return [v for v in self.nodes if v in self.loads]

    def index(self) -> dict[Node, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    def degrees(self) -> dict[Node, int]:
        """Number of distinct neighbors (self-loops ignored)."""
        nbrs: dict[Node, set] = {v: set() for v in self.nodes}
        for u, v, _ in self.edges:
            if u != v:
                nbrs[u].add(v)
                nbrs[v].add(u)
        return {v: len(s) for v, s in nbrs.items()}

    def adjacency(self):
        """Symmetric CSR adjacency; parallel edges keep their shortest length."""
        idx = self.index()
        best: dict[tuple[int, int], float] = {}
        for u, v, length in self.edges:
            a, b = idx[u], idx[v]
            if a == b:
                continue
            key = (min(a, b), max(a, b))
            if key not in best or length < best[key]:
                best[key] = length
        n = len(self.nodes)
        if not best:
            return coo_matrix((n, n)).tocsr()
        (rows, cols), vals = zip(*best.keys()), list(best.values())
        return coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def select_candidates(graph: InstanceGraph, min_degree: int = 3) -> set[Node]:
    """Nodes with at least ``min_degree`` neighbors.

    A connected component that holds demand but no such node contributes its
    highest-degree node (first in node order on ties), so disconnected
    demand remains coverable.
    """
    deg = graph.degrees()
    chosen = {v for v in graph.nodes if deg[v] >= min_degree}
    if not graph.nodes:
        return chosen
    _, label = connected_components(graph.adjacency(), directed=False)
    seen_ok = {label[i] for i, v in enumerate(graph.nodes) if v in chosen}
    fallback: dict[int, Node] = {}
    for i, v in enumerate(graph.nodes):
        comp = label[i]
        if comp in seen_ok:
            continue
        if comp not in fallback or deg[v] > deg[fallback[comp]]:
            fallback[comp] = v
    demand_comps = {label[i] for i, v in enumerate(graph.nodes) if v in graph.loads}
    chosen.update(v for comp, v in fallback.items() if comp in demand_comps)
    return chosen


def truncated_costs(
    graph: InstanceGraph,
    candidates: Sequence[Node],
    demands: Sequence[Node] | None = None,
    max_cost: float = math.inf,
    load_weighted: bool = False,
    penalties: Sequence[float] | None = None,
    chunk: int = 256,
) -> SparseCostMatrix:
    """Shortest-path costs from each candidate to each demand, cut at ``max_cost``.

    Entry ``(o, j)`` exists iff the path length is at most ``max_cost``; its
    value is the length, times the demand's load if ``load_weighted``.
    Indices follow the order of ``demands`` (default: graph demand order)
    and ``candidates``.
    """
    if not max_cost > 0:
        raise ValueError(f"max_cost must be > 0, got {max_cost}")
    if demands is None:
        demands = graph.demands
    idx = graph.index()
    cand_idx = np.array([idx[c] for c in candidates], dtype=np.intp)
    dem_idx = np.array([idx[d] for d in demands], dtype=np.intp)
    loads = np.array([graph.loads.get(d, 1.0) for d in demands])
    adj = graph.adjacency()
    # scipy's limit is not documented as inclusive; widen it and filter exactly
    limit = np.nextafter(max_cost, np.inf) if math.isfinite(max_cost) else np.inf

    entries = []
    for start in range(0, len(cand_idx), chunk):
        block = cand_idx[start : start + chunk]
        dist = dijkstra(adj, directed=False, indices=block, limit=limit)[:, dem_idx]
        for row, sp in enumerate(dist):
            j = start + row
            (hits,) = np.nonzero(sp <= max_cost)
            cost = sp[hits] * loads[hits] if load_weighted else sp[hits]
            entries.extend(zip(hits.tolist(), [j] * len(hits), cost.tolist()))
    return build_matrix(entries, len(demands), len(cand_idx), penalties)


def synth_grid(
    width: int,
    height: int,
    demand_density: float,
    seed=None,
    subdivisions: int = 0,
    spacing: float = 100.0,
    jitter: float = 0.2,
    prune: float = 0.15,
    load_sigma: float = 0.5,
) -> InstanceGraph:
    """Jittered street lattice with houses as demand.

    Intersections sit on a ``width x height`` lattice, displaced by up to
    ``jitter * spacing``. A random spanning tree of the streets is always
    kept; other streets are dropped with probability ``prune`` unless that
    leaves an endpoint with fewer than two streets. Each street is split
    by ``subdivisions`` intermediate nodes. Every node becomes a demand with
    probability ``demand_density`` and a log-normal load.

    The street layout depends only on the size parameters and ``seed``, so
    varying ``demand_density`` keeps the same streets.
    """
    if width < 2 or height < 2:
        raise ValueError("width and height must be >= 2")
    if not 0 <= demand_density <= 1:
        raise ValueError("demand_density must be in [0, 1]")
    if not 0 <= jitter < 0.5:
        raise ValueError("jitter must be in [0, 0.5)")
    rng = np.random.default_rng(seed)
    n = width * height
    offs = rng.uniform(-jitter, jitter, size=(n, 2)) * spacing
    coords = {
        y * width + x: (
            float(x * spacing + offs[y * width + x, 0]),
            float(y * spacing + offs[y * width + x, 1]),
        )
        for y in range(height)
        for x in range(width)
    }
    streets = [(y * width + x, y * width + x + 1) for y in range(height) for x in range(width - 1)]
    streets += [(y * width + x, (y + 1) * width + x) for y in range(height - 1) for x in range(width)]

    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    order = rng.permutation(len(streets))
    in_tree = np.zeros(len(streets), dtype=bool)
    for e in order:
        a, b = find(streets[e][0]), find(streets[e][1])
        if a != b:
            parent[a] = b
            in_tree[e] = True
    deg = np.zeros(n, dtype=int)
    for u, v in streets:
        deg[u] += 1
        deg[v] += 1
    drop = rng.random(len(streets)) < prune
    kept = []
    for e in order:
        u, v = streets[e]
        if drop[e] and not in_tree[e] and deg[u] > 2 and deg[v] > 2:
            deg[u] -= 1
            deg[v] -= 1
            continue
        kept.append((u, v))
    kept.sort()

    nodes = list(range(n))
    edges = []
    next_id = n
    for u, v in kept:
        (x0, y0), (x1, y1) = coords[u], coords[v]
        chain = [u]
        for s in range(1, subdivisions + 1):
            t = s / (subdivisions + 1)
            coords[next_id] = (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
            nodes.append(next_id)
            chain.append(next_id)
            next_id += 1
        chain.append(v)
        for a, b in zip(chain, chain[1:]):
            (ax, ay), (bx, by) = coords[a], coords[b]
            edges.append((a, b, math.hypot(bx - ax, by - ay)))

    is_demand = rng.random(len(nodes)) < demand_density
    load = rng.lognormal(0.0, load_sigma, size=len(nodes))
    loads = {v: float(load[i]) for i, v in enumerate(nodes) if is_demand[i]}
    return InstanceGraph(nodes=nodes, coords=coords, edges=edges, loads=loads)


def read_graph(path: str | Path) -> InstanceGraph:
    """Parse ``node``/``edge``/``demand``/``candidate`` lines; ``#`` starts a comment."""
    nodes, coords, edges, loads, cands = [], {}, [], {}, set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split("#", 1)[0].split()
            if not fields:
                continue
            kind, args = fields[0], fields[1:]
            try:
                if kind == "node" and len(args) in (1, 3):
                    nodes.append(args[0])
                    if len(args) == 3:
                        coords[args[0]] = (float(args[1]), float(args[2]))
                elif kind == "edge" and len(args) == 3:
                    edges.append((args[0], args[1], float(args[2])))
                elif kind == "demand" and len(args) == 2:
                    loads[args[0]] = float(args[1])
                elif kind == "candidate" and len(args) == 1:
                    cands.add(args[0])
                else:
                    raise ValueError(f"cannot parse {line.strip()!r}")
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return InstanceGraph(nodes, coords, edges, loads, cands)


def write_graph(graph: InstanceGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for v in graph.nodes:
            if v in graph.coords:
                x, y = graph.coords[v]
                fh.write(f"node {v} {float(x)!r} {float(y)!r}\n")
            else:
                fh.write(f"node {v}\n")
        for u, v, length in graph.edges:
            fh.write(f"edge {u} {v} {float(length)!r}\n")
        for v in graph.demands:
            fh.write(f"demand {v} {float(graph.loads[v])!r}\n")
        for v in graph.nodes:
            if v in graph.candidates:
                fh.write(f"candidate {v}\n")

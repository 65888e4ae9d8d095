"""Seeded restart experiments and max-cost sweeps, with JSON/text/TSV output."""

from __future__ import annotations

import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .core import SparseCostMatrix
from .graphgen import InstanceGraph, select_candidates, truncated_costs
from .initialize import InfeasibleError, dyn_build, random_init, sparse_pp
from .reference import MAX_BRUTE_FORCE_CANDIDATES, brute_force
from .swap import SwapConfig, dyn_swap

SCHEMA = "sparsepam.report/1"


@dataclass
class RunReport:
    init: str
    variant: str
    seed: int
    k_after_init: int = 0
    k_after_swap: int = 0
    penalty: float = math.inf
    dist: float = math.inf
    medoid_changes: int = 0
    swaps: int = 0
    removals: int = 0
    additions: int = 0
    sweeps: int = 0
    truncated: bool = False
    init_time_ms: float = 0.0
    swap_time_ms: float = 0.0
    feasible: bool = False
    medoids: list[int] = field(default_factory=list)
    error: str | None = None


@dataclass
class ExperimentPlan:
    inits: Sequence[str] = ("dynbuild",)
    variants: Sequence[str] = ("down",)
    restarts: int = 10
    seed: int = 0
    k: int = 1
    max_sweeps: int = 100
    strict: bool = True
    threads: int = 1


def parse_init(spec: str) -> tuple[str, float | None]:
    """``dynbuild``, ``sparsepp`` or ``random:<percent>``."""
    if spec in ("dynbuild", "sparsepp"):
        return spec, None
    if spec.startswith("random:"):
        pct = float(spec.split(":", 1)[1])
        if not 0 < pct <= 100:
            raise ValueError(f"random percentage must be in (0, 100], got {pct}")
        return "random", pct / 100.0
    raise ValueError(f"unknown init {spec!r}; expected dynbuild, sparsepp or random:<percent>")


def initial_medoids(matrix: SparseCostMatrix, init: str, k: int, seed: int, strict: bool = True) -> list[int]:
    name, frac = parse_init(init)
    if name == "dynbuild":
        return dyn_build(matrix, k, strict=strict)[1]
    if name == "sparsepp":
        return sparse_pp(matrix, k, np.random.SeedSequence([seed, 0]), strict=strict)
    if strict and matrix.isolated_demands():
        raise InfeasibleError(f"{len(matrix.isolated_demands())} demand(s) have no reachable candidate")
    return random_init(matrix, frac, np.random.SeedSequence([seed, 0]))


def run_cell(
    matrix: SparseCostMatrix,
    init: str,
    variant: str,
    seed: int,
    k: int = 1,
    max_sweeps: int = 100,
    strict: bool = True,
    start: Sequence[int] | None = None,
) -> RunReport:
    """One initialization plus DynSWAP run. Errors are recorded, not raised.

    ``start`` replaces the initialization (warm start).
    """
    report = RunReport(init, variant, seed)
    try:
        t0 = time.perf_counter()
        med = list(start) if start is not None else initial_medoids(matrix, init, k, seed, strict)
        t1 = time.perf_counter()
        config = SwapConfig.from_variant(
            variant, seed=np.random.SeedSequence([seed, 1]), max_sweeps=max_sweeps
        )
        loss, final, _, stats = dyn_swap(matrix, med, config)
        t2 = time.perf_counter()
    except Exception as exc:  # noqa: BLE001 - per-cell failures must not abort a sweep
        report.error = f"{type(exc).__name__}: {exc}"
        return report
    report.k_after_init = len(med)
    report.k_after_swap = len(final)
    report.penalty, report.dist = loss.penalty, loss.dist
    report.medoid_changes = stats.medoid_changes
    report.swaps, report.removals, report.additions = stats.swaps, stats.removals, stats.additions
    report.sweeps, report.truncated = stats.sweeps, stats.truncated
    report.init_time_ms = (t1 - t0) * 1e3
    report.swap_time_ms = (t2 - t1) * 1e3
    report.feasible = loss.penalty == 0
    report.medoids = sorted(final)
    return report


def _run_cell_args(args):
    return run_cell(*args)


def run_experiment(matrix: SparseCostMatrix, plan: ExperimentPlan) -> list[RunReport]:
    """Cross product of inits x variants x restarts; restart r uses seed ``plan.seed + r``.

    Output order is (init, variant, restart) regardless of ``plan.threads``.
    """
    for init in plan.inits:
        parse_init(init)
    for variant in plan.variants:
        SwapConfig.from_variant(variant)
    cells = [
        (matrix, init, variant, plan.seed + r, plan.k, plan.max_sweeps, plan.strict)
        for init in plan.inits
        for variant in plan.variants
        for r in range(plan.restarts)
    ]
    if plan.threads > 1:
        with ProcessPoolExecutor(max_workers=plan.threads) as pool:
            return list(pool.map(_run_cell_args, cells))
    return [run_cell(*cell) for cell in cells]


AGG_COLUMNS = ("k_after_init", "k_after_swap", "dist", "init_time_ms", "swap_time_ms", "medoid_changes")


def aggregate(reports: Sequence[RunReport]) -> list[dict]:
    """avg/min/max per (init, variant) cell plus success rate."""
    groups: dict[tuple[str, str], list[RunReport]] = {}
    for r in reports:
        groups.setdefault((r.init, r.variant), []).append(r)
    rows = []
    for (init, variant), runs in groups.items():
        ok = [r for r in runs if r.error is None]
        row = {
            "init": init,
            "variant": variant,
            "runs": len(runs),
            "errors": len(runs) - len(ok),
            "success": sum(r.feasible for r in runs) / len(runs),
        }
        for col in AGG_COLUMNS:
            vals = [getattr(r, col) for r in ok]
            if col == "dist":
                vals = [v for r, v in zip(ok, vals) if r.feasible]
            if vals:
                row[col] = {"avg": statistics.fmean(vals), "min": min(vals), "max": max(vals)}
            else:
                row[col] = None
        rows.append(row)
    return rows


def format_table(rows: Sequence[dict]) -> str:
    """Aligned text table, one line per (init, variant) cell."""
    head = ["init", "swap", "k init", "k swap", "init ms", "swap ms", "changes", "dist", "success"]
    lines = [head]

    def avg(row, col, fmt="{:.1f}"):
        v = row.get(col)
        return fmt.format(v["avg"]) if v else "-"

    for row in rows:
        lines.append(
            [
                row["init"],
                row["variant"],
                avg(row, "k_after_init"),
                avg(row, "k_after_swap"),
                avg(row, "init_time_ms"),
                avg(row, "swap_time_ms"),
                avg(row, "medoid_changes"),
                avg(row, "dist", "{:.6g}"),
                f"{100 * row['success']:.0f}%",
            ]
        )
    widths = [max(len(line[i]) for line in lines) for i in range(len(head))]
    return "\n".join(
        "  ".join(cell.ljust(w) if i < 2 else cell.rjust(w) for i, (cell, w) in enumerate(zip(line, widths)))
        for line in lines
    )


def reports_to_json(reports: Sequence[RunReport], **meta) -> str:
    doc = {
        "schema": SCHEMA,
        "meta": meta,
        "reports": [asdict(r) for r in reports],
        "aggregates": aggregate(reports),
    }
    return json.dumps(doc, indent=2, allow_nan=True)


def reports_from_json(text: str) -> list[RunReport]:
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unsupported report schema {doc.get('schema')!r}")
    return [RunReport(**r) for r in doc["reports"]]


@dataclass
class SweepRow:
    threshold: float
    sparsity: float
    k: int | None
    feasible: bool
    exact: bool
    nnz: int


def sweep_max_cost(
    graph: InstanceGraph,
    thresholds: Sequence[float],
    restarts: int = 5,
    seed: int = 0,
    candidates: Sequence | None = None,
    load_weighted: bool = False,
    min_degree: int = 3,
) -> list[SweepRow]:
    """Sparsity and smallest found k per max-cost threshold.

    Exact (brute force) when there are at most 20 candidates; otherwise the
    best of ``restarts`` DynBUILD + Dyn-down runs plus a warm start from the
    previous threshold's best set, which stays feasible as entries only get
    added. Thresholds that leave a demand unreachable report ``k=None``.
    """
    thresholds = list(thresholds)
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be ascending")
    if candidates is None:
        order = graph.index()
        candidates = sorted(select_candidates(graph, min_degree), key=order.__getitem__)
    rows = []
    previous = None
    for t in thresholds:
        matrix = truncated_costs(graph, candidates, max_cost=t, load_weighted=load_weighted)
        if matrix.isolated_demands() or matrix.n_candidates == 0:
            rows.append(SweepRow(t, matrix.sparsity, None, False, False, matrix.nnz))
            continue
        if matrix.n_candidates <= MAX_BRUTE_FORCE_CANDIDATES:
            k = brute_force(matrix, 1).min_feasible_k
            rows.append(SweepRow(t, matrix.sparsity, k, True, True, matrix.nnz))
            continue
        runs = [run_cell(matrix, "dynbuild", "down", seed + r) for r in range(restarts)]
        if previous is not None:
            runs.append(run_cell(matrix, "warm", "down", seed, start=previous))
        runs = [r for r in runs if r.error is None and r.feasible]
        best = min(runs, key=lambda r: (r.k_after_swap, r.dist))
        previous = best.medoids
        rows.append(SweepRow(t, matrix.sparsity, best.k_after_swap, True, False, matrix.nnz))
    return rows


def sweep_to_tsv(rows: Sequence[SweepRow]) -> str:
    out = ["threshold\tsparsity_pct\tnnz\tk\tfeasible\texact"]
    for r in rows:
        k = "" if r.k is None else str(r.k)
        out.append(f"{r.threshold:g}\t{100 * r.sparsity:.4f}\t{r.nnz}\t{k}\t{int(r.feasible)}\t{int(r.exact)}")
    return "\n".join(out) + "\n"

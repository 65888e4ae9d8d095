"""Init/swap comparison table on a synthetic street grid.

    python3 scripts/bench_grid.py --restarts 20 --out results/bench.json
"""

import argparse
import time
from pathlib import Path

from sparsepam.experiment import ExperimentPlan, aggregate, format_table, reports_to_json, run_experiment
from sparsepam.graphgen import select_candidates, synth_grid, truncated_costs
from sparsepam.reference import min_cover_size


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--size", type=int, default=13, help="intersections per side")
    ap.add_argument("--subdivisions", type=int, default=7)
    ap.add_argument("--density", type=float, default=0.85)
    ap.add_argument("--max-cost", type=float, default=300.0)
    ap.add_argument("--graph-seed", type=int, default=1)
    ap.add_argument("--restarts", type=int, default=20)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    graph = synth_grid(args.size, args.size, args.density, args.graph_seed, subdivisions=args.subdivisions)
    order = graph.index()
    cands = sorted(select_candidates(graph), key=order.__getitem__)
    matrix = truncated_costs(graph, cands, max_cost=args.max_cost)
    t0 = time.perf_counter()
    min_k = min_cover_size(matrix)
    print(f"# {matrix!r}, sparsity {100 * matrix.sparsity:.2f}%")
    print(f"# minimal cover size {min_k} (integer program, {time.perf_counter() - t0:.1f}s)")

    plan = ExperimentPlan(
        inits=["random:5", "random:10", "sparsepp", "dynbuild"],
        variants=["down", "both"],
        restarts=args.restarts,
        threads=args.threads,
    )
    reports = run_experiment(matrix, plan)
    print(format_table(aggregate(reports)))
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(reports_to_json(reports, matrix=repr(matrix), min_cover_size=min_k))


if __name__ == "__main__":
    main()

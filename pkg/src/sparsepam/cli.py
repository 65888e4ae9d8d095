"""Command line entry point: ``sparsepam <subcommand> ...``.

Exit codes: 0 success, 1 usage or input errors, 2 infeasible in strict mode.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .core import read_matrix, write_matrix, write_penalties
from .experiment import (
    ExperimentPlan,
    aggregate,
    format_table,
    reports_to_json,
    run_experiment,
    sweep_max_cost,
    sweep_to_tsv,
)
from .graphgen import read_graph, select_candidates, truncated_costs
from .reference import brute_force, central_points

log = logging.getLogger("sparsepam")

EXIT_USAGE = 1
EXIT_INFEASIBLE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def cmd_build_matrix(args) -> int:
    graph = read_graph(args.graph)
    order = graph.index()
    if args.candidate_min_degree is not None or not graph.candidates:
        cands = select_candidates(graph, args.candidate_min_degree or 3)
    else:
        cands = graph.candidates
    cands = sorted(cands, key=order.__getitem__)
    demands = graph.demands
    matrix = truncated_costs(graph, cands, demands, args.max_cost, args.load_weighted)
    comments = [f"graph {args.graph} max-cost {args.max_cost:g} load-weighted {args.load_weighted}"]
    comments += [f"demand {o} {v}" for o, v in enumerate(demands)]
    comments += [f"candidate {j} {v}" for j, v in enumerate(cands)]
    write_matrix(matrix, args.out, comments)
    if args.penalties_out:
        write_penalties(matrix, args.penalties_out)
    isolated = matrix.isolated_demands()
    log.info("%r, sparsity %.2f%%, %d isolated demands", matrix, 100 * matrix.sparsity, len(isolated))
    return 0


def _plan(args, inits, variants) -> ExperimentPlan:
    return ExperimentPlan(
        inits=inits,
        variants=variants,
        restarts=args.restarts,
        seed=args.seed,
        k=args.k,
        max_sweeps=args.max_sweeps,
        strict=not args.lenient,
        threads=args.threads,
    )


def cmd_solve(args) -> int:
    matrix = read_matrix(args.matrix, args.penalties)
    if not args.lenient and matrix.isolated_demands():
        log.error("%d demands cannot be reached by any candidate", len(matrix.isolated_demands()))
        return EXIT_INFEASIBLE
    reports = run_experiment(matrix, _plan(args, [args.init], [args.dyn]))
    ok = [r for r in reports if r.error is None]
    if not ok:
        log.error("all runs failed: %s", reports[0].error)
        return EXIT_USAGE
    best = min(ok, key=lambda r: (r.penalty, r.dist))
    _write(reports_to_json(reports, matrix=str(args.matrix), best=best.medoids), args.out)
    if args.out not in (None, "-"):
        print(format_table(aggregate(reports)))
        print(f"best: k={best.k_after_swap} loss=({best.penalty:g}, {best.dist:.6g})")
    if not args.lenient and not best.feasible:
        return EXIT_INFEASIBLE
    return 0


def cmd_bench(args) -> int:
    if args.matrix:
        matrix = read_matrix(args.matrix, args.penalties)
    elif args.graph:
        if args.max_cost is None:
            raise UsageError("--graph needs --max-cost")
        graph = read_graph(args.graph)
        order = graph.index()
        cands = sorted(select_candidates(graph), key=order.__getitem__)
        matrix = truncated_costs(graph, cands, max_cost=args.max_cost, load_weighted=args.load_weighted)
    else:
        raise UsageError("bench needs --matrix or --graph")
    if not args.lenient and matrix.isolated_demands():
        log.error("%d demands cannot be reached by any candidate", len(matrix.isolated_demands()))
        return EXIT_INFEASIBLE
    reports = run_experiment(matrix, _plan(args, args.init, args.dyn))
    print(f"# {matrix!r}, sparsity {100 * matrix.sparsity:.2f}%")
    print(format_table(aggregate(reports)))
    if args.out:
        _write(reports_to_json(reports, matrix=repr(matrix)), args.out)
    return 0


def cmd_oracle(args) -> int:
    matrix = read_matrix(args.matrix, args.penalties)
    res = brute_force(matrix, args.k_max)
    doc = {
        "min_feasible_k": res.min_feasible_k,
        "best": {str(k): list(v.as_tuple()) for k, v in res.best.items()},
        "witness": {str(k): list(v) for k, v in res.witness.items()},
    }
    _write(json.dumps(doc, indent=2), args.out)
    return 0


def cmd_sweep(args) -> int:
    graph = read_graph(args.graph)
    rows = sweep_max_cost(
        graph,
        args.thresholds,
        restarts=args.restarts,
        seed=args.seed,
        load_weighted=args.load_weighted,
        min_degree=args.candidate_min_degree,
    )
    _write(sweep_to_tsv(rows), args.out)
    return 0


def cmd_central_points(args) -> int:
    points = np.loadtxt(args.points, comments="#", ndmin=2)
    res = central_points(points)
    doc = {
        name: {"center": cp.center.tolist(), "l2": cp.l2, "l2_squared": cp.l2_squared, "l1": cp.l1}
        for name, cp in res.items()
    }
    if args.json:
        _write(json.dumps(doc, indent=2), args.out)
    else:
        lines = [f"{'':18}{'x':>10}{'y':>10}{'L2':>9}{'L2^2':>9}{'L1':>9}"]
        for name, cp in res.items():
            x, y = cp.center[:2]
            lines.append(f"{name:18}{x:10.6f}{y:10.6f}{cp.l2:9.3f}{cp.l2_squared:9.3f}{cp.l1:9.3f}")
        _write("\n".join(lines), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sparsepam", description="Sparse asymmetric k-medoids with dynamic k.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def run_opts(sp, many):
        sp.add_argument("--k", type=int, default=1, help="target k for dynbuild/sparsepp")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--restarts", type=int, default=1 if not many else 10)
        sp.add_argument("--max-sweeps", type=int, default=100)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--lenient", action="store_true", help="allow unreachable demands")
        sp.add_argument("--penalties", help="optional 'demand<TAB>pi' file")

    sp = sub.add_parser("build-matrix", help="graph -> truncated sparse cost matrix")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--max-cost", type=float, required=True)
    sp.add_argument("--candidate-min-degree", type=int, default=None)
    sp.add_argument("--load-weighted", action="store_true")
    sp.add_argument("--out", required=True)
    sp.add_argument("--penalties-out")
    sp.set_defaults(func=cmd_build_matrix)

    sp = sub.add_parser("solve", help="initialize and run DynSWAP")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--init", default="dynbuild", help="dynbuild | random:<percent> | sparsepp")
    sp.add_argument("--dyn", default="down", choices=["none", "down", "up", "both"])
    sp.add_argument("--out")
    run_opts(sp, many=False)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("bench", help="restart experiment shaped like the init/swap comparison table")
    sp.add_argument("--matrix")
    sp.add_argument("--graph")
    sp.add_argument("--max-cost", type=float)
    sp.add_argument("--load-weighted", action="store_true")
    sp.add_argument("--init", nargs="+", default=["random:5", "random:10", "sparsepp", "dynbuild"])
    sp.add_argument("--dyn", nargs="+", default=["down", "both"], choices=["none", "down", "up", "both"])
    sp.add_argument("--out")
    run_opts(sp, many=True)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("oracle", help="exhaustive optimum for small instances")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--penalties")
    sp.add_argument("--k-max", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("sweep", help="sparsity and found k over max-cost thresholds")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--thresholds", type=float, nargs="+", required=True)
    sp.add_argument("--restarts", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--candidate-min-degree", type=int, default=3)
    sp.add_argument("--load-weighted", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("central-points", help="mean, median, geometric median and medoid of 2-D points")
    sp.add_argument("--points", required=True, help="whitespace separated 'x y' lines")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_central_points)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Sparsity and smallest found k as the max-cost threshold grows.

    python3 scripts/sweep_grid.py --out results/sweep.tsv
"""

import argparse
from pathlib import Path

from sparsepam.experiment import sweep_max_cost, sweep_to_tsv
from sparsepam.graphgen import synth_grid

DEFAULT_THRESHOLDS = [150, 200, 250, 300, 400, 500, 700, 1000, 1500, 2000]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--size", type=int, default=13)
    ap.add_argument("--subdivisions", type=int, default=7)
    ap.add_argument("--density", type=float, default=0.85)
    ap.add_argument("--graph-seed", type=int, default=1)
    ap.add_argument("--thresholds", type=float, nargs="+", default=DEFAULT_THRESHOLDS)
    ap.add_argument("--restarts", type=int, default=5)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    graph = synth_grid(args.size, args.size, args.density, args.graph_seed, subdivisions=args.subdivisions)
    text = sweep_to_tsv(sweep_max_cost(graph, sorted(args.thresholds), restarts=args.restarts))
    print(text, end="")
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)


if __name__ == "__main__":
    main()

"""Runtime of sparse DynSWAP against dense FasterPAM as demand density grows.

Streets stay fixed per grid seed, so the candidate set and k stay roughly
constant while N and nnz grow. Dense FasterPAM runs on the full N x N
shortest-path matrix between demands.

    python3 scripts/scaling.py --densities 0.25 0.5 1.0
"""

import argparse
import time

import numpy as np
from scipy.sparse.csgraph import dijkstra

from sparsepam.graphgen import select_candidates, synth_grid, truncated_costs
from sparsepam.initialize import dyn_build
from sparsepam.reference import dense_fasterpam
from sparsepam.swap import SwapConfig, dyn_swap


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--size", type=int, default=14)
    ap.add_argument("--subdivisions", type=int, default=3)
    ap.add_argument("--densities", type=float, nargs="+", default=[0.25, 0.5, 1.0])
    ap.add_argument("--max-cost", type=float, default=300.0)
    ap.add_argument("--graph-seed", type=int, default=3)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--dense-k", type=int, default=10)
    ap.add_argument("--skip-dense", action="store_true")
    args = ap.parse_args()

    print("density\tN\tnnz\tk_sparse\tsparse_s\tdense_s")
    for density in args.densities:
        graph = synth_grid(args.size, args.size, density, args.graph_seed, subdivisions=args.subdivisions)
        order = graph.index()
        cands = sorted(select_candidates(graph), key=order.__getitem__)
        matrix = truncated_costs(graph, cands, max_cost=args.max_cost)
        sparse_t, ks = 0.0, []
        for s in range(args.seeds):
            start = dyn_build(matrix, 1)[1]
            t0 = time.perf_counter()
            _, final, _, _ = dyn_swap(matrix, start, SwapConfig.from_variant("down", seed=s))
            sparse_t += time.perf_counter() - t0
            ks.append(len(final))
        dense_t = float("nan")
        if not args.skip_dense:
            dem = [order[v] for v in graph.demands]
            dense = dijkstra(graph.adjacency(), directed=False, indices=dem)[:, dem]
            dense_t = 0.0
            for s in range(args.seeds):
                t0 = time.perf_counter()
                dense_fasterpam(dense, args.dense_k, seed=s)
                dense_t += time.perf_counter() - t0
        print(f"{density:g}\t{matrix.n_demand}\t{matrix.nnz}\t{np.mean(ks):.1f}\t{sparse_t:.3f}\t{dense_t:.3f}")


if __name__ == "__main__":
    main()

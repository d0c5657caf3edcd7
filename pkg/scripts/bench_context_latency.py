#!/usr/bin/env python3
"""Context-retrieval latency benchmark on synthetic random graphs.

Times context_retrieve (personalized-PageRank expansion) single-threaded
over random directed graphs at configurable scale and reports mean/p50/p95.

Usage:
    python3 scripts/bench_context_latency.py [--nodes 10000] [--edges 50000]
"""

import argparse
import random
import time

from lightpal.bm25 import ScoredHit
from lightpal.graph import PassageGraph
from lightpal.metrics import latency_stats
from lightpal.ppr import PprConfig, context_retrieve


def random_graph(rng: random.Random, n: int, n_edges: int) -> PassageGraph:
    edge_set: set[tuple[int, int]] = set()
    while len(edge_set) < n_edges:
        src, dst = rng.randrange(n), rng.randrange(n)
        if src != dst:
            edge_set.add((src, dst))
    adjacency: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for src, dst in sorted(edge_set):
        adjacency[src].append((dst, -1.0))
    return PassageGraph(ids=tuple(f"p{i:06d}" for i in range(n)),
                        fingerprint="synthetic", adjacency=adjacency,
                        k=5, k_prime=100)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=10_000)
    parser.add_argument("--edges", type=int, default=50_000)
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--n-context", type=int, default=20)
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--alpha", type=float, default=0.2)
    parser.add_argument("--seed", type=int, default=0, help="RNG seed")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    graph = random_graph(rng, args.nodes, args.edges)
    cfg = PprConfig(alpha=args.alpha)
    samples = []
    for _ in range(args.repeat):
        positions = rng.sample(range(args.nodes), args.seeds)
        hits = [ScoredHit(graph.ids[i], 1.0) for i in positions]
        t0 = time.perf_counter()
        context_retrieve(graph, hits, args.n_context, cfg)
        samples.append((time.perf_counter() - t0) * 1e3)

    stats = latency_stats(samples)
    print(f"graph: {args.nodes} nodes, {args.edges} edges; "
          f"{args.seeds} seeds, {args.repeat} runs")
    print(f"context_retrieve  mean {stats['mean']:.2f} ms  "
          f"p50 {stats['p50']:.2f} ms  p95 {stats['p95']:.2f} ms")


if __name__ == "__main__":
    main()

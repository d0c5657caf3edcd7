#!/usr/bin/env python3
"""Synthetic recall-uplift experiment.

Generates a corpus of multi-chapter stories where each query names a
single chapter's keyword but every chapter of the story is relevant,
then compares mean Recall@K of plain BM25 against BM25 + graph-based
context expansion.

Usage:
    python3 scripts/run_uplift_experiment.py [--stories 50] [--k 10]
"""

import argparse
import json
import time

from lightpal.bm25 import build_index
from lightpal.datagen import story_corpus
from lightpal.embed import HashedTfidfProvider, build_vector_index
from lightpal.graph import GraphBuildConfig, build_graph
from lightpal.metrics import macro_average, recall_at_k
from lightpal.pipeline import RetrievalIndexes, RetrieveConfig, retrieve
from lightpal.scorer import NgramLm


def mean_recall(data, indexes, graph, cfg, k):
    recalls = []
    for query in data.queries:
        result = retrieve(data.corpus, indexes, graph, query, cfg)
        retrieved = [h.passage_id for h in result.all_hits()]
        recalls.append(recall_at_k(retrieved, data.qrels.for_query(query.id), k))
    return macro_average(recalls)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--stories", type=int, default=50)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--graph-k", type=int, default=5)
    parser.add_argument("--k-prime", type=int, default=100)
    parser.add_argument("--alpha", type=float, default=0.2)
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    args = parser.parse_args()

    data = story_corpus(n_stories=args.stories)
    indexes = RetrievalIndexes(bm25=build_index(data.corpus))

    t0 = time.perf_counter()
    provider = HashedTfidfProvider().fit(p.text for p in data.corpus)
    vindex = build_vector_index(data.corpus, provider)
    scorer = NgramLm.from_corpus(data.corpus)
    graph = build_graph(data.corpus, vindex, scorer,
                        GraphBuildConfig(k=args.graph_k, k_prime=args.k_prime))
    build_s = time.perf_counter() - t0

    baseline_cfg = RetrieveConfig(total_k=args.k, lightpal_enabled=False)
    augmented_cfg = RetrieveConfig(total_k=args.k)
    baseline = mean_recall(data, indexes, None, baseline_cfg, args.k)
    augmented = mean_recall(data, indexes, graph, augmented_cfg, args.k)

    if args.json:
        print(json.dumps({
            "n_passages": len(data.corpus), "n_queries": len(data.queries),
            "k": args.k, "graph_build_s": build_s,
            "recall_bm25": baseline, "recall_augmented": augmented,
            "uplift": augmented - baseline,
        }, indent=2))
        return
    print(f"corpus: {len(data.corpus)} passages, {len(data.queries)} queries")
    print(f"graph build: {build_s:.1f} s ({graph.num_edges} edges)")
    print(f"mean Recall@{args.k}  bm25      : {baseline:.4f}")
    print(f"mean Recall@{args.k}  +graph    : {augmented:.4f}")
    print(f"uplift: {augmented - baseline:+.4f}")


if __name__ == "__main__":
    main()

import sys

# one human-readable line per acceptance criterion, keyed by test name
ACCEPTANCE_CRITERIA = {
    "test_ppr_oracle_equivalence": "PPR oracle equivalence (200 random graphs, 1e-6 Linf, < 10 s)",
    "test_bm25_oracle_equivalence": "BM25 oracle equivalence (fixed corpus, 10 queries, 1e-10 relative)",
    "test_pipeline_arithmetic": "Pipeline arithmetic (60% split for K in {5,10,20,100,200,300})",
    "test_synthetic_recall_uplift": "Synthetic recall uplift (Recall@10 uplift >= 0.10, < 60 s)",
    "test_context_retrieval_latency": "Context-retrieval latency (10k nodes / 50k edges, < 200 ms)",
    "test_graph_build_time": "Graph build time (1000-passage corpus, < 5 min)",
    "test_continuation_recovery": "Continuation recovery (>= 90% true successors in out-edges)",
    "test_rouge_oracles": "ROUGE oracles (identity, disjoint, hand-derived case)",
    "test_metric_counting": "Metric counting (1000 random triples, exact)",
    "test_determinism_and_persistence": "Determinism & persistence (byte-identical artifacts)",
}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    name = report.nodeid.split("::")[-1].split("[")[0]
    if "test_acceptance" not in report.nodeid or name not in ACCEPTANCE_CRITERIA:
        return
    verdict = "PASS" if report.passed else "FAIL"
    sys.stderr.write(f"[{verdict}] {ACCEPTANCE_CRITERIA[name]}\n")
    sys.stderr.flush()

"""Retrieval metrics, ROUGE, and phase-split latency benchmarking.

All metric aggregation is macro (arithmetic mean over queries). ROUGE
uses in-house F1 definitions over lowercase word tokens; the formulas
are fully reproducible but not calibrated against any external ROUGE
toolkit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .bm25 import tokenize
from .corpus import Query


def precision_at_k(retrieved: Sequence[str], relevant: set[str] | frozenset[str],
                   k: int) -> float:
    """Fraction of the top-k retrieved passages that are relevant.

    The denominator is min(k, |retrieved|); an empty retrieval scores 0.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not retrieved:
        return 0.0
    top = retrieved[:k]
    return sum(1 for pid in top if pid in relevant) / len(top)


def recall_at_k(retrieved: Sequence[str], relevant: set[str] | frozenset[str],
                k: int) -> float:
    """Fraction of all relevant passages found in the top-k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not relevant:
        raise ValueError("recall is undefined for an empty relevant set")
    top = retrieved[:k]
    return sum(1 for pid in top if pid in relevant) / len(relevant)


def _ngram_counts(tokens: Sequence[str], n: int) -> dict[tuple[str, ...], int]:
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i:i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def _f1(overlap: int, cand_total: int, ref_total: int) -> float:
    if cand_total == 0 or ref_total == 0 or overlap == 0:
        return 0.0
    precision = overlap / cand_total
    recall = overlap / ref_total
    return 2 * precision * recall / (precision + recall)


def _rouge_n(cand: Sequence[str], ref: Sequence[str], n: int) -> float:
    cand_counts = _ngram_counts(cand, n)
    ref_counts = _ngram_counts(ref, n)
    overlap = sum(min(c, ref_counts.get(g, 0)) for g, c in cand_counts.items())
    return _f1(overlap, sum(cand_counts.values()), sum(ref_counts.values()))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_scores(candidate: str, reference: str) -> dict[str, float]:
    """ROUGE-1/-2 (n-gram multiset overlap F1) and ROUGE-L (LCS F1) plus
    their arithmetic mean. Empty candidate or reference scores all zeros."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    r1 = _rouge_n(cand, ref, 1)
    r2 = _rouge_n(cand, ref, 2)
    rl = _f1(_lcs_length(cand, ref), len(cand), len(ref))
    return {"rouge1": r1, "rouge2": r2, "rougeL": rl, "mean": (r1 + r2 + rl) / 3.0}


def _percentile(sorted_values: list[float], q: float) -> float:
    # nearest-rank percentile on a pre-sorted sample
    if not sorted_values:
        raise ValueError("empty sample")
    idx = min(len(sorted_values) - 1, max(0, int(round(q * (len(sorted_values) - 1)))))
    return sorted_values[idx]


def latency_stats(samples_ms: Sequence[float]) -> dict[str, float]:
    """Mean / p50 / p95 of a latency sample, in milliseconds."""
    if not samples_ms:
        return {}
    ordered = sorted(samples_ms)
    return {
        "mean": sum(ordered) / len(ordered),
        "p50": _percentile(ordered, 0.50),
        "p95": _percentile(ordered, 0.95),
        "n": len(ordered),
    }


@dataclass
class PhasedRunner:
    """Two-phase retrieval closure for latency benchmarking: an initial
    retrieval phase and a context (graph) phase fed by its output."""

    initial: Callable[[Query], object]
    context: Callable[[Query, object], object]


def bench_latency(runner: PhasedRunner, queries: Sequence[Query],
                  repeat: int) -> dict[str, dict[str, float]]:
    """Wall-clock the two retrieval phases separately, single-threaded.

    Returns ``{"init": stats, "context": stats}`` with mean/p50/p95 in ms;
    empty stats when there are no queries.
    """
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    init_samples: list[float] = []
    ctx_samples: list[float] = []
    for _ in range(repeat):
        for query in queries:
            t0 = time.perf_counter()
            hits = runner.initial(query)
            t1 = time.perf_counter()
            runner.context(query, hits)
            t2 = time.perf_counter()
            init_samples.append((t1 - t0) * 1e3)
            ctx_samples.append((t2 - t1) * 1e3)
    return {"init": latency_stats(init_samples), "context": latency_stats(ctx_samples)}


def macro_average(values: Iterable[float]) -> float:
    values = list(values)
    if not values:
        return 0.0
    return sum(values) / len(values)


def build_report(k: int,
                 per_query_precision: dict[str, float],
                 per_query_recall: dict[str, float],
                 latency_ms: dict[str, dict[str, float]] | None = None,
                 rouge: dict[str, float] | None = None) -> dict:
    """Assemble the evaluation report (JSON-serializable)."""
    report = {
        "k": k,
        "precision": macro_average(per_query_precision.values()),
        "recall": macro_average(per_query_recall.values()),
        "latency_ms": latency_ms if latency_ms is not None else {"init": {}, "context": {}},
        "n_queries": len(per_query_precision),
    }
    if rouge is not None:
        report["rouge"] = rouge
    return report

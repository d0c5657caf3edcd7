"""Command-line interface.

Subcommands: ingest, index, build-graph, retrieve, eval, bench.
Exit codes: 0 success, 1 usage error, 2 data/validation error,
3 remote-service error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bm25 as bm25_mod
from . import embed as embed_mod
from .corpus import (
    Corpus,
    CorpusError,
    chunk_document,
    load_corpus,
    load_qrels,
    load_queries,
    save_corpus,
    save_qrels,
    save_queries,
)
from .graph import GraphBuildConfig, load_graph, build_graph, save_graph
from .metrics import (
    PhasedRunner,
    bench_latency,
    build_report,
    macro_average,
    precision_at_k,
    recall_at_k,
    rouge_scores,
)
from .pipeline import (
    GenerationError,
    RetrievalIndexes,
    RetrieveConfig,
    retrieve,
    write_results,
    read_results,
)
from .ppr import PprConfig, context_retrieve
from .scorer import NgramLm, RemoteScorer, ScorerError, TruncationPolicy

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_REMOTE = 3

PASSAGES = "passages.tsv"
QUERIES = "queries.tsv"
QRELS = "qrels.tsv"
BM25_INDEX = "bm25.idx"
VECTORS = "vectors.vec"
GRAPH = "graph.tsv"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="lightpal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load, validate, and normalize a dataset")
    p.add_argument("--passages", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--qrels")
    p.add_argument("--out", required=True)
    p.add_argument("--chunk-chars", type=int,
                   help="treat each input record as a document and chunk its text")

    p = sub.add_parser("index", help="build retrieval indexes")
    p.add_argument("--data", required=True)
    p.add_argument("--backend", choices=["bm25", "dense", "both"], default="both")

    p = sub.add_parser("build-graph", help="build the passage graph")
    p.add_argument("--data", required=True)
    p.add_argument("--scorer", choices=["builtin", "remote"], default="builtin")
    p.add_argument("--remote-url")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--k-prime", type=int, default=100)
    p.add_argument("--budget", type=int, default=1024)

    p = sub.add_parser("retrieve", help="run retrieval for every query")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--no-lightpal", action="store_true",
                   help="plain backend top-K, no graph expansion")
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--backend", choices=["bm25", "dense"], default="bm25")
    p.add_argument("--init-fraction", type=float, default=0.6)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="score a results file against qrels")
    p.add_argument("--data", required=True)
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, help="cutoff; default: max rank in the results file")
    p.add_argument("--summaries", help="generated summaries (id<TAB>text)")
    p.add_argument("--references", help="reference summaries (id<TAB>text)")

    p = sub.add_parser("bench", help="per-phase retrieval latency")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--backend", choices=["bm25", "dense"], default="bm25")
    p.add_argument("--alpha", type=float, default=0.2)

    return parser


def _data_path(data_dir: str, name: str, required: bool = True) -> Path:
    path = Path(data_dir) / name
    if required and not path.exists():
        raise CorpusError(f"missing {name} in {data_dir} (run the earlier stages first)")
    return path


def _load_data_corpus(data_dir: str) -> Corpus:
    return load_corpus(_data_path(data_dir, PASSAGES))


def _fit_provider(corpus: Corpus) -> embed_mod.HashedTfidfProvider:
    return embed_mod.HashedTfidfProvider().fit(p.text for p in corpus)


def _load_indexes(data_dir: str, backend: str, corpus: Corpus) -> RetrievalIndexes:
    indexes = RetrievalIndexes()
    if backend == "bm25":
        indexes.bm25 = bm25_mod.load_index(_data_path(data_dir, BM25_INDEX), corpus)
    else:
        indexes.vectors = embed_mod.load_vector_index(
            str(_data_path(data_dir, VECTORS)), corpus
        )
        indexes.provider = _fit_provider(corpus)
    return indexes


def _cmd_ingest(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.chunk_chars is not None:
        if args.chunk_chars < 1:
            raise CorpusError("--chunk-chars must be >= 1")
        docs = load_corpus(args.passages)
        passages = []
        for doc in docs:
            passages.extend(chunk_document(doc.id, doc.text, args.chunk_chars))
        corpus = Corpus(passages)
    else:
        corpus = load_corpus(args.passages)
    queries = load_queries(args.queries)
    save_corpus(corpus, out / PASSAGES)
    save_queries(queries, out / QUERIES)
    if args.qrels:
        qrels = load_qrels(args.qrels, corpus)
        save_qrels(qrels, out / QRELS)
    print(f"ingested {len(corpus)} passages, {len(queries)} queries into {out}")
    return EXIT_OK


def _cmd_index(args) -> int:
    corpus = _load_data_corpus(args.data)
    if args.backend in ("bm25", "both"):
        index = bm25_mod.build_index(corpus)
        bm25_mod.save_index(index, _data_path(args.data, BM25_INDEX, required=False))
        print(f"bm25 index: {index.size} passages, {len(index.postings)} terms")
    if args.backend in ("dense", "both"):
        provider = _fit_provider(corpus)
        vindex = embed_mod.build_vector_index(corpus, provider)
        embed_mod.save_vector_index(vindex, str(_data_path(args.data, VECTORS, required=False)))
        print(f"vector index: {len(vindex)} passages, provider {vindex.provider_tag}")
    return EXIT_OK


def _cmd_build_graph(args) -> int:
    corpus = _load_data_corpus(args.data)
    vec_path = Path(args.data) / VECTORS
    if vec_path.exists():
        vindex = embed_mod.load_vector_index(str(vec_path), corpus)
    else:
        vindex = embed_mod.build_vector_index(corpus, _fit_provider(corpus))
        embed_mod.save_vector_index(vindex, str(vec_path))
    if args.scorer == "remote":
        if not args.remote_url:
            raise CorpusError("--remote-url is required with --scorer remote")
        scorer = RemoteScorer(args.remote_url, max_total_tokens=args.budget)
        scorer.health()
    else:
        scorer = NgramLm.from_corpus(corpus)
    cfg = GraphBuildConfig(
        k=args.k, k_prime=args.k_prime,
        truncation=TruncationPolicy(combined_budget=args.budget),
    )
    graph = build_graph(corpus, vindex, scorer, cfg)
    save_graph(graph, _data_path(args.data, GRAPH, required=False))
    print(f"graph: {len(graph)} nodes, {graph.num_edges} edges")
    return EXIT_OK


def _cmd_retrieve(args) -> int:
    corpus = _load_data_corpus(args.data)
    queries = load_queries(_data_path(args.data, QUERIES))
    indexes = _load_indexes(args.data, args.backend, corpus)
    lightpal_enabled = not args.no_lightpal
    graph = load_graph(_data_path(args.data, GRAPH), corpus) if lightpal_enabled else None
    cfg = RetrieveConfig(
        total_k=args.k,
        init_fraction=args.init_fraction,
        initial_backend=args.backend,
        ppr=PprConfig(alpha=args.alpha),
        lightpal_enabled=lightpal_enabled,
    )
    results = [retrieve(corpus, indexes, graph, q, cfg) for q in queries]
    write_results(results, args.out)
    print(f"wrote {sum(len(r.all_hits()) for r in results)} rows for "
          f"{len(results)} queries to {args.out}")
    return EXIT_OK


def _load_text_map(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise CorpusError(f"{path}:{lineno}: expected id<TAB>text")
            out[parts[0]] = parts[1].replace("\\n", "\n")
    return out


def _cmd_eval(args) -> int:
    corpus = _load_data_corpus(args.data)
    qrels = load_qrels(_data_path(args.data, QRELS), corpus)
    results = read_results(args.results)
    if not results:
        raise CorpusError(f"{args.results}: no result rows")
    k = args.k or max(len(rows) for rows in results.values())
    precision: dict[str, float] = {}
    recall: dict[str, float] = {}
    for qid, rows in results.items():
        relevant = qrels.for_query(qid)
        if not relevant:
            continue
        retrieved = [pid for pid, _, _ in rows]
        precision[qid] = precision_at_k(retrieved, relevant, k)
        recall[qid] = recall_at_k(retrieved, relevant, k)
    rouge = None
    if args.summaries or args.references:
        if not (args.summaries and args.references):
            raise CorpusError("--summaries and --references must be given together")
        candidates = _load_text_map(args.summaries)
        references = _load_text_map(args.references)
        shared = sorted(set(candidates) & set(references))
        if not shared:
            raise CorpusError("no overlapping ids between summaries and references")
        per_query = [rouge_scores(candidates[qid], references[qid]) for qid in shared]
        rouge = {
            key: macro_average(r[key] for r in per_query)
            for key in ("rouge1", "rouge2", "rougeL", "mean")
        }
    report = build_report(k, precision, recall, rouge=rouge)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    print(f"k={k} precision={report['precision']:.4f} recall={report['recall']:.4f} "
          f"n_queries={report['n_queries']}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    corpus = _load_data_corpus(args.data)
    queries = load_queries(_data_path(args.data, QUERIES))
    indexes = _load_indexes(args.data, args.backend, corpus)
    graph = load_graph(_data_path(args.data, GRAPH), corpus)
    cfg = RetrieveConfig(
        total_k=args.k, initial_backend=args.backend, ppr=PprConfig(alpha=args.alpha)
    )

    def initial_phase(query):
        if args.backend == "bm25":
            return bm25_mod.search(indexes.bm25, query, cfg.init_k)
        return embed_mod.search_dense(indexes.vectors, indexes.provider, query, cfg.init_k)

    def context_phase(query, hits):
        if not hits:
            return []
        return context_retrieve(graph, hits, cfg.total_k - len(hits), cfg.ppr)

    stats = bench_latency(PhasedRunner(initial_phase, context_phase), queries, args.repeat)
    print(f"{'phase':<10}{'mean ms':>12}{'p50 ms':>12}{'p95 ms':>12}{'n':>8}")
    for phase in ("init", "context"):
        s = stats[phase]
        if not s:
            print(f"{phase:<10}{'-':>12}{'-':>12}{'-':>12}{0:>8}")
            continue
        print(f"{phase:<10}{s['mean']:>12.3f}{s['p50']:>12.3f}{s['p95']:>12.3f}"
              f"{int(s['n']):>8}")
    return EXIT_OK


_COMMANDS = {
    "ingest": _cmd_ingest,
    "index": _cmd_index,
    "build-graph": _cmd_build_graph,
    "retrieve": _cmd_retrieve,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ScorerError, GenerationError) as exc:
        print(f"lightpal: remote service error: {exc}", file=sys.stderr)
        return EXIT_REMOTE
    except (CorpusError, FileNotFoundError) as exc:
        print(f"lightpal: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"lightpal: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

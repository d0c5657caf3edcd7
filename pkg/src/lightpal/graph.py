"""Offline passage-graph construction and persistence.

For every passage, its top-k' embedding neighbors are scored as
continuation candidates and directed edges are kept to the k candidates
with the highest context score (source passage serves as context for the
target). Edge scores are stored for inspection, but the random walk uses
uniform edge weights.

Graph file format (UTF-8 text): header line
``LPGRAPH1<TAB>{corpus_fingerprint}<TAB>{k}<TAB>{k_prime}`` followed by
one edge per line ``src_id<TAB>dst_id<TAB>logprob`` (17 significant
digits), grouped by source in corpus order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, CorpusError
from .embed import VectorIndex, top_k_similar
from .scorer import ContextScorer, ScorerError, TruncationPolicy, score_batch

GRAPH_MAGIC = "LPGRAPH1"


class GraphBuildError(RuntimeError):
    """Graph construction aborted; reports how many sources completed."""

    def __init__(self, message: str, completed_sources: int):
        super().__init__(message)
        self.completed_sources = completed_sources


@dataclass(frozen=True)
class GraphBuildConfig:
    k_prime: int = 100
    k: int = 5
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)
    symmetrize: bool = False  # ablation only; doubles the out-degree bound

    def __post_init__(self) -> None:
        if self.k < 1 or self.k_prime < 1:
            raise ValueError("k and k_prime must be >= 1")
        if self.k > self.k_prime:
            raise ValueError("k must be <= k_prime")


class PassageGraph:
    """Directed weighted adjacency over corpus positions.

    ``adjacency[src]`` lists ``(dst, log-probability)`` edges sorted by
    score descending, ties by passage id ascending.
    """

    def __init__(self, ids: tuple[str, ...], fingerprint: str,
                 adjacency: list[list[tuple[int, float]]],
                 k: int, k_prime: int):
        if len(adjacency) != len(ids):
            raise ValueError("adjacency must cover every node")
        self.ids = ids
        self.fingerprint = fingerprint
        self.adjacency = adjacency
        self.k = k
        self.k_prime = k_prime
        for src, edges in enumerate(adjacency):
            targets = [dst for dst, _ in edges]
            if src in targets:
                raise ValueError(f"self-loop at node {ids[src]!r}")
            if len(set(targets)) != len(targets):
                raise ValueError(f"duplicate edge from node {ids[src]!r}")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def num_edges(self) -> int:
        return sum(len(edges) for edges in self.adjacency)

    def out_edges(self, src: int) -> list[tuple[int, float]]:
        return self.adjacency[src]


def build_graph(corpus: Corpus, vindex: VectorIndex, scorer: ContextScorer,
                cfg: GraphBuildConfig) -> PassageGraph:
    """Score each passage's top-k' neighbors and keep the top-k edges.

    Deterministic for a fixed scorer; exactly one scorer call per
    (source, candidate) pair.
    """
    if len(corpus) < 2:
        raise CorpusError("graph construction requires at least 2 passages")
    if vindex.fingerprint != corpus.fingerprint():
        raise CorpusError("vector index was not built from this corpus")

    adjacency: list[list[tuple[int, float]]] = []
    for src in range(len(corpus)):
        candidates = top_k_similar(vindex, src, cfg.k_prime)
        if not candidates:
            adjacency.append([])
            continue
        pairs = [(corpus[src], corpus[dst]) for dst, _ in candidates]
        try:
            scores = score_batch(scorer, pairs, cfg.truncation)
        except ScorerError as exc:
            raise GraphBuildError(
                f"scorer failed at source {corpus[src].id!r} "
                f"({src} of {len(corpus)} sources completed): {exc}",
                completed_sources=src,
            ) from exc
        scored = sorted(
            zip((dst for dst, _ in candidates), scores),
            key=lambda e: (-e[1], corpus[e[0]].id),
        )
        adjacency.append(scored[:cfg.k])

    if cfg.symmetrize:
        extra: list[dict[int, float]] = [dict(edges) for edges in adjacency]
        for src, edges in enumerate(adjacency):
            for dst, score in edges:
                extra[dst].setdefault(src, score)
        adjacency = [
            sorted(d.items(), key=lambda e: (-e[1], corpus[e[0]].id))
            for d in extra
        ]

    return PassageGraph(
        ids=corpus.ids(),
        fingerprint=corpus.fingerprint(),
        adjacency=adjacency,
        k=cfg.k,
        k_prime=cfg.k_prime,
    )


def save_graph(graph: PassageGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{GRAPH_MAGIC}\t{graph.fingerprint}\t{graph.k}\t{graph.k_prime}\n")
        for src, edges in enumerate(graph.adjacency):
            for dst, logprob in edges:
                fh.write(f"{graph.ids[src]}\t{graph.ids[dst]}\t{logprob:.17g}\n")


def load_graph(path: str | Path, corpus: Corpus) -> PassageGraph:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if len(header) != 4 or header[0] != GRAPH_MAGIC:
            raise CorpusError(f"{path}: not a {GRAPH_MAGIC} graph file")
        fingerprint, k, k_prime = header[1], int(header[2]), int(header[3])
        if corpus.fingerprint() != fingerprint:
            raise CorpusError(f"{path}: graph fingerprint does not match supplied corpus")
        adjacency: list[list[tuple[int, float]]] = [[] for _ in range(len(corpus))]
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise CorpusError(f"{path}:{lineno}: malformed edge line")
            src_id, dst_id, logprob = parts
            adjacency[corpus.position(src_id)].append(
                (corpus.position(dst_id), float(logprob))
            )
    return PassageGraph(
        ids=corpus.ids(),
        fingerprint=fingerprint,
        adjacency=adjacency,
        k=k,
        k_prime=k_prime,
    )

"""End-to-end retrieve-then-summarize orchestration.

Retrieval builds the output passage set in two stages: the configured
backend supplies an initial set (60% of K by default, rounded half-up),
then the passage graph's random walk supplies context passages. When
the walk cannot produce enough novel passages, the backend's ranking
beyond the initial set backfills the remainder.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from typing import Sequence

import requests

from . import bm25 as bm25_mod
from . import embed as embed_mod
from .bm25 import LexicalIndex, ScoredHit
from .corpus import Corpus, CorpusError, Query
from .embed import EmbeddingProvider, VectorIndex
from .graph import PassageGraph
from .ppr import PprConfig, context_retrieve

logger = logging.getLogger(__name__)

BACKENDS = ("bm25", "dense")
TEMPLATES = ("story", "meeting", "ragqa")


class GenerationError(RuntimeError):
    """Summary generation endpoint failed."""


def init_count(total_k: int, init_fraction: float) -> int:
    """Initial-set size: round-half-up of ``init_fraction * total_k``,
    never below 1 (5 -> 3, 10 -> 6, 100 -> 60)."""
    return max(1, int(init_fraction * total_k + 0.5))


@dataclass(frozen=True)
class RetrieveConfig:
    total_k: int
    init_fraction: float = 0.6
    initial_backend: str = "bm25"
    ppr: PprConfig = field(default_factory=PprConfig)
    lightpal_enabled: bool = True

    def __post_init__(self) -> None:
        if self.total_k < 1:
            raise ValueError("total_k must be >= 1")
        if not 0.0 < self.init_fraction <= 1.0:
            raise ValueError("init_fraction must be in (0, 1]")
        if self.initial_backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.initial_backend!r}")

    @property
    def init_k(self) -> int:
        return init_count(self.total_k, self.init_fraction)


@dataclass
class RetrievalIndexes:
    """Read-only retrieval structures shared across queries."""

    bm25: LexicalIndex | None = None
    vectors: VectorIndex | None = None
    provider: EmbeddingProvider | None = None


@dataclass
class RetrievalResult:
    query_id: str
    initial: list[ScoredHit]
    context: list[ScoredHit]
    backfilled: int = 0  # trailing entries of `context` taken from the backend

    def all_hits(self) -> list[ScoredHit]:
        return self.initial + self.context

    def sources(self) -> list[str]:
        n_ctx = len(self.context) - self.backfilled
        return (
            ["init"] * len(self.initial)
            + ["ctx"] * n_ctx
            + ["backfill"] * self.backfilled
        )


def _backend_search(indexes: RetrievalIndexes, query: Query, top_n: int,
                    backend: str) -> list[ScoredHit]:
    if backend == "bm25":
        if indexes.bm25 is None:
            raise CorpusError("bm25 backend requested but no lexical index supplied")
        return bm25_mod.search(indexes.bm25, query, top_n)
    if indexes.vectors is None or indexes.provider is None:
        raise CorpusError("dense backend requested but no vector index supplied")
    return embed_mod.search_dense(indexes.vectors, indexes.provider, query, top_n)


def retrieve(corpus: Corpus, indexes: RetrievalIndexes, graph: PassageGraph | None,
             query: Query, cfg: RetrieveConfig) -> RetrievalResult:
    """Pure function of (corpus, indexes, graph, query, cfg)."""
    if len(corpus) == 0:
        raise CorpusError("cannot retrieve from an empty corpus")
    if cfg.lightpal_enabled and graph is None:
        raise CorpusError("graph-based retrieval enabled but no graph supplied")

    # fetch enough backend hits to cover the initial set plus any backfill
    backend_hits = _backend_search(indexes, query, 2 * cfg.total_k, cfg.initial_backend)
    if not backend_hits:
        logger.warning("backend returned zero hits for query %r", query.id)
        return RetrievalResult(query_id=query.id, initial=[], context=[])

    initial = backend_hits[:cfg.init_k]
    n_context = cfg.total_k - len(initial)

    if not cfg.lightpal_enabled:
        context = backend_hits[len(initial):cfg.total_k]
        return RetrievalResult(query_id=query.id, initial=initial, context=context)

    context = context_retrieve(graph, initial, n_context, cfg.ppr)
    # passages the walk never reached carry zero mass; treat them as not
    # supplied by PPR and prefer the backend's ranking instead
    context = [h for h in context if h.score > 0.0]
    backfilled = 0
    if len(context) < n_context:
        taken = {h.passage_id for h in context}
        for hit in backend_hits[len(initial):]:
            if len(context) >= n_context:
                break
            if hit.passage_id in taken:
                continue
            context.append(hit)
            taken.add(hit.passage_id)
            backfilled += 1
    return RetrievalResult(
        query_id=query.id, initial=initial, context=context, backfilled=backfilled
    )


_PREAMBLES = {
    "story": (
        "You are a helpful assistant that gives long answer to question based "
        "on long stories. Write an answer based on the following question and "
        "the separated sections in the stories."
    ),
    "meeting": (
        "You are a helpful assistant that gives long answer to question based "
        "on long meetings. Write an answer based on the following question and "
        "the separated sections in the meetings."
    ),
    "ragqa": (
        "You are a helpful assistant that gives long answer to question based "
        "on documents. Write an answer based on the following question and "
        "the documents."
    ),
}

_SOURCE_NOUN = {"story": "story", "meeting": "meetings", "ragqa": "documents"}
_GROUP_HEADER = {"story": "STORY", "meeting": "MEETING"}


@dataclass(frozen=True)
class SummaryPrompt:
    text: str
    template_id: str
    n_summ_words: int


def build_summary_prompt(query: Query, result: RetrievalResult, corpus: Corpus,
                         template_id: str, n_summ_words: int) -> SummaryPrompt:
    """Render the generation prompt with retrieved passages in result order.

    The story/meeting templates group passages by source document (groups
    ordered by first appearance, passages in result order within each);
    the ragqa template lists passages flat.
    """
    if template_id not in TEMPLATES:
        raise ValueError(f"unknown template {template_id!r}")
    if n_summ_words < 1:
        raise ValueError("n_summ_words must be >= 1")
    passages = [corpus[corpus.position(h.passage_id)] for h in result.all_hits()]

    lines = [
        _PREAMBLES[template_id]
        + f" Please write the answer in approximately {n_summ_words} words."
        + f" When summarizing, use only information explicitly stated in the "
        + f"provided {_SOURCE_NOUN[template_id]}. Do not use your own knowledge "
        + "or make inferences beyond what is directly stated in the text.",
        "",
    ]
    if template_id == "ragqa":
        for idx, p in enumerate(passages):
            lines.append(f"# DOCUMENT: {idx}")
            lines.append(p.text)
            lines.append("")
    else:
        header = _GROUP_HEADER[template_id]
        group_order: list[str] = []
        groups: dict[str, list] = {}
        for p in passages:
            if p.doc_id not in groups:
                groups[p.doc_id] = []
                group_order.append(p.doc_id)
            groups[p.doc_id].append(p)
        for gidx, doc_id in enumerate(group_order):
            lines.append(f"# {header}: {gidx}")
            for sidx, p in enumerate(groups[doc_id]):
                lines.append(f"## SECTION: {sidx}")
                lines.append(p.text)
            lines.append("")
    lines.append(f"QUESTION: {query.text}")
    lines.append("SUMMARY:")
    return SummaryPrompt(
        text="\n".join(lines), template_id=template_id, n_summ_words=n_summ_words
    )


@dataclass(frozen=True)
class GenerationEndpoint:
    url: str
    retries: int = 0
    timeout: float = 120.0


def generate_summary(prompt: SummaryPrompt, endpoint: GenerationEndpoint,
                     session: requests.Session | None = None) -> str:
    """POST the prompt to the external generation endpoint and return the
    completion text verbatim. Requests and outcomes are logged."""
    session = session or requests.Session()
    payload = {"prompt": prompt.text, "max_words": prompt.n_summ_words}
    url = endpoint.url.rstrip("/") + "/v1/generate"
    last_error: Exception | None = None
    for attempt in range(endpoint.retries + 1):
        logger.info("generation request attempt %d to %s", attempt + 1, url)
        try:
            resp = session.post(url, json=payload, timeout=endpoint.timeout)
        except requests.RequestException as exc:
            last_error = GenerationError(f"generation transport failure: {exc}")
            logger.warning("generation attempt %d failed: %s", attempt + 1, exc)
            continue
        if resp.status_code // 100 != 2:
            last_error = GenerationError(
                f"generation endpoint returned HTTP {resp.status_code}"
            )
            logger.warning("generation attempt %d: HTTP %d", attempt + 1, resp.status_code)
            continue
        try:
            text = resp.json()["text"]
        except (ValueError, KeyError) as exc:
            raise GenerationError(f"malformed generation response: {exc}") from exc
        logger.info("generation succeeded (%d chars)", len(text))
        return text
    raise last_error if last_error is not None else GenerationError("generation failed")


def write_results(results: Sequence[RetrievalResult], path: str) -> None:
    """Results file: query_id, rank, passage_id, score, source per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for result in results:
            for rank, (hit, source) in enumerate(
                zip(result.all_hits(), result.sources()), start=1
            ):
                fh.write(
                    f"{result.query_id}\t{rank}\t{hit.passage_id}\t{hit.score:.17g}\t{source}\n"
                )


def read_results(path: str) -> dict[str, list[tuple[str, float, str]]]:
    """Read a results file back as query_id -> [(passage_id, score, source)]
    in rank order."""
    out: dict[str, list[tuple[int, str, float, str]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise CorpusError(f"{path}:{lineno}: malformed results line")
            qid, rank, pid, score, source = parts
            out.setdefault(qid, []).append((int(rank), pid, float(score), source))
    return {
        qid: [(pid, score, source) for _, pid, score, source in sorted(rows)]
        for qid, rows in out.items()
    }

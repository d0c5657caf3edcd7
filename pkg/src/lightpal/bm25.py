"""Okapi BM25 sparse retrieval over a passage corpus.

Scoring uses the non-negative IDF variant
``idf(t) = ln((N - df + 0.5) / (df + 0.5) + 1)`` and the usual term
saturation / length normalization with parameters ``k1`` and ``b``.
Scores are summed over query tokens (duplicates included), so repeated
query terms weigh proportionally.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, CorpusError, Query

# maximal runs of alphanumeric characters (unicode-aware, underscore excluded)
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

INDEX_MAGIC = "LPIDX1"

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75


def tokenize(text: str) -> list[str]:
    """Lowercase and split on maximal runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class ScoredHit:
    passage_id: str
    score: float


@dataclass
class LexicalIndex:
    """Inverted index: term -> sorted postings of (passage position, tf)."""

    postings: dict[str, list[tuple[int, int]]]
    doc_lengths: list[int]
    avg_length: float
    ids: tuple[str, ...]
    fingerprint: str

    @property
    def size(self) -> int:
        return len(self.doc_lengths)


def build_index(corpus: Corpus) -> LexicalIndex:
    if len(corpus) == 0:
        raise CorpusError("cannot build a lexical index over an empty corpus")
    postings: dict[str, list[tuple[int, int]]] = {}
    doc_lengths: list[int] = []
    for pos, passage in enumerate(corpus):
        tokens = tokenize(passage.text)
        doc_lengths.append(len(tokens))
        counts: dict[str, int] = {}
        for t in tokens:
            counts[t] = counts.get(t, 0) + 1
        for term, tf in counts.items():
            postings.setdefault(term, []).append((pos, tf))
    avg_length = sum(doc_lengths) / len(doc_lengths)
    return LexicalIndex(
        postings=postings,
        doc_lengths=doc_lengths,
        avg_length=avg_length,
        ids=corpus.ids(),
        fingerprint=corpus.fingerprint(),
    )


def _idf(n_docs: int, df: int) -> float:
    return math.log((n_docs - df + 0.5) / (df + 0.5) + 1.0)


def search(
    index: LexicalIndex,
    query: Query,
    top_n: int,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> list[ScoredHit]:
    """Rank passages by BM25, highest first; ties break on passage id.

    Passages with zero score are excluded, so fewer than ``top_n`` hits
    may be returned.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    n = index.size
    scores: dict[int, float] = {}
    for term in tokenize(query.text):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = _idf(n, len(plist))
        for pos, tf in plist:
            if index.avg_length > 0:
                norm = 1.0 - b + b * index.doc_lengths[pos] / index.avg_length
            else:
                norm = 1.0
            scores[pos] = scores.get(pos, 0.0) + idf * tf * (k1 + 1.0) / (tf + k1 * norm)
    hits = [
        ScoredHit(passage_id=index.ids[pos], score=s) for pos, s in scores.items() if s > 0.0
    ]
    hits.sort(key=lambda h: (-h.score, h.passage_id))
    return hits[:top_n]


def save_index(index: LexicalIndex, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{INDEX_MAGIC}\t{index.fingerprint}\t{index.size}\n")
        fh.write("\t".join(index.ids) + "\n")
        fh.write("\t".join(str(x) for x in index.doc_lengths) + "\n")
        for term in sorted(index.postings):
            cells = [f"{pos}:{tf}" for pos, tf in index.postings[term]]
            fh.write(term + "\t" + "\t".join(cells) + "\n")


def load_index(path: str | Path, corpus: Corpus | None = None) -> LexicalIndex:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if len(header) != 3 or header[0] != INDEX_MAGIC:
            raise CorpusError(f"{path}: not a {INDEX_MAGIC} index file")
        fingerprint, size = header[1], int(header[2])
        if corpus is not None and corpus.fingerprint() != fingerprint:
            raise CorpusError(f"{path}: index fingerprint does not match supplied corpus")
        ids = tuple(fh.readline().rstrip("\n").split("\t"))
        doc_lengths = [int(x) for x in fh.readline().rstrip("\n").split("\t")]
        if len(ids) != size or len(doc_lengths) != size:
            raise CorpusError(f"{path}: truncated index file")
        postings: dict[str, list[tuple[int, int]]] = {}
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            term, cells = parts[0], parts[1:]
            postings[term] = [
                (int(c.split(":")[0]), int(c.split(":")[1])) for c in cells
            ]
    avg_length = sum(doc_lengths) / len(doc_lengths) if doc_lengths else 0.0
    return LexicalIndex(
        postings=postings,
        doc_lengths=doc_lengths,
        avg_length=avg_length,
        ids=ids,
        fingerprint=fingerprint,
    )

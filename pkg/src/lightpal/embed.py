"""Embedding providers and brute-force cosine nearest-neighbor search.

Two deterministic, dependency-free providers are built in:

* ``HashedTfidfProvider`` — 65536-dimensional hashed bag-of-words. Terms
  are bucketed by ``crc32(term_utf8) & 0xFFFF`` and each bucket
  accumulates ``tf * idf``. IDF comes from document frequencies when the
  provider is fitted on a corpus, and is 1.0 otherwise.
* ``RandomProjectionProvider`` — each term maps to a fixed Gaussian
  vector seeded from the term hash; text embeds as the tf-weighted sum.

Nearest-neighbor search is exact (full scan); corpora at the intended
scale (tens of thousands of passages) keep this fast and approximation-free.
"""

from __future__ import annotations

import io
import zlib
from typing import Iterable, Protocol, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus, CorpusError, Query
from .bm25 import ScoredHit, tokenize

HASHED_DIM = 65536
VECTOR_MAGIC = "LPVEC1"


class EmbeddingProvider(Protocol):
    """Deterministic text -> fixed-dimension vector mapping."""

    @property
    def name(self) -> str: ...

    @property
    def dimension(self) -> int: ...

    def embed(self, text: str) -> np.ndarray: ...


def _bucket(term: str) -> int:
    return zlib.crc32(term.encode("utf-8")) & 0xFFFF


class HashedTfidfProvider:
    """Hashed TF-IDF embeddings; stateless unless fitted with df stats."""

    def __init__(self) -> None:
        self._idf: dict[str, float] | None = None
        self._default_idf = 1.0

    @property
    def name(self) -> str:
        return "hashed-tfidf"

    @property
    def dimension(self) -> int:
        return HASHED_DIM

    def fit(self, texts: Iterable[str]) -> "HashedTfidfProvider":
        df: dict[str, int] = {}
        n = 0
        for text in texts:
            n += 1
            for term in set(tokenize(text)):
                df[term] = df.get(term, 0) + 1
        self._idf = {t: np.log((n + 1) / (d + 1)) + 1.0 for t, d in df.items()}
        self._default_idf = np.log(float(n + 1)) + 1.0
        return self

    def _term_weights(self, text: str) -> dict[int, float]:
        counts: dict[str, int] = {}
        for t in tokenize(text):
            counts[t] = counts.get(t, 0) + 1
        weights: dict[int, float] = {}
        for term, tf in counts.items():
            if self._idf is None:
                idf = 1.0
            else:
                idf = self._idf.get(term, self._default_idf)
            b = _bucket(term)
            weights[b] = weights.get(b, 0.0) + tf * idf
        return weights

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(HASHED_DIM, dtype=np.float64)
        for b, w in self._term_weights(text).items():
            vec[b] = w
        return vec

    def embed_many_sparse(self, texts: Sequence[str]) -> sp.csr_matrix:
        data: list[float] = []
        indices: list[int] = []
        indptr = [0]
        for text in texts:
            weights = self._term_weights(text)
            for b in sorted(weights):
                indices.append(b)
                data.append(weights[b])
            indptr.append(len(indices))
        return sp.csr_matrix(
            (np.asarray(data), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
            shape=(len(texts), HASHED_DIM),
        )


def embed_hashed_tfidf(text: str) -> np.ndarray:
    """Corpus-free hashed TF-IDF embedding (idf taken as 1)."""
    return HashedTfidfProvider().embed(text)


class RandomProjectionProvider:
    """Fixed random-projection embeddings; used to exercise provider
    pluggability without corpus statistics."""

    def __init__(self, dimension: int = 256, seed: int = 0) -> None:
        self._dim = dimension
        self._seed = seed
        self._cache: dict[str, np.ndarray] = {}

    @property
    def name(self) -> str:
        return f"random-projection-{self._dim}-{self._seed}"

    @property
    def dimension(self) -> int:
        return self._dim

    def _term_vector(self, term: str) -> np.ndarray:
        cached = self._cache.get(term)
        if cached is None:
            rng = np.random.default_rng((zlib.crc32(term.encode("utf-8")), self._seed))
            cached = rng.standard_normal(self._dim)
            self._cache[term] = cached
        return cached

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self._dim, dtype=np.float64)
        for t in tokenize(text):
            vec += self._term_vector(t)
        return vec


class VectorIndex:
    """Unit-normalized passage vectors aligned to corpus positions.

    Zero vectors are stored as zero rows and never rank as neighbors.
    """

    def __init__(self, matrix: sp.csr_matrix, ids: tuple[str, ...],
                 provider_tag: str, fingerprint: str):
        if matrix.shape[0] != len(ids):
            raise ValueError("matrix rows must align with passage ids")
        self.matrix = matrix
        self.ids = ids
        self.provider_tag = provider_tag
        self.fingerprint = fingerprint

    def __len__(self) -> int:
        return len(self.ids)


def _normalize_rows(matrix: sp.csr_matrix) -> sp.csr_matrix:
    norms = np.sqrt(np.asarray(matrix.multiply(matrix).sum(axis=1)).ravel())
    inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    return sp.diags(inv) @ matrix


def build_vector_index(corpus: Corpus, provider: EmbeddingProvider) -> VectorIndex:
    if len(corpus) == 0:
        raise CorpusError("cannot build a vector index over an empty corpus")
    texts = [p.text for p in corpus]
    if hasattr(provider, "embed_many_sparse"):
        matrix = provider.embed_many_sparse(texts)
    else:
        matrix = sp.csr_matrix(np.vstack([provider.embed(t) for t in texts]))
    matrix = sp.csr_matrix(_normalize_rows(matrix))
    return VectorIndex(
        matrix=matrix,
        ids=corpus.ids(),
        provider_tag=provider.name,
        fingerprint=corpus.fingerprint(),
    )


def _ranked_hits(index: VectorIndex, sims: np.ndarray, exclude: int | None,
                 limit: int) -> list[tuple[int, float]]:
    norms_nonzero = np.asarray(index.matrix.multiply(index.matrix).sum(axis=1)).ravel() > 0
    candidates = [
        (pos, float(sims[pos]))
        for pos in range(len(index.ids))
        if pos != exclude and norms_nonzero[pos]
    ]
    candidates.sort(key=lambda c: (-c[1], index.ids[c[0]]))
    return candidates[:limit]


def top_k_similar(index: VectorIndex, source: int, k_prime: int) -> list[tuple[int, float]]:
    """Exact top-k' cosine neighbors of a passage, source excluded."""
    if len(index) == 0:
        raise CorpusError("vector index is empty")
    if not 0 <= source < len(index):
        raise IndexError(f"source position {source} out of range")
    if k_prime < 1:
        raise ValueError("k_prime must be >= 1")
    row = index.matrix.getrow(source)
    sims = np.asarray((index.matrix @ row.T).todense()).ravel()
    return _ranked_hits(index, sims, exclude=source, limit=k_prime)


def search_dense(index: VectorIndex, provider: EmbeddingProvider, query: Query,
                 top_n: int) -> list[ScoredHit]:
    """Cosine-ranked retrieval; zero-similarity passages are excluded."""
    if provider.name != index.provider_tag:
        raise ValueError(
            f"provider {provider.name!r} does not match index tag {index.provider_tag!r}"
        )
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    qv = provider.embed(query.text)
    norm = float(np.linalg.norm(qv))
    if norm == 0.0:
        return []
    qv = qv / norm
    sims = index.matrix @ qv
    ranked = _ranked_hits(index, np.asarray(sims).ravel(), exclude=None, limit=top_n)
    return [
        ScoredHit(passage_id=index.ids[pos], score=s) for pos, s in ranked if s > 0.0
    ]


def save_vector_index(index: VectorIndex, path: str) -> None:
    header = f"{VECTOR_MAGIC}\t{index.provider_tag}\t{index.fingerprint}\n"
    buf = io.BytesIO()
    sp.save_npz(buf, index.matrix)
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write("\t".join(index.ids).encode("utf-8") + b"\n")
        fh.write(buf.getvalue())


def load_vector_index(path: str, corpus: Corpus | None = None) -> VectorIndex:
    with open(path, "rb") as fh:
        header = fh.readline().decode("utf-8").rstrip("\n").split("\t")
        if len(header) != 3 or header[0] != VECTOR_MAGIC:
            raise CorpusError(f"{path}: not a {VECTOR_MAGIC} vector file")
        provider_tag, fingerprint = header[1], header[2]
        if corpus is not None and corpus.fingerprint() != fingerprint:
            raise CorpusError(f"{path}: vector index fingerprint does not match corpus")
        ids = tuple(fh.readline().decode("utf-8").rstrip("\n").split("\t"))
        matrix = sp.load_npz(io.BytesIO(fh.read()))
    return VectorIndex(sp.csr_matrix(matrix), ids, provider_tag, fingerprint)

"""Deterministic synthetic corpora for experiments and acceptance checks.

Two generators:

* ``cyclic_chunked_corpus`` — documents whose token stream is a repeated
  cycle over a document-private vocabulary, split into equal-size chunks
  with ``chunk_document``. By construction the only candidate whose first
  token continues a chunk's last token is the chunk's true successor, so
  a bigram scorer must rank the successor first. Used for
  continuation-recovery checks.
* ``story_corpus`` — stories of consecutive chapters sharing a per-story
  topic vocabulary and a per-story hub token at chapter boundaries; each
  chapter additionally carries one distinctive keyword that appears
  nowhere else. Queries name exactly one chapter's keyword while every
  chapter of that story is relevant, so keyword search alone recalls at
  most 1/n_chapters and graph expansion must recover the rest.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus, Passage, QrelSet, Query, chunk_document


@dataclass
class SyntheticData:
    corpus: Corpus
    queries: list[Query]
    qrels: QrelSet


def cyclic_chunked_corpus(n_docs: int = 50, cycle_len: int = 17,
                          reps: int = 16, chunk_tokens: int = 16) -> Corpus:
    """Chunked documents with unambiguous intra-document continuation.

    Every token is 6 characters, so ``chunk_document`` with
    ``chunk_chars = 7 * chunk_tokens`` yields equal-token chunks.
    ``chunk_tokens`` must not be a multiple of ``cycle_len`` (identical
    chunks would otherwise repeat) and ``cycle_len * reps`` must be a
    multiple of ``chunk_tokens`` so all chunks are full.
    """
    total = cycle_len * reps
    if total % chunk_tokens == 0 and chunk_tokens % cycle_len == 0:
        raise ValueError("chunk_tokens must not align with the cycle")
    passages: list[Passage] = []
    for d in range(n_docs):
        words = [f"d{d:02d}w{i:02d}" for i in range(cycle_len)]
        tokens = [words[i % cycle_len] for i in range(total)]
        text = " ".join(tokens)
        passages.extend(chunk_document(f"doc{d:02d}", text, chunk_chars=7 * chunk_tokens))
    return Corpus(passages)


def story_corpus(n_stories: int = 50, n_chapters: int = 8,
                 n_topic_words: int = 12, body_tokens: int = 48) -> SyntheticData:
    """Stories with chapter-level keywords and story-level topic cohesion."""
    passages: list[Passage] = []
    queries: list[Query] = []
    relevant: dict[str, frozenset[str]] = {}
    for s in range(n_stories):
        doc_id = f"story{s:02d}"
        hub = f"hub{s:02d}x"
        topic = [f"s{s:02d}t{j:02d}" for j in range(n_topic_words)]
        offset = 0
        for c in range(n_chapters):
            body = [topic[(c * 5 + i) % n_topic_words] for i in range(body_tokens)]
            body[body_tokens // 2] = f"kw{s:02d}c{c}"
            text = " ".join([hub] + body + [hub])
            passages.append(
                Passage(id=f"{doc_id}#{c}", doc_id=doc_id, text=text, offset=offset)
            )
            offset += len(text) + 1
        query_chapter = s % n_chapters
        qid = f"q{s:02d}"
        queries.append(Query(id=qid, text=f"kw{s:02d}c{query_chapter}"))
        relevant[qid] = frozenset(f"{doc_id}#{c}" for c in range(n_chapters))
    return SyntheticData(
        corpus=Corpus(passages), queries=queries, qrels=QrelSet(relevant=relevant)
    )

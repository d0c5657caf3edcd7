"""Passage collections, queries, and relevance judgments.

File formats (all UTF-8, tab-separated, one record per line):

* passages: ``id<TAB>doc_id<TAB>text`` with newlines in ``text`` escaped
  as ``\\n`` (tabs as ``\\t``, backslashes as ``\\\\``).
* queries:  ``id<TAB>text``.
* qrels:    ``query_id<TAB>passage_or_doc_id<TAB>relevance`` with
  relevance in {0, 1}; only 1-lines are loaded as relevant.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator


class CorpusError(ValueError):
    """Malformed or inconsistent corpus / query / qrels data."""


@dataclass(frozen=True)
class Passage:
    id: str
    doc_id: str
    text: str
    offset: int = 0


@dataclass(frozen=True)
class Query:
    id: str
    text: str


class Corpus:
    """Ordered, immutable passage collection with id -> position lookup."""

    def __init__(self, passages: Iterable[Passage]):
        self.passages: tuple[Passage, ...] = tuple(passages)
        self._pos: dict[str, int] = {}
        for i, p in enumerate(self.passages):
            if p.id in self._pos:
                raise CorpusError(f"duplicate passage id: {p.id!r}")
            if not p.text.strip():
                raise CorpusError(f"passage {p.id!r} has empty text")
            if p.offset < 0:
                raise CorpusError(f"passage {p.id!r} has negative offset")
            self._pos[p.id] = i

    def __len__(self) -> int:
        return len(self.passages)

    def __iter__(self) -> Iterator[Passage]:
        return iter(self.passages)

    def __getitem__(self, position: int) -> Passage:
        return self.passages[position]

    def position(self, passage_id: str) -> int:
        try:
            return self._pos[passage_id]
        except KeyError:
            raise CorpusError(f"unknown passage id: {passage_id!r}") from None

    def __contains__(self, passage_id: str) -> bool:
        return passage_id in self._pos

    def ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.passages)

    def fingerprint(self) -> str:
        """Stable hex digest of the full passage content, used to pair
        persisted indexes/graphs with the corpus they were built from."""
        h = hashlib.sha256()
        for p in self.passages:
            h.update(p.id.encode("utf-8"))
            h.update(b"\x1f")
            h.update(p.doc_id.encode("utf-8"))
            h.update(b"\x1f")
            h.update(str(p.offset).encode("ascii"))
            h.update(b"\x1f")
            h.update(p.text.encode("utf-8"))
            h.update(b"\x1e")
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class QrelSet:
    """Query id -> set of relevant passage ids."""

    relevant: dict[str, frozenset[str]]

    def for_query(self, query_id: str) -> frozenset[str]:
        return self.relevant.get(query_id, frozenset())


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unescape(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            if nxt == "n":
                out.append("\n")
                i += 2
                continue
            if nxt == "t":
                out.append("\t")
                i += 2
                continue
            if nxt == "\\":
                out.append("\\")
                i += 2
                continue
        out.append(c)
        i += 1
    return "".join(out)


def load_corpus(path: str | Path) -> Corpus:
    """Load a passage file; reports the offending line number on error."""
    passages: list[Passage] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise CorpusError(
                    f"{path}:{lineno}: expected 3 tab-separated fields, got {len(parts)}"
                )
            pid, doc_id, raw = parts
            if pid in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate passage id {pid!r}")
            text = _unescape(raw)
            if not text.strip():
                raise CorpusError(f"{path}:{lineno}: passage {pid!r} has empty text")
            seen.add(pid)
            passages.append(Passage(id=pid, doc_id=doc_id, text=text))
    return Corpus(passages)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in corpus:
            fh.write(f"{p.id}\t{p.doc_id}\t{_escape(p.text)}\n")


def load_queries(path: str | Path) -> list[Query]:
    queries: list[Query] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusError(
                    f"{path}:{lineno}: expected 2 tab-separated fields, got {len(parts)}"
                )
            qid, text = parts
            if qid in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate query id {qid!r}")
            if not _unescape(text).strip():
                raise CorpusError(f"{path}:{lineno}: query {qid!r} has empty text")
            seen.add(qid)
            queries.append(Query(id=qid, text=_unescape(text)))
    return queries


def chunk_document(doc_id: str, text: str, chunk_chars: int) -> list[Passage]:
    """Split ``text`` into contiguous chunks of at least ``chunk_chars``
    characters, extending each boundary forward so it never falls inside
    a run of non-whitespace. Joining the chunk texts reproduces the input
    exactly. Chunk ids are ``{doc_id}#{index}``.
    """
    if chunk_chars < 1:
        raise ValueError("chunk_chars must be >= 1")
    chunks: list[Passage] = []
    start = 0
    n = len(text)
    while start < n:
        end = min(start + chunk_chars, n)
        # a cut is legal at the end of the text or when it does not split
        # a non-whitespace run
        while end < n and not text[end - 1].isspace() and not text[end].isspace():
            end += 1
        piece = text[start:end]
        if chunks and not piece.strip():
            # fold a whitespace-only tail into the previous chunk so every
            # chunk stays a valid (non-blank) passage
            prev = chunks[-1]
            chunks[-1] = Passage(
                id=prev.id, doc_id=doc_id, text=prev.text + piece, offset=prev.offset
            )
        else:
            chunks.append(
                Passage(
                    id=f"{doc_id}#{len(chunks)}",
                    doc_id=doc_id,
                    text=piece,
                    offset=start,
                )
            )
        start = end
    return chunks


def load_qrels(path: str | Path, corpus: Corpus) -> QrelSet:
    """Load relevance judgments, expanding doc-level ids to every passage
    whose id has the ``{doc_id}#`` prefix."""
    by_doc: dict[str, list[str]] = {}
    for p in corpus:
        if "#" in p.id:
            by_doc.setdefault(p.id.split("#", 1)[0], []).append(p.id)

    relevant: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise CorpusError(
                    f"{path}:{lineno}: expected 3 tab-separated fields, got {len(parts)}"
                )
            qid, pid, rel = parts
            if rel not in ("0", "1"):
                raise CorpusError(f"{path}:{lineno}: relevance must be 0 or 1, got {rel!r}")
            if rel == "0":
                continue
            if pid in corpus:
                relevant.setdefault(qid, set()).add(pid)
            elif pid in by_doc:
                relevant.setdefault(qid, set()).update(by_doc[pid])
            else:
                raise CorpusError(f"{path}:{lineno}: unknown passage or doc id {pid!r}")
    return QrelSet(relevant={q: frozenset(s) for q, s in relevant.items()})


def save_qrels(qrels: QrelSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for qid in sorted(qrels.relevant):
            for pid in sorted(qrels.relevant[qid]):
                fh.write(f"{qid}\t{pid}\t1\n")


def save_queries(queries: list[Query], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in queries:
            fh.write(f"{q.id}\t{_escape(q.text)}\n")

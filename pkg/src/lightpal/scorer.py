"""Context scoring: log P(target passage | context passage).

Scores stay in log space throughout (linear-space probabilities underflow
for long targets; rankings are unchanged). Two scorers are provided:

* ``NgramLm`` — add-one-smoothed token n-gram model (bigram by default)
  trained on the ingested corpus itself. Deterministic and dependency-free;
  consecutive chunks of one document genuinely score high because the
  model is trained on per-document concatenated text, so cross-chunk
  transitions are seen during training.
* ``RemoteScorer`` — HTTP client for a causal-LM scoring service
  (``POST /v1/score``, ``GET /v1/health``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

import requests

from .bm25 import tokenize
from .corpus import Corpus, Passage

UNK = "\x00unk"


class ScorerError(RuntimeError):
    """Scoring failed; carries the identity of the offending pair."""


@dataclass(frozen=True)
class TruncationPolicy:
    """Combined token budget for a (context, target) pair.

    ``context_share`` of the budget goes to the context (its tail is
    kept); the rest goes to the target (its head is kept).
    """

    combined_budget: int = 1024
    context_share: float = 0.5

    def __post_init__(self) -> None:
        if self.combined_budget < 2:
            raise ValueError("combined_budget must be >= 2")
        if not 0.0 < self.context_share < 1.0:
            raise ValueError("context_share must be in (0, 1)")

    @property
    def context_budget(self) -> int:
        return int(self.combined_budget * self.context_share)

    @property
    def target_budget(self) -> int:
        return self.combined_budget - self.context_budget


def truncate_pair(context: str, target: str, policy: TruncationPolicy) -> tuple[str, str]:
    """Word-level truncation: keep the context tail and the target head.

    Texts already within their budgets pass through unchanged.
    """
    ctx_tokens = context.split()
    tgt_tokens = target.split()
    if len(ctx_tokens) > policy.context_budget:
        context = " ".join(ctx_tokens[-policy.context_budget:])
    if len(tgt_tokens) > policy.target_budget:
        target = " ".join(tgt_tokens[:policy.target_budget])
    return context, target


class ContextScorer(Protocol):
    def score_pair(self, context: str, target: str) -> float: ...

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]: ...


class NgramLm:
    """Add-one-smoothed token n-gram language model.

    Conditional probabilities are over the training vocabulary plus a
    single unknown bucket, so they sum to 1 for every history and no
    log-probability is ever -inf.
    """

    def __init__(self, order: int = 2):
        if order < 1:
            raise ValueError("order must be >= 1")
        self.order = order
        self._counts: dict[tuple[str, ...], dict[str, int]] = {}
        self._totals: dict[tuple[str, ...], int] = {}
        self._vocab: set[str] = set()

    @property
    def vocab_size(self) -> int:
        # training vocabulary plus the unknown bucket
        return len(self._vocab) + 1

    def train(self, texts: Iterable[str]) -> "NgramLm":
        for text in texts:
            tokens = tokenize(text)
            self._vocab.update(tokens)
            for i, token in enumerate(tokens):
                for hlen in range(0, self.order):
                    if hlen > i:
                        break
                    history = tuple(tokens[i - hlen:i])
                    bucket = self._counts.setdefault(history, {})
                    bucket[token] = bucket.get(token, 0) + 1
                    self._totals[history] = self._totals.get(history, 0) + 1
        return self

    @classmethod
    def from_corpus(cls, corpus: Corpus, order: int = 2) -> "NgramLm":
        """Train on per-document concatenated text so transitions across
        chunk boundaries of the same document are observed."""
        docs: dict[str, list[Passage]] = {}
        for p in corpus:
            docs.setdefault(p.doc_id, []).append(p)
        texts = [
            " ".join(p.text for p in sorted(ps, key=lambda p: p.offset))
            for ps in docs.values()
        ]
        return cls(order=order).train(texts)

    def _canon(self, token: str) -> str:
        return token if token in self._vocab else UNK

    def log_prob(self, token: str, history: tuple[str, ...]) -> float:
        token = self._canon(token)
        history = tuple(self._canon(t) for t in history[-(self.order - 1):]) if self.order > 1 else ()
        count = self._counts.get(history, {}).get(token, 0)
        total = self._totals.get(history, 0)
        return math.log((count + 1) / (total + self.vocab_size))

    def score_pair(self, context: str, target: str) -> float:
        ctx_tokens = tokenize(context)
        tgt_tokens = tokenize(target)
        if not tgt_tokens:
            return 0.0  # empty product
        tokens = ctx_tokens + tgt_tokens
        start = len(ctx_tokens)
        total = 0.0
        for i in range(start, len(tokens)):
            history = tuple(tokens[max(0, i - self.order + 1):i])
            total += self.log_prob(tokens[i], history)
        return total

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        return [self.score_pair(c, t) for c, t in pairs]


class CountingScorer:
    """Wraps a scorer and counts pair evaluations (build-cost assertions)."""

    def __init__(self, inner: ContextScorer):
        self.inner = inner
        self.calls = 0

    def score_pair(self, context: str, target: str) -> float:
        self.calls += 1
        return self.inner.score_pair(context, target)

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        self.calls += len(pairs)
        return self.inner.score_batch(pairs)


class RemoteScorer:
    """Client for the remote causal-LM scoring service.

    Wire protocol: ``POST {base_url}/v1/score`` with body
    ``{"pairs":[{"context":str,"target":str}],"max_total_tokens":int}``,
    response ``{"scores":[{"logprob":float,"target_tokens":int}]}``.
    """

    def __init__(self, base_url: str, max_total_tokens: int = 1024,
                 timeout: float = 60.0, session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.max_total_tokens = max_total_tokens
        self.timeout = timeout
        self._session = session or requests.Session()

    def health(self) -> dict:
        try:
            resp = self._session.get(f"{self.base_url}/v1/health", timeout=self.timeout)
        except requests.RequestException as exc:
            raise ScorerError(f"health check failed: {exc}") from exc
        if resp.status_code != 200:
            raise ScorerError(f"health check returned HTTP {resp.status_code}")
        body = resp.json()
        if not body.get("ok"):
            raise ScorerError(f"scorer service unhealthy: {body!r}")
        return body

    def _post(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        payload = {
            "pairs": [{"context": c, "target": t} for c, t in pairs],
            "max_total_tokens": self.max_total_tokens,
        }
        try:
            resp = self._session.post(
                f"{self.base_url}/v1/score", json=payload, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise ScorerError(f"scorer transport failure: {exc}") from exc
        if resp.status_code // 100 != 2:
            raise ScorerError(f"scorer service returned HTTP {resp.status_code}")
        try:
            body = resp.json()
            scores = [float(entry["logprob"]) for entry in body["scores"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise ScorerError(f"malformed scorer response: {exc}") from exc
        if len(scores) != len(pairs):
            raise ScorerError(
                f"scorer returned {len(scores)} scores for {len(pairs)} pairs"
            )
        return scores

    def score_pair(self, context: str, target: str) -> float:
        return self._post([(context, target)])[0]

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        return self._post(pairs)


def context_score(scorer: ContextScorer, d_i: Passage, d_j: Passage,
                  policy: TruncationPolicy, normalize: bool = False) -> float:
    """log P(d_j | d_i) after truncation; <= 0 for any smoothed scorer.

    ``normalize=True`` divides by the target token count (off by default;
    edge ranking uses the raw log-probability).
    """
    if d_i.id == d_j.id:
        raise ValueError(f"context and target are the same passage: {d_i.id!r}")
    context, target = truncate_pair(d_i.text, d_j.text, policy)
    try:
        score = scorer.score_pair(context, target)
    except ScorerError as exc:
        raise ScorerError(f"scoring pair ({d_i.id!r}, {d_j.id!r}) failed: {exc}") from exc
    if normalize:
        n = len(tokenize(target))
        if n > 0:
            score /= n
    return score


def score_batch(scorer: ContextScorer, pairs: Sequence[tuple[Passage, Passage]],
                policy: TruncationPolicy) -> list[float]:
    """Order-preserving batch scoring; a failure aborts with the index of
    the failing pair."""
    if not pairs:
        raise ValueError("pairs must be non-empty")
    truncated = [truncate_pair(d_i.text, d_j.text, policy) for d_i, d_j in pairs]
    try:
        return scorer.score_batch(truncated)
    except ScorerError:
        # fall back to pairwise scoring to identify the failing index
        results: list[float] = []
        for idx, (context, target) in enumerate(truncated):
            try:
                results.append(scorer.score_pair(context, target))
            except ScorerError as exc:
                d_i, d_j = pairs[idx]
                raise ScorerError(
                    f"batch failed at index {idx} (pair {d_i.id!r}, {d_j.id!r}): {exc}"
                ) from exc
        return results

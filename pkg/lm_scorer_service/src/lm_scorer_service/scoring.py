"""Causal-LM pair scoring with combined-budget truncation.

The score of a (context, target) pair is the sum of token log-probabilities
of the target conditioned on the context, computed in a single forward pass
with no sampling. Context and target share a token budget: the context
keeps its tail, the target keeps its head, and the two are joined with a
single newline before the model sees them.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from transformers import AutoModelForCausalLM, AutoTokenizer

CONTEXT_SHARE = 0.5


@dataclass(frozen=True)
class PairScore:
    logprob: float
    target_tokens: int


class ModelScorer:
    """Loads a causal LM once; scoring holds no mutable state."""

    def __init__(self, model_id: str, max_total_tokens: int = 1024):
        if max_total_tokens < 2:
            raise ValueError("max_total_tokens must be >= 2")
        self.model_id = model_id
        self.max_total_tokens = max_total_tokens
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForCausalLM.from_pretrained(model_id)
        self.model.eval()
        # never feed the model more positions than it supports
        self._position_limit = getattr(self.model.config,
                                       "max_position_embeddings", None)

    def _encode(self, text: str) -> list[int]:
        return self.tokenizer.encode(text, add_special_tokens=False)

    def _truncate(self, context_ids: list[int], target_ids: list[int],
                  budget: int) -> tuple[list[int], list[int]]:
        context_budget = int(budget * CONTEXT_SHARE)
        context_ids = context_ids[-context_budget:] if context_budget else []
        target_ids = target_ids[:budget - len(context_ids)]
        return context_ids, target_ids

    @torch.no_grad()
    def score_pair(self, context: str, target: str,
                   max_total_tokens: int | None = None) -> PairScore:
        budget = max_total_tokens or self.max_total_tokens
        if self._position_limit:
            budget = min(budget, self._position_limit)
        target_ids = self._encode(target)
        if not target_ids:
            return PairScore(logprob=0.0, target_tokens=0)
        # the newline separator belongs to the conditioning side
        context_ids = self._encode(context + "\n")
        context_ids, target_ids = self._truncate(context_ids, target_ids, budget)
        if not target_ids:
            return PairScore(logprob=0.0, target_tokens=0)
        if not context_ids:
            # a causal LM needs at least one conditioning position
            bos = self.tokenizer.bos_token_id
            if bos is None:
                bos = self.tokenizer.eos_token_id or 0
            context_ids = [bos]

        input_ids = torch.tensor([context_ids + target_ids])
        logits = self.model(input_ids).logits[0]
        log_probs = torch.log_softmax(logits.double(), dim=-1)
        total = 0.0
        offset = len(context_ids)
        for i, token_id in enumerate(target_ids):
            total += log_probs[offset + i - 1, token_id].item()
        return PairScore(logprob=total, target_tokens=len(target_ids))

    def score_batch(self, pairs: list[tuple[str, str]],
                    max_total_tokens: int | None = None) -> list[PairScore]:
        # pairs are scored independently, so a batch can never contaminate
        # its neighbours and batch results equal one-at-a-time results
        return [self.score_pair(c, t, max_total_tokens) for c, t in pairs]

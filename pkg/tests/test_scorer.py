import math

import pytest
from hypothesis import given, strategies as st

from lightpal.corpus import Corpus, Passage
from lightpal.scorer import (
    CountingScorer,
    NgramLm,
    ScorerError,
    TruncationPolicy,
    context_score,
    score_batch,
    truncate_pair,
)


class TestTruncationPolicy:
    def test_defaults(self):
        policy = TruncationPolicy()
        assert policy.combined_budget == 1024
        assert policy.context_budget == 512
        assert policy.target_budget == 512

    def test_invalid_share(self):
        with pytest.raises(ValueError):
            TruncationPolicy(context_share=1.0)

    def test_invalid_budget(self):
        with pytest.raises(ValueError):
            TruncationPolicy(combined_budget=1)


class TestTruncatePair:
    def test_under_budget_unchanged(self):
        ctx = " ".join(["w"] * 100)
        tgt = " ".join(["v"] * 100)
        assert truncate_pair(ctx, tgt, TruncationPolicy()) == (ctx, tgt)

    def test_context_keeps_tail(self):
        ctx = " ".join(f"c{i}" for i in range(2000))
        out, _ = truncate_pair(ctx, "t", TruncationPolicy())
        tokens = out.split()
        assert len(tokens) == 512
        assert tokens[0] == "c1488" and tokens[-1] == "c1999"

    def test_target_keeps_head(self):
        tgt = " ".join(f"t{i}" for i in range(2000))
        _, out = truncate_pair("c", tgt, TruncationPolicy())
        tokens = out.split()
        assert len(tokens) == 512
        assert tokens[0] == "t0" and tokens[-1] == "t511"

    def test_uneven_split(self):
        policy = TruncationPolicy(combined_budget=10, context_share=0.3)
        ctx = " ".join(["c"] * 20)
        tgt = " ".join(["t"] * 20)
        out_ctx, out_tgt = truncate_pair(ctx, tgt, policy)
        assert len(out_ctx.split()) == 3
        assert len(out_tgt.split()) == 7


class TestNgramLm:
    def test_hand_derived_bigram(self):
        # trained on "a b c": vocab {a,b,c} + unk, add-one smoothing
        lm = NgramLm(order=2).train(["a b c"])
        score = lm.score_pair("a", "b c")
        assert score == pytest.approx(math.log((2 / 5) * (2 / 5)), abs=1e-12)

    def test_empty_target_scores_zero(self):
        lm = NgramLm().train(["a b c"])
        assert lm.score_pair("a b", "") == 0.0

    def test_conditionals_sum_to_one(self):
        lm = NgramLm().train(["the cat sat", "the cat ran", "a dog sat"])
        vocab = {"the", "cat", "sat", "ran", "a", "dog", "nonsense"}
        for history in [("the",), ("cat",), ("zzz",), ()]:
            total = sum(math.exp(lm.log_prob(w, history)) for w in vocab)
            # 'nonsense' and 'zzz' fold into the single unknown bucket
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_forced_continuation_dominance(self):
        lm = NgramLm().train(["x y"] * 10 + ["q r"])
        high = lm.score_pair("w x", "y")
        low = lm.score_pair("w x", "z")
        assert high > low

    def test_length_monotonicity(self):
        lm = NgramLm().train(["a b c d e"])
        short = lm.score_pair("a", "b c")
        longer = lm.score_pair("a", "b c d")
        assert longer <= short

    def test_unknown_tokens_finite(self):
        lm = NgramLm().train(["a b"])
        assert math.isfinite(lm.score_pair("zzz qqq", "www vvv"))

    def test_from_corpus_sees_cross_chunk_transitions(self):
        corpus = Corpus([
            Passage("d#0", "d", "alpha beta", offset=0),
            Passage("d#1", "d", "gamma delta", offset=11),
        ])
        lm = NgramLm.from_corpus(corpus)
        # "beta gamma" spans the chunk boundary of document d
        assert lm.score_pair("alpha beta", "gamma") > lm.score_pair("alpha beta", "delta")


class TestContextScore:
    @pytest.fixture
    def lm(self):
        return NgramLm().train(["a b c d"])

    def test_same_passage_rejected(self, lm):
        p = Passage("x", "d", "a b")
        with pytest.raises(ValueError):
            context_score(lm, p, p, TruncationPolicy())

    def test_is_log_prob(self, lm):
        score = context_score(lm, Passage("i", "d", "a"), Passage("j", "d", "b c"),
                              TruncationPolicy())
        assert score <= 0.0
        assert math.isfinite(score)

    def test_normalization_option(self, lm):
        d_i = Passage("i", "d", "a")
        d_j = Passage("j", "d", "b c")
        raw = context_score(lm, d_i, d_j, TruncationPolicy())
        per_token = context_score(lm, d_i, d_j, TruncationPolicy(), normalize=True)
        assert per_token == pytest.approx(raw / 2)


class _FailingScorer:
    def __init__(self, poison):
        self.poison = poison

    def score_pair(self, context, target):
        if self.poison in target:
            raise ScorerError("boom")
        return -1.0

    def score_batch(self, pairs):
        return [self.score_pair(c, t) for c, t in pairs]


class TestScoreBatch:
    @pytest.fixture
    def pairs(self):
        p = [Passage(f"p{i}", "d", f"a b c token{i}") for i in range(4)]
        return [(p[0], p[1]), (p[0], p[2]), (p[1], p[3])]

    def test_batch_equals_pairwise_exactly(self, pairs):
        lm = NgramLm().train(["a b c token1 token2 token3"])
        policy = TruncationPolicy()
        batch = score_batch(lm, pairs, policy)
        single = [context_score(lm, i, j, policy) for i, j in pairs]
        assert batch == single  # exact equality, not approximate

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            score_batch(NgramLm().train(["a"]), [], TruncationPolicy())

    def test_order_preserved(self, pairs):
        lm = NgramLm().train(["a b c token1 token2 token3"])
        policy = TruncationPolicy()
        forward = score_batch(lm, pairs, policy)
        backward = score_batch(lm, list(reversed(pairs)), policy)
        assert forward == list(reversed(backward))

    def test_failure_reports_index(self, pairs):
        scorer = _FailingScorer(poison="token2")  # pairs[1] targets p2
        with pytest.raises(ScorerError, match="index 1"):
            score_batch(scorer, pairs, TruncationPolicy())

    def test_counting_wrapper(self, pairs):
        counter = CountingScorer(NgramLm().train(["a b"]))
        score_batch(counter, pairs, TruncationPolicy())
        assert counter.calls == len(pairs)


@given(st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=8))
def test_appending_token_never_increases_logprob(target_tokens):
    lm = NgramLm().train(["a b c a b", "c c a"])
    target = " ".join(target_tokens)
    extended = target + " a"
    assert lm.score_pair("b", extended) <= lm.score_pair("b", target)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lightpal.bm25 import ScoredHit
from lightpal.graph import PassageGraph
from lightpal.ppr import PprConfig, context_retrieve, ppr_scores

from oracles import dense_ppr


def make_graph(n, edges):
    ids = tuple(f"p{i:03d}" for i in range(n))
    adjacency = [[] for _ in range(n)]
    for src, dst in edges:
        adjacency[src].append((dst, -1.0))
    return PassageGraph(ids=ids, fingerprint="test", adjacency=adjacency,
                        k=5, k_prime=100)


class TestPprScores:
    def test_single_node_fixed_point(self):
        graph = make_graph(1, [])
        result = ppr_scores(graph, [0], PprConfig())
        assert result.scores[0] == pytest.approx(1.0, abs=1e-12)
        assert result.converged
        assert result.iterations <= 2

    def test_alpha_to_zero_gives_personalization(self):
        graph = make_graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        result = ppr_scores(graph, [0, 2], PprConfig(alpha=1e-12))
        expected = np.array([0.5, 0.0, 0.5, 0.0])
        assert np.allclose(result.scores, expected, atol=1e-9)

    def test_three_node_cycle_matches_linear_solve(self):
        edges = [(0, 1), (1, 2), (2, 0)]
        graph = make_graph(3, edges)
        result = ppr_scores(graph, [0], PprConfig(alpha=0.2))
        expected = dense_ppr(3, edges, [0], alpha=0.2)
        # frozen from the dense solve: p0 = 0.8/0.992, p1 = 0.2*p0, p2 = 0.04*p0
        assert expected[0] == pytest.approx(0.8 / 0.992, abs=1e-12)
        assert np.allclose(result.scores, expected, atol=1e-8)

    def test_empty_seed_list_rejected(self):
        with pytest.raises(ValueError):
            ppr_scores(make_graph(2, [(0, 1)]), [], PprConfig())

    def test_seed_out_of_range(self):
        with pytest.raises(IndexError):
            ppr_scores(make_graph(2, [(0, 1)]), [5], PprConfig())

    def test_seed_cap_uses_rank_order(self):
        graph = make_graph(40, [(i, (i + 1) % 40) for i in range(40)])
        seeds = list(range(30))
        capped = ppr_scores(graph, seeds, PprConfig(personalization_cap=20))
        first20 = ppr_scores(graph, seeds[:20], PprConfig(personalization_cap=20))
        assert np.allclose(capped.scores, first20.scores, atol=0)

    def test_unreachable_node_scores_zero(self):
        # no dangling nodes: 0 <-> 1 cycle, 2 -> 0; nothing reaches 2
        graph = make_graph(3, [(0, 1), (1, 0), (2, 0)])
        result = ppr_scores(graph, [0], PprConfig())
        assert result.scores[2] == 0.0

    def test_stochastic_at_every_iteration(self):
        graph = make_graph(5, [(0, 1), (1, 2), (2, 0), (3, 4)])
        for max_iter in range(1, 12):
            result = ppr_scores(graph, [0, 3],
                                PprConfig(max_iterations=max_iter, tolerance=1e-300))
            assert result.scores.sum() == pytest.approx(1.0, abs=1e-9)
            assert (result.scores >= 0).all()

    def test_dangling_mass_returns_to_seeds(self):
        # node 1 dangles; its mass must flow back to the seed
        graph = make_graph(2, [(0, 1)])
        result = ppr_scores(graph, [0], PprConfig(alpha=0.5))
        expected = dense_ppr(2, [(0, 1)], [0], alpha=0.5)
        assert np.allclose(result.scores, expected, atol=1e-8)

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_matches_dense_oracle_on_random_graphs(self, data):
        n = data.draw(st.integers(min_value=2, max_value=50))
        n_edges = data.draw(st.integers(min_value=0, max_value=3 * n))
        edges = list({
            (data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1)))
            for _ in range(n_edges)
        })
        edges = [(s, d) for s, d in edges if s != d]
        seeds = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n,
                                   unique=True))
        alpha = data.draw(st.floats(min_value=0.05, max_value=0.95))
        graph = make_graph(n, edges)
        result = ppr_scores(graph, seeds, PprConfig(alpha=alpha, tolerance=1e-12,
                                                    max_iterations=500))
        expected = dense_ppr(n, edges, seeds, alpha=alpha)
        assert np.max(np.abs(result.scores - expected)) < 1e-6
        assert result.scores.sum() == pytest.approx(1.0, abs=1e-9)


class TestContextRetrieve:
    def hits(self, graph, positions):
        return [ScoredHit(graph.ids[p], 1.0) for p in positions]

    def test_zero_context_empty(self):
        graph = make_graph(3, [(0, 1)])
        assert context_retrieve(graph, self.hits(graph, [0]), 0, PprConfig()) == []

    def test_edgeless_graph_deterministic_tiebreak(self):
        graph = make_graph(5, [])
        got = context_retrieve(graph, self.hits(graph, [2]), 2, PprConfig())
        # all non-seed scores are equal, so lexicographically first ids win
        assert [h.passage_id for h in got] == ["p000", "p001"]

    def test_star_graph_hub_selected(self):
        edges = [(i, 9) for i in range(1, 6)]
        graph = make_graph(10, edges)
        got = context_retrieve(graph, self.hits(graph, [1, 2]), 1, PprConfig())
        assert got[0].passage_id == "p009"
        expected = dense_ppr(10, edges, [1, 2], alpha=0.2)
        assert got[0].score == pytest.approx(expected[9], abs=1e-8)

    def test_excludes_initial(self):
        graph = make_graph(4, [(0, 1), (1, 2), (2, 3)])
        got = context_retrieve(graph, self.hits(graph, [0, 1]), 2, PprConfig())
        assert {h.passage_id for h in got} == {"p002", "p003"}

    def test_short_result_when_corpus_exhausted(self):
        graph = make_graph(3, [(0, 1)])
        got = context_retrieve(graph, self.hits(graph, [0, 1]), 5, PprConfig())
        assert len(got) == 1

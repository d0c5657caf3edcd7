"""Personalized PageRank over the passage graph.

Power iteration of ``p <- alpha * T(p) + (1 - alpha) * v`` where ``v`` is
uniform over the (capped) seed set, ``T`` spreads each node's mass
uniformly over its out-edges, and dangling nodes (no out-edges) send
their mass to ``v``.

Note on parameterization: ``alpha`` is the *continuation* probability of
the walk. With the default ``alpha = 0.2`` the walk teleports back to the
seed distribution with probability 0.8 each step — the inverse of the
classic 0.85 damping convention.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .bm25 import ScoredHit
from .graph import PassageGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PprConfig:
    alpha: float = 0.2  # continuation probability; teleport is 1 - alpha
    personalization_cap: int = 20
    tolerance: float = 1e-8  # L1
    max_iterations: int = 100

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.personalization_cap < 1:
            raise ValueError("personalization_cap must be >= 1")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class PprScores:
    scores: np.ndarray  # probability per passage position, sums to 1
    iterations: int
    converged: bool


def transition_matrix(graph: PassageGraph) -> tuple[sp.csr_matrix, np.ndarray]:
    """CSR matrix M with M[dst, src] = 1/outdeg(src), plus dangling mask."""
    n = len(graph)
    rows: list[int] = []
    cols: list[int] = []
    data: list[float] = []
    dangling = np.zeros(n, dtype=bool)
    for src in range(n):
        edges = graph.out_edges(src)
        if not edges:
            dangling[src] = True
            continue
        w = 1.0 / len(edges)
        for dst, _ in edges:
            rows.append(dst)
            cols.append(src)
            data.append(w)
    matrix = sp.csr_matrix(
        (np.asarray(data), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(n, n),
    )
    return matrix, dangling


def _personalization(graph: PassageGraph, seeds: Sequence[int], cap: int) -> np.ndarray:
    if not seeds:
        raise ValueError("seed list must be non-empty")
    n = len(graph)
    deduped: list[int] = []
    seen: set[int] = set()
    for s in seeds:
        if not 0 <= s < n:
            raise IndexError(f"seed position {s} out of range")
        if s not in seen:
            seen.add(s)
            deduped.append(s)
    capped = deduped[:cap]
    v = np.zeros(n, dtype=np.float64)
    v[capped] = 1.0 / len(capped)
    return v


def ppr_scores(graph: PassageGraph, seeds: Sequence[int], cfg: PprConfig) -> PprScores:
    """Power-iteration PPR; O(edges + nodes) per iteration.

    Seeds are taken in the given (retrieval rank) order when applying the
    personalization cap; the teleport distribution is uniform over them.
    """
    v = _personalization(graph, seeds, cfg.personalization_cap)
    matrix, dangling = transition_matrix(graph)
    alpha = cfg.alpha
    p = v.copy()
    iterations = 0
    converged = False
    for iterations in range(1, cfg.max_iterations + 1):
        dangling_mass = float(p[dangling].sum())
        p_next = alpha * (matrix @ p + dangling_mass * v) + (1.0 - alpha) * v
        delta = float(np.abs(p_next - p).sum())
        p = p_next
        if delta <= cfg.tolerance:
            converged = True
            break
    return PprScores(scores=p, iterations=iterations, converged=converged)


def context_retrieve(graph: PassageGraph, initial: Sequence[ScoredHit],
                     n_context: int, cfg: PprConfig) -> list[ScoredHit]:
    """Rank passages outside the initial set by PPR reachability from it.

    Returned scores are PPR probabilities. When fewer than ``n_context``
    passages exist outside the initial set, all of them are returned.
    """
    if n_context < 0:
        raise ValueError("n_context must be >= 0")
    if n_context == 0:
        return []
    if not initial:
        raise ValueError("initial hit list must be non-empty when n_context > 0")
    positions = {pid: pos for pos, pid in enumerate(graph.ids)}
    seeds = [positions[h.passage_id] for h in initial]
    result = ppr_scores(graph, seeds, cfg)
    exclude = set(seeds)
    ranked = sorted(
        ((pos, float(result.scores[pos])) for pos in range(len(graph)) if pos not in exclude),
        key=lambda e: (-e[1], graph.ids[e[0]]),
    )
    if len(ranked) < n_context:
        logger.warning(
            "context retrieval short: %d requested, %d available",
            n_context, len(ranked),
        )
    return [ScoredHit(passage_id=graph.ids[pos], score=s) for pos, s in ranked[:n_context]]

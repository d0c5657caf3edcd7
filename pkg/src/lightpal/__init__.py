"""Graph-augmented passage retrieval for open-domain multi-document
summarization.

Offline, a passage graph is built by linking each passage to the
candidates it best serves as context for, ranked by a language model's
conditional generation log-probability. Online, a conventional retriever
supplies an initial passage set and Personalized PageRank on the graph
expands it with context passages — no language-model inference at query
time.
"""

from .corpus import Corpus, CorpusError, Passage, QrelSet, Query, chunk_document
from .bm25 import LexicalIndex, ScoredHit, build_index, search, tokenize
from .embed import (
    EmbeddingProvider,
    HashedTfidfProvider,
    RandomProjectionProvider,
    VectorIndex,
    build_vector_index,
    search_dense,
    top_k_similar,
)
from .scorer import (
    ContextScorer,
    NgramLm,
    RemoteScorer,
    ScorerError,
    TruncationPolicy,
    context_score,
    truncate_pair,
)
from .graph import GraphBuildConfig, PassageGraph, build_graph, load_graph, save_graph
from .ppr import PprConfig, PprScores, context_retrieve, ppr_scores
from .pipeline import (
    GenerationEndpoint,
    RetrievalIndexes,
    RetrievalResult,
    RetrieveConfig,
    SummaryPrompt,
    build_summary_prompt,
    generate_summary,
    retrieve,
)
from .metrics import (
    bench_latency,
    precision_at_k,
    recall_at_k,
    rouge_scores,
)

__version__ = "0.1.0"

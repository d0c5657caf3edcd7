"""Reference implementation of the remote passage-scoring wire protocol."""

from .app import create_app
from .scoring import ModelScorer, PairScore

__all__ = ["create_app", "ModelScorer", "PairScore"]
__version__ = "0.1.0"

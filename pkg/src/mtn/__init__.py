"""Modular tree network encoders for C abstract syntax trees.

The package covers the full pipeline: a C-subset frontend (``mtn.frontend``),
a tape-based reverse-mode autodiff core (``mtn.autodiff``), the tree encoder
with per-node-type neural modules and its baselines (``mtn.model``), training
and evaluation (``mtn.training``, ``mtn.evaluation``), a synthetic corpus
generator (``mtn.corpus``) and a command-line interface (``mtn.cli``).
"""

from . import autodiff, corpus, evaluation, frontend, model, training
from .frontend import AstNode, parse_source, from_interchange, to_interchange
from .model import ModelConfig, encode, init_params, load_model, param_count, \
    save_model
from .corpus import CorpusSpec, generate_corpus

__version__ = "0.1.0"

__all__ = [
    "autodiff", "corpus", "evaluation", "frontend", "model", "training",
    "AstNode", "parse_source", "from_interchange", "to_interchange",
    "ModelConfig", "encode", "init_params", "load_model", "param_count",
    "save_model",
    "CorpusSpec", "generate_corpus",
    "__version__",
]

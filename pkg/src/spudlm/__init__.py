"""Query-likelihood retrieval with multinomial and Pólya urn (DCM) document models."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DataError,
    DivergenceError,
    DomainError,
    IndexFormatError,
    SpudError,
)
from .estimation import derive_mu_prime, digamma, estimate_mc
from .evaluation import Run, evaluate, paired_ttest, read_qrels, read_run, sweep, write_run
from .feedback import FeedbackConfig, expand_and_rerank
from .index import InvertedIndex, build_index, load_index, save_index
from .ranking import Model, ModelConfig, Query, prepare_query, retrieve, score_document
from .textprep import TokenPipelineConfig, porter_stem, tokenize

__all__ = [
    "ConfigError",
    "DataError",
    "DivergenceError",
    "DomainError",
    "FeedbackConfig",
    "IndexFormatError",
    "InvertedIndex",
    "Model",
    "ModelConfig",
    "Query",
    "Run",
    "SpudError",
    "TokenPipelineConfig",
    "build_index",
    "derive_mu_prime",
    "digamma",
    "estimate_mc",
    "evaluate",
    "expand_and_rerank",
    "load_index",
    "paired_ttest",
    "porter_stem",
    "prepare_query",
    "read_qrels",
    "read_run",
    "retrieve",
    "save_index",
    "score_document",
    "sweep",
    "tokenize",
    "write_run",
]

"""Pseudo-relevance feedback: RM3 and its Pólya-urn counterpart PURM.

The two variants differ only in the retrieval score used to weight the
feedback documents: RM3 uses the multinomial Dirichlet score, PURM the
SPUD_dir score.
"""

import enum
import heapq
import math
import warnings
from dataclasses import dataclass

from .errors import ConfigError
from .ranking import (
    EmptyQueryWarning,
    Model,
    ModelConfig,
    ScoredDoc,
    log_term_probability,
    retrieve,
    score_document,
)

__all__ = [
    "FeedbackConfig",
    "FeedbackWarning",
    "QueryModel",
    "Variant",
    "expand_and_rerank",
    "expansion_model",
    "query_model",
    "rerank_with_model",
    "smooth_query",
]


class FeedbackWarning(UserWarning):
    pass


class Variant(str, enum.Enum):
    RM3 = "rm3"
    PURM = "purm"


@dataclass(frozen=True)
class FeedbackConfig:
    """Feedback settings.

    ``expansion_mu`` smooths the per-document term distributions (0 gives
    maximum likelihood). ``score_mu`` is the smoothing parameter of the
    scorer that weights feedback documents.
    """

    k_docs: int = 20
    n_terms: int = 50
    tau: float = 0.5
    expansion_mu: float = 0.0
    variant: Variant = Variant.PURM
    score_mu: float = 2000.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.k_docs < 1 or self.n_terms < 1:
            raise ConfigError("k_docs and n_terms must be >= 1")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError("tau must lie in [0, 1]")
        if self.expansion_mu < 0.0:
            raise ConfigError("expansion_mu must be >= 0")

    @property
    def weight_model(self):
        if self.variant is Variant.PURM:
            return ModelConfig(Model.SPUD_DIR, mu_prime=self.score_mu)
        return ModelConfig(Model.MQL_DIR, mu=self.score_mu)


class QueryModel:
    """A probability distribution over terms."""

    def __init__(self, weights):
        weights = {t: float(w) for t, w in weights.items() if w > 0.0}
        if any(w < 0.0 or not math.isfinite(w) for w in weights.values()):
            raise ValueError("query model weights must be finite and non-negative")
        self.weights = dict(sorted(weights.items()))

    def __len__(self):
        return len(self.weights)

    def total(self):
        return math.fsum(self.weights.values())

    def __repr__(self):
        top = sorted(self.weights.items(), key=lambda kv: (-kv[1], kv[0]))[:5]
        return f"QueryModel({len(self)} terms, top={top})"


def query_model(q):
    """Maximum-likelihood model of a query: ``c(t,q) / |q|``."""
    return QueryModel({t: c / q.total_len for t, c in q.terms})


def _normalise(weights):
    z = math.fsum(weights.values())
    return {t: w / z for t, w in weights.items()}


def _doc_term_probs(idx, ordinal, cfg):
    counts = idx.doc_terms(ordinal)
    dlen = int(idx.doc_lengths[ordinal])
    mu = cfg.expansion_mu
    if mu == 0.0:
        return {t: c / dlen for t, c in counts.items()}
    if cfg.variant is Variant.PURM:
        smoother = ModelConfig(Model.SPUD_DIR, mu_prime=mu)
    else:
        smoother = ModelConfig(Model.MQL_DIR, mu=mu)
    dtypes = int(idx.doc_types[ordinal])
    out = {}
    for t, c in counts.items():
        pl = idx.dictionary[t]
        out[t] = math.exp(log_term_probability(smoother, c, dlen, dtypes, pl.cf, pl.df, idx.stats))
    return out


def expansion_model(q, idx, initial_run, cfg=None):
    """Relevance model over the top ``cfg.k_docs`` documents of ``initial_run``.

    Each feedback document's query likelihood (from the variant's scorer)
    is normalised over the feedback set after subtracting the maximum log
    score; the result weights that document's term distribution. Only the
    ``n_terms`` most probable terms are kept, ties going to the
    lexicographically smaller term.
    """
    cfg = cfg or FeedbackConfig()
    if not initial_run:
        raise ValueError("initial run is empty")
    top = list(initial_run[: cfg.k_docs])
    if len(top) < cfg.k_docs:
        warnings.warn(
            f"only {len(top)} feedback documents available (asked for {cfg.k_docs})",
            FeedbackWarning,
            stacklevel=2,
        )
    ordinals = [idx.ordinal(sd.doc_id) for sd in top]
    scorer = cfg.weight_model
    logs = [score_document(q, d, idx, scorer) for d in ordinals]
    doc_weights = _likelihood_weights(logs)
    pooled = {}
    for d, w in zip(ordinals, doc_weights):
        for t, p in _doc_term_probs(idx, d, cfg).items():
            pooled[t] = pooled.get(t, 0.0) + p * w
    kept = heapq.nsmallest(cfg.n_terms, pooled.items(), key=lambda kv: (-kv[1], kv[0]))
    return QueryModel(_normalise(dict(kept)))


def _likelihood_weights(log_scores):
    top = max(log_scores)
    lik = [math.exp(s - top) for s in log_scores]
    z = math.fsum(lik)
    return [x / z for x in lik]


def smooth_query(q, qe, tau):
    """``p(t|q') = tau p(t|q) + (1 - tau) p(t|q_e)``."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    original = query_model(q).weights if hasattr(q, "terms") else q.weights
    terms = set(original) | set(qe.weights)
    mixed = {
        t: tau * original.get(t, 0.0) + (1.0 - tau) * qe.weights.get(t, 0.0)
        for t in terms
    }
    return QueryModel(mixed)


def rerank_with_model(qm, idx, cfg, k=1000):
    """Rank by ``sum_t p(t|q') log p(t|M_d)`` over documents matching any term."""
    terms = [(t, w) for t, w in qm.weights.items() if w > 0.0 and t in idx.dictionary]
    if not terms:
        warnings.warn("query model has no in-vocabulary terms", EmptyQueryWarning, stacklevel=2)
        return []
    candidates = set()
    for t, _ in terms:
        candidates.update(idx.dictionary[t].docs.tolist())
    stats = idx.stats
    scored = []
    for d in candidates:
        dlen = int(idx.doc_lengths[d])
        dtypes = int(idx.doc_types[d])
        score = 0.0
        for t, w in terms:
            pl = idx.dictionary[t]
            score += w * log_term_probability(cfg, pl.tf(d), dlen, dtypes, pl.cf, pl.df, stats)
        scored.append((-score, idx.docs[d].doc_id))
    return [ScoredDoc(doc_id, -neg) for neg, doc_id in heapq.nsmallest(k, scored)]


def expand_and_rerank(q, idx, model_cfg, fb_cfg=None, k=1000):
    """First pass, expansion, interpolation and second pass in one call."""
    fb_cfg = fb_cfg or FeedbackConfig()
    first = retrieve(q, idx, model_cfg, k=max(k, fb_cfg.k_docs))
    if not first:
        return []
    qe = expansion_model(q, idx, first, fb_cfg)
    return rerank_with_model(smooth_query(q, qe, fb_cfg.tau), idx, model_cfg, k=k)

"""Query-likelihood scoring: multinomial baselines and the Pólya-urn models.

Six ranking functions are supported:

``mql_jm``    multinomial, Jelinek-Mercer smoothing with weight ``pi``
``mql_dir``   multinomial, Dirichlet smoothing with ``mu`` (alias ``lm1``)
``lm2``       Dirichlet smoothing, document-frequency background, ``mu``
``lm3``       vector-length smoothing, collection-frequency background, ``mu``
``spud_jm``   Pólya urn document, linear smoothing, no free parameter
``spud_dir``  Pólya urn document, DCM mixture with ``mu_prime`` (alias ``lm4``)

Each has an efficient form that sums over matching terms only, and a
probability form ``sum_t c(t,q) * log p(t|M_d)``. The two differ by a
constant that depends on the query only, so they rank identically.

Every ratio of integer statistics is evaluated as a single Python
``int / int`` division, which is correctly rounded. Algebraically equal
ratios therefore give bit-identical floats, e.g. ``c(t,d)/|d|`` for a
document and for its k-fold self-concatenation.
"""

import enum
import heapq
import math
import warnings
from collections import Counter
from dataclasses import dataclass

from .errors import ConfigError, DomainError
from .textprep import tokenize

__all__ = [
    "EmptyQueryWarning",
    "Model",
    "ModelConfig",
    "Query",
    "ScoredDoc",
    "log_term_probability",
    "prepare_query",
    "retrieve",
    "score_counts",
    "score_document",
    "score_lm2",
    "score_lm3",
    "score_lm4",
    "score_mql_dir",
    "score_mql_jm",
    "score_probability_form",
    "score_spud_dir",
    "score_spud_jm",
]


class EmptyQueryWarning(UserWarning):
    """Raised (as a warning) when a query has no in-vocabulary terms."""


class Model(str, enum.Enum):
    MQL_JM = "mql_jm"
    MQL_DIR = "mql_dir"
    LM2 = "lm2"
    LM3 = "lm3"
    SPUD_JM = "spud_jm"
    SPUD_DIR = "spud_dir"

    @property
    def param_name(self):
        return _PARAM_OF[self]


_PARAM_OF = {
    Model.MQL_JM: "pi",
    Model.MQL_DIR: "mu",
    Model.LM2: "mu",
    Model.LM3: "mu",
    Model.SPUD_JM: None,
    Model.SPUD_DIR: "mu_prime",
}

_ALIASES = {"lm1": Model.MQL_DIR, "lm4": Model.SPUD_DIR}


@dataclass(frozen=True)
class ModelConfig:
    """A ranking function plus exactly the parameter it needs."""

    model: Model
    pi: float = None
    mu: float = None
    mu_prime: float = None

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        wanted = self.model.param_name
        for name in ("pi", "mu", "mu_prime"):
            value = getattr(self, name)
            if name != wanted and value is not None:
                raise ConfigError(f"{self.model.value} does not take parameter {name!r}")
        if wanted is None:
            return
        value = getattr(self, wanted)
        if value is None:
            raise ConfigError(f"{self.model.value} requires parameter {wanted!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{wanted} must be finite")
        if wanted == "pi":
            # pi = 1.0 (pure background) is kept as the top grid value
            if not 0.0 < value <= 1.0:
                raise ConfigError(f"pi must lie in (0, 1], got {value}")
        elif value <= 0.0:
            raise ConfigError(f"{wanted} must be positive, got {value}")
        object.__setattr__(self, wanted, value)

    @classmethod
    def from_name(cls, name, param=None):
        key = name.lower()
        model = _ALIASES.get(key) or Model(key)
        wanted = model.param_name
        if wanted is None:
            if param is not None:
                raise ConfigError(f"{model.value} takes no parameter")
            return cls(model)
        return cls(model, **{wanted: param})

    @property
    def param(self):
        name = self.model.param_name
        return None if name is None else getattr(self, name)

    def to_dict(self):
        return {"model": self.model.value, self.model.param_name or "param": self.param}


@dataclass(frozen=True)
class Query:
    """Bag of in-vocabulary query terms: ``terms`` is ``((term, count), ...)``."""

    terms: tuple
    total_len: int

    @classmethod
    def from_counts(cls, counts):
        terms = tuple(sorted((t, int(c)) for t, c in dict(counts).items() if c > 0))
        return cls(terms, sum(c for _, c in terms))

    def __bool__(self):
        return self.total_len > 0


@dataclass(frozen=True)
class ScoredDoc:
    doc_id: str
    score: float


def prepare_query(raw, idx, cfg=None):
    """Tokenize ``raw`` with the index's pipeline and drop OOV terms."""
    if cfg is None:
        cfg = idx.pipeline
    elif cfg.hash != idx.pipeline_hash:
        raise ConfigError("query pipeline differs from the pipeline used to build the index")
    counts = Counter(t for t in tokenize(raw, cfg) if t in idx.dictionary)
    return Query.from_counts(counts)


# -- per-model arithmetic ------------------------------------------------------
#
# ``matches`` holds (c(t,q), c(t,d), cf_t, df_t) for query terms present in d;
# ``stats`` supplies |c| (total_tokens) and sum_j |d_j vec| (sum_vector_lengths).


def _efficient(cfg, matches, qlen, dlen, dtypes, stats):
    model = cfg.model
    C = stats.total_tokens
    S = stats.sum_vector_lengths
    if model is Model.MQL_DIR:
        mu = cfg.mu
        score = qlen * math.log(mu / (mu + dlen))
        for cq, ctd, cf, _ in matches:
            score += cq * math.log1p((C * ctd) / cf / mu)
    elif model is Model.LM2:
        mu = cfg.mu
        score = qlen * math.log(mu / (mu + dlen))
        for cq, ctd, _, df in matches:
            score += cq * math.log1p((S * ctd) / df / mu)
    elif model is Model.LM3:
        mu = cfg.mu
        score = qlen * math.log(mu / (mu + dtypes))
        for cq, ctd, cf, _ in matches:
            score += cq * math.log1p((C * dtypes * ctd) / (dlen * cf) / mu)
    elif model is Model.SPUD_JM:
        score = qlen * math.log(dtypes / dlen)
        for cq, ctd, _, df in matches:
            score += cq * math.log1p(((dlen - dtypes) * ctd * S) / (dlen * dtypes * df))
    elif model is Model.SPUD_DIR:
        mu = cfg.mu_prime
        score = qlen * math.log(mu / (mu + dtypes))
        for cq, ctd, _, df in matches:
            score += cq * math.log1p((dtypes * ctd * S) / (dlen * df) / mu)
    else:
        raise ConfigError(f"{model.value} has no efficient form")
    return score


def log_term_probability(cfg, ctd, dlen, dtypes, cf, df, stats):
    """``log p(t | M_d)`` under the smoothed document model of ``cfg``."""
    model = cfg.model
    C = stats.total_tokens
    S = stats.sum_vector_lengths
    if model is Model.MQL_JM:
        p = (1.0 - cfg.pi) * (ctd / dlen) + cfg.pi * (cf / C)
    elif model is Model.MQL_DIR:
        p = (ctd + cfg.mu * (cf / C)) / (dlen + cfg.mu)
    elif model is Model.LM2:
        p = (ctd + cfg.mu * (df / S)) / (dlen + cfg.mu)
    elif model is Model.LM3:
        p = ((dtypes * ctd) / dlen + cfg.mu * (cf / C)) / (dtypes + cfg.mu)
    elif model is Model.SPUD_JM:
        # (1 - lambda) c/|d| + lambda df/S with lambda = |d vec|/|d|, as one ratio
        p = ((dlen - dtypes) * ctd * S + dtypes * df * dlen) / (dlen * dlen * S)
    else:
        mu = cfg.mu_prime
        p = ((dtypes * ctd) / dlen + mu * (df / S)) / (dtypes + mu)
    return math.log(p)


def _probability(cfg, weighted, dlen, dtypes, stats):
    score = 0.0
    for w, ctd, cf, df in weighted:
        score += w * log_term_probability(cfg, ctd, dlen, dtypes, cf, df, stats)
    return score


def _check_doc(dlen, dtypes):
    if dlen <= 0:
        raise DomainError("cannot score an empty document")
    if not 1 <= dtypes <= dlen:
        raise DomainError(f"inconsistent document lengths |d|={dlen}, |d vec|={dtypes}")


def _all_terms(q, idx, tf_of):
    out = []
    for term, cq in q.terms:
        pl = idx.dictionary[term]
        out.append((cq, tf_of(term, pl), pl.cf, pl.df))
    return out


def score_counts(q, counts, idx, cfg, length_tokens=None, length_types=None, form="efficient"):
    """Score a document given as ``{term: c(t,d)}`` against the index's statistics.

    Lets callers score documents that are not in the index (e.g. a
    self-concatenated copy) with the collection statistics frozen.
    """
    dlen = sum(counts.values()) if length_tokens is None else length_tokens
    dtypes = sum(1 for c in counts.values() if c > 0) if length_types is None else length_types
    _check_doc(dlen, dtypes)
    terms = _all_terms(q, idx, lambda t, pl: counts.get(t, 0))
    return _dispatch(cfg, q, terms, dlen, dtypes, idx.stats, form)


def _dispatch(cfg, q, terms, dlen, dtypes, stats, form):
    if form == "probability" or cfg.model is Model.MQL_JM:
        return _probability(cfg, terms, dlen, dtypes, stats)
    if form != "efficient":
        raise ValueError(f"unknown form {form!r}")
    matches = [m for m in terms if m[1] > 0]
    return _efficient(cfg, matches, q.total_len, dlen, dtypes, stats)


def score_document(q, d, idx, cfg, form="efficient"):
    """Score indexed document ordinal ``d``."""
    doc = idx.docs[d]
    _check_doc(doc.length_tokens, doc.length_types)
    terms = _all_terms(q, idx, lambda t, pl: pl.tf(d))
    return _dispatch(cfg, q, terms, doc.length_tokens, doc.length_types, idx.stats, form)


def score_probability_form(q, d, idx, cfg):
    return score_document(q, d, idx, cfg, form="probability")


def score_mql_jm(q, d, idx, pi):
    return score_document(q, d, idx, ModelConfig(Model.MQL_JM, pi=pi))


def score_mql_dir(q, d, idx, mu):
    return score_document(q, d, idx, ModelConfig(Model.MQL_DIR, mu=mu))


def score_lm2(q, d, idx, U):
    return score_document(q, d, idx, ModelConfig(Model.LM2, mu=U))


def score_lm3(q, d, idx, U):
    return score_document(q, d, idx, ModelConfig(Model.LM3, mu=U))


def score_spud_jm(q, d, idx):
    return score_document(q, d, idx, ModelConfig(Model.SPUD_JM))


def score_spud_dir(q, d, idx, mu_prime):
    return score_document(q, d, idx, ModelConfig(Model.SPUD_DIR, mu_prime=mu_prime))


def score_lm4(q, d, idx, U):
    """LM4 written out independently: new smoothing and new background.

    ``|q| log(U/(U+|d vec|)) + sum log(1 + S |d vec| (tf/|d|) / (U df))``
    """
    doc = idx.docs[d]
    _check_doc(doc.length_tokens, doc.length_types)
    S = idx.stats.sum_vector_lengths
    dvec = doc.length_types
    total = q.total_len * math.log(U / (U + dvec))
    for term, cq in q.terms:
        pl = idx.dictionary[term]
        tf = pl.tf(d)
        if tf:
            total += cq * math.log1p((S * dvec * tf) / (doc.length_tokens * pl.df) / U)
    return total


def retrieve(q, idx, cfg, k=1000):
    """Top-``k`` documents containing at least one query term.

    Ties are broken by ascending ``doc_id``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not q:
        warnings.warn("query has no in-vocabulary terms", EmptyQueryWarning, stacklevel=2)
        return []
    # document-at-a-time over the query's postings
    hits = {}
    for i, (term, _) in enumerate(q.terms):
        for doc, tf in idx.dictionary[term]:
            hits.setdefault(doc, {})[i] = tf
    stats = idx.stats
    scored = []
    for doc, tfs in hits.items():
        terms = []
        for i, (term, cq) in enumerate(q.terms):
            pl = idx.dictionary[term]
            terms.append((cq, tfs.get(i, 0), pl.cf, pl.df))
        dlen = int(idx.doc_lengths[doc])
        dtypes = int(idx.doc_types[doc])
        score = _dispatch(cfg, q, terms, dlen, dtypes, stats, "efficient")
        scored.append((-score, idx.docs[doc].doc_id))
    best = heapq.nsmallest(k, scored)
    return [ScoredDoc(doc_id, -neg) for neg, doc_id in best]

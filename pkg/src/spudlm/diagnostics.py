"""Analyses of ranking behaviour: verbosity constraint, length bias, backgrounds, idf."""

import csv
import math
import random
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .ranking import Query, score_counts

__all__ = [
    "BackgroundRatioRow",
    "LengthBinCurve",
    "Lnc2Report",
    "Lnc2Trial",
    "background_probabilities",
    "background_ratio_table",
    "check_lnc2",
    "idf_delta",
    "idf_family_curve",
    "length_bin_analysis",
    "random_lnc2_trials",
    "write_csv",
]

LNC2_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Lnc2Trial:
    query: Query
    doc: int
    k: int
    score_original: float
    score_concat: float

    @property
    def delta(self):
        return self.score_concat - self.score_original


@dataclass
class Lnc2Report:
    model: str
    trials: list = field(default_factory=list)

    @property
    def max_abs_delta(self):
        return max((abs(t.delta) for t in self.trials), default=0.0)

    @property
    def satisfied(self):
        return self.max_abs_delta <= LNC2_TOLERANCE

    @property
    def witness(self):
        """The trial with the largest violation, or ``None`` when satisfied."""
        if self.satisfied:
            return None
        return max(self.trials, key=lambda t: abs(t.delta))

    @property
    def verdict(self):
        return "satisfied" if self.satisfied else "violated"


def check_lnc2(idx, cfg, trials):
    """Score each ``(query, doc, k)`` against ``doc`` concatenated with itself ``k`` times.

    The copy ``d'`` has ``c(t,d') = (k+1) c(t,d)``, ``|d'| = (k+1)|d|`` and
    the same vector length; collection statistics are left untouched.
    """
    report = Lnc2Report(cfg.model.value)
    for q, d, k in trials:
        if k < 1:
            raise ValueError("k must be >= 1")
        counts = idx.doc_terms(d)
        doc = idx.docs[d]
        original = score_counts(q, counts, idx, cfg, doc.length_tokens, doc.length_types)
        grown = {t: (k + 1) * c for t, c in counts.items()}
        concat = score_counts(q, grown, idx, cfg, (k + 1) * doc.length_tokens, doc.length_types)
        report.trials.append(Lnc2Trial(q, d, k, original, concat))
    return report


def random_lnc2_trials(idx, n_trials, seed, max_k=10, max_query_len=4):
    """Random ``(query, doc, k)``: a non-empty doc, a query mixing its terms with others."""
    rng = random.Random(seed)
    docs = [i for i, d in enumerate(idx.docs) if d.length_tokens > 0]
    if not docs:
        raise DataError("index has no non-empty documents")
    vocab = idx.terms
    out = []
    for _ in range(n_trials):
        d = rng.choice(docs)
        own = sorted(idx.doc_terms(d))
        counts = {}
        for _ in range(rng.randint(1, max_query_len)):
            term = rng.choice(own) if rng.random() < 0.7 else rng.choice(vocab)
            counts[term] = counts.get(term, 0) + 1
        out.append((Query.from_counts(counts), d, rng.randint(1, max_k)))
    return out


# -- length bins ---------------------------------------------------------------


@dataclass
class LengthBinCurve:
    """Per length bin: ``(min_len, max_len, P(bin | retrieved), P(bin | relevant))``."""

    bins: list
    length_kind: str

    def rows(self):
        return [(i, lo, hi, pr, pv) for i, (lo, hi, pr, pv) in enumerate(self.bins)]


def length_bin_analysis(run, qrels, idx, n_bins=50, length_kind="tokens", depth=1000):
    """Distribution of retrieved and of relevant documents over equal-count length bins.

    Retrievable documents are sorted by length and cut into ``n_bins``
    bins of (near) equal size. A document counts as retrieved for a topic
    if it appears in that topic's top ``depth``.
    """
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    if not any(g >= 1 for judged in qrels.values() for g in judged.values()):
        raise DataError("qrels contain no relevant documents")
    if length_kind not in ("tokens", "types"):
        raise ValueError("length_kind must be 'tokens' or 'types'")
    lengths = idx.doc_lengths if length_kind == "tokens" else idx.doc_types
    retrievable = np.flatnonzero(idx.doc_lengths > 0)
    order = retrievable[np.argsort(lengths[retrievable], kind="stable")]
    if order.size < n_bins:
        raise DataError(f"{order.size} documents cannot fill {n_bins} bins")
    n_retrieved = sum(min(len(v), depth) for v in run.results.values())
    if n_retrieved < n_bins:
        raise DataError(f"run has {n_retrieved} retrieved documents, fewer than {n_bins} bins")
    bin_of = np.empty(idx.n_docs, dtype=np.int64)
    bin_of.fill(-1)
    splits = np.array_split(order, n_bins)
    for b, members in enumerate(splits):
        bin_of[members] = b

    def histogram(pairs):
        counts = np.zeros(n_bins)
        for doc_id in pairs:
            try:
                b = bin_of[idx.ordinal(doc_id)]
            except KeyError:
                continue
            if b >= 0:
                counts[b] += 1
        total = counts.sum()
        return counts / total if total else counts

    retrieved = histogram(doc for hits in run.results.values() for doc, _ in hits[:depth])
    relevant = histogram(doc for judged in qrels.values() for doc, g in judged.items() if g >= 1)
    bins = []
    for b, members in enumerate(splits):
        ls = lengths[members]
        bins.append((int(ls.min()), int(ls.max()), float(retrieved[b]), float(relevant[b])))
    return LengthBinCurve(bins, length_kind)


# -- background models ---------------------------------------------------------


@dataclass(frozen=True)
class BackgroundRatioRow:
    term: str
    p_dcm: float
    p_multinomial: float
    ratio: float


def background_probabilities(idx, term):
    """``(df_t / sum_j |d_j vec|, cf_t / |c|)``: DCM and multinomial backgrounds."""
    pl = idx.dictionary[term]
    s = idx.stats
    return pl.df / s.sum_vector_lengths, pl.cf / s.total_tokens


def background_ratio_table(idx, terms=None, top_n=10):
    """Terms with the highest and lowest DCM-to-multinomial background ratio."""
    terms = idx.terms if terms is None else terms
    s = idx.stats
    rows = []
    for t in terms:
        pl = idx.dictionary[t]
        p_dcm, p_mult = background_probabilities(idx, t)
        ratio = (pl.df * s.total_tokens) / (s.sum_vector_lengths * pl.cf)
        rows.append(BackgroundRatioRow(t, p_dcm, p_mult, ratio))
    top = sorted(rows, key=lambda r: (-r.ratio, r.term))[:top_n]
    bottom = sorted(rows, key=lambda r: (r.ratio, r.term))[:top_n]
    return top, bottom


# -- idf family ----------------------------------------------------------------


def idf_delta(length_types, avg_length_types, tf, length_tokens, mu_prime):
    """``delta = |d vec| * avg|d vec| * c(t,d) / (mu' * |d|)``."""
    return length_types * avg_length_types * tf / (mu_prime * length_tokens)


def idf_family_curve(n_docs, delta, df_range=None):
    """Rows ``(df, log(1 + delta n / df), log(n / df))``.

    ``n_docs`` may be an index, in which case its document count is used.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    n = n_docs.n_docs if hasattr(n_docs, "n_docs") else int(n_docs)
    if df_range is None:
        df_range = range(1, n + 1)
    return [(df, math.log1p(delta * n / df), math.log(n / df)) for df in df_range]


def write_csv(path, header, rows):
    """Header plus rows; floats at 6 decimals."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.6f}" if isinstance(v, float) else v for v in row])

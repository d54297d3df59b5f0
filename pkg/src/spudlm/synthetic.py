"""Synthetic collections drawn from a Pólya urn (DCM) process.

Terms are spelled ``t0000``, ``t0001``, ... so they survive tokenization
unchanged (tokens containing digits are never stemmed).
"""

import numpy as np

__all__ = ["PlantedCollection", "planted_collection", "polya_corpus", "term_name", "zipf_background"]


def term_name(i):
    return f"t{i:04d}"


def zipf_background(vocab_size, exponent=1.1):
    p = 1.0 / np.arange(1, vocab_size + 1) ** exponent
    return p / p.sum()


def _polya_counts(rng, alpha, length):
    theta = rng.gamma(alpha)
    total = theta.sum()
    if not total > 0:
        theta = alpha
        total = theta.sum()
    return rng.multinomial(length, theta / total)


def _text(counts, rng):
    tokens = np.repeat(np.arange(counts.size), counts)
    rng.shuffle(tokens)
    return " ".join(term_name(int(i)) for i in tokens)


def polya_corpus(n_docs, vocab_size=200, concentration=50.0, length_range=(20, 200), seed=0,
                 background=None):
    """``[(doc_id, text), ...]``: each document is a DCM draw with the given concentration."""
    rng = np.random.default_rng(seed)
    p = zipf_background(vocab_size) if background is None else np.asarray(background)
    alpha = concentration * p
    lo, hi = length_range
    docs = []
    for j in range(n_docs):
        length = int(rng.integers(lo, hi + 1))
        docs.append((f"d{j:05d}", _text(_polya_counts(rng, alpha, length), rng)))
    return docs


class PlantedCollection:
    """Corpus plus topics and qrels with known relevant documents."""

    def __init__(self, corpus, topics, qrels):
        self.corpus = corpus
        self.topics = topics
        self.qrels = qrels


def planted_collection(n_docs=300, n_topics=10, rel_per_topic=8, vocab_size=300,
                       concentration=40.0, length_range=(30, 300), seed=0):
    """Each topic owns three rare terms that recur in its relevant documents.

    Relevant documents get several bursty occurrences of the topic terms;
    a few non-relevant documents get a single stray occurrence of one.
    Grades are 1 or 2 (2 when all three topic terms were planted).
    """
    rng = np.random.default_rng(seed)
    base_vocab = vocab_size
    p = zipf_background(base_vocab)
    alpha = concentration * p
    lo, hi = length_range
    counts = []
    for _ in range(n_docs):
        length = int(rng.integers(lo, hi + 1))
        c = np.zeros(base_vocab + 3 * n_topics, dtype=np.int64)
        c[:base_vocab] = _polya_counts(rng, alpha, length)
        counts.append(c)
    topics, qrels = [], {}
    for q in range(n_topics):
        tid = f"q{q:03d}"
        own = [base_vocab + 3 * q + i for i in range(3)]
        rel = rng.choice(n_docs, size=rel_per_topic, replace=False)
        judged = {}
        for d in rel.tolist():
            n_terms = int(rng.integers(1, 4))
            for term in rng.choice(own, size=n_terms, replace=False).tolist():
                counts[d][term] += int(rng.integers(1, 6))
            judged[f"d{d:05d}"] = 2 if n_terms == 3 else 1
        for d in rng.choice(n_docs, size=rel_per_topic, replace=False).tolist():
            if f"d{d:05d}" not in judged:
                counts[d][int(rng.choice(own))] += 1
                judged[f"d{d:05d}"] = 0
        topics.append((tid, " ".join(term_name(t) for t in own) + " " + term_name(int(rng.integers(0, 20)))))
        qrels[tid] = judged
    corpus = [(f"d{j:05d}", _text(c, rng)) for j, c in enumerate(counts)]
    return PlantedCollection(corpus, topics, qrels)

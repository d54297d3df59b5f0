"""TREC-style evaluation: run/qrels I/O, AP, NDCG@20, Recall@1000, t-tests, sweeps."""

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import DataError
from .ranking import ModelConfig, prepare_query, retrieve

__all__ = [
    "METRICS",
    "MU_GRID",
    "PI_GRID",
    "MetricsReport",
    "Run",
    "SigTestResult",
    "SweepResult",
    "average_precision",
    "batch_run",
    "evaluate",
    "format_run",
    "ndcg_at_k",
    "paired_ttest",
    "parse_grid",
    "read_qrels",
    "read_run",
    "read_topics",
    "recall_at_k",
    "sweep",
    "write_run",
]

METRICS = ("map", "ndcg20", "recall1000")
MU_GRID = tuple(float(u) for u in range(250, 2501, 250))
PI_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))


class DegenerateTestWarning(UserWarning):
    pass


# -- I/O -----------------------------------------------------------------------


def read_qrels(path):
    """``topic 0 doc grade`` lines -> ``{topic: {doc: grade}}``."""
    qrels = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise DataError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
            topic, _, doc, grade = parts
            try:
                grade = int(grade)
            except ValueError:
                raise DataError(f"{path}:{lineno}: grade {grade!r} is not an integer") from None
            judged = qrels.setdefault(topic, {})
            if doc in judged:
                raise DataError(f"{path}:{lineno}: second judgment for ({topic}, {doc})")
            judged[doc] = grade
    return qrels


def read_topics(path):
    """JSON-lines topics ``{"id": ..., "text": ...}`` -> list of (id, text)."""
    topics = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                topics.append((str(obj["id"]), str(obj["text"])))
            except (ValueError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad topic line ({exc})") from None
    return topics


@dataclass
class Run:
    """Ranked results per topic: ``{topic: [(doc_id, score), ...]}``."""

    results: dict
    tag: str = "spudlm"

    def ranking(self, topic):
        return [doc for doc, _ in self.results.get(topic, [])]


def format_run(run):
    lines = []
    for topic in sorted(run.results):
        for rank, (doc, score) in enumerate(run.results[topic], start=1):
            lines.append(f"{topic} Q0 {doc} {rank} {score:.6f} {run.tag}\n")
    return "".join(lines)


def write_run(run, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_run(run))


def read_run(path):
    """Parse a run file, checking contiguous ranks, sorted scores, unique docs."""
    results = {}
    tag = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise DataError(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
            topic, _, doc, rank, score, tag = parts
            try:
                rank, score = int(rank), float(score)
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad rank or score") from None
            entries = results.setdefault(topic, [])
            if rank != len(entries) + 1:
                raise DataError(f"{path}:{lineno}: rank {rank} out of sequence for topic {topic}")
            if entries and score > entries[-1][1]:
                raise DataError(f"{path}:{lineno}: scores increase within topic {topic}")
            entries.append((doc, score))
    for topic, entries in results.items():
        docs = [d for d, _ in entries]
        if len(set(docs)) != len(docs):
            raise DataError(f"{path}: duplicate document in topic {topic}")
    return Run(results, tag or "spudlm")


# -- metrics -------------------------------------------------------------------


def average_precision(ranking, relevant, cutoff=1000):
    """Non-interpolated AP over the top ``cutoff``; ``None`` when nothing is relevant."""
    R = len(relevant)
    if R == 0:
        return None
    hits = 0
    total = 0.0
    for rank, doc in enumerate(ranking[:cutoff], start=1):
        if doc in relevant:
            hits += 1
            total += hits / rank
    return total / R


def ndcg_at_k(ranking, grades, k=20):
    """NDCG with raw-grade gains and ``log2(rank + 1)`` discounts."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ideal_gains = sorted((g for g in grades.values() if g > 0), reverse=True)
    if not ideal_gains:
        return None
    dcg = sum(
        max(grades.get(doc, 0), 0) / math.log2(rank + 1)
        for rank, doc in enumerate(ranking[:k], start=1)
    )
    idcg = sum(g / math.log2(rank + 1) for rank, g in enumerate(ideal_gains[:k], start=1))
    return dcg / idcg


def recall_at_k(ranking, relevant, k=1000):
    if not relevant:
        return None
    return sum(1 for doc in ranking[:k] if doc in relevant) / len(relevant)


def _relevant(judged):
    return {doc for doc, g in judged.items() if g >= 1}


@dataclass
class MetricsReport:
    per_topic: dict
    aggregates: dict
    no_relevant: list = field(default_factory=list)
    not_in_qrels: list = field(default_factory=list)

    @property
    def n_topics(self):
        return len(self.per_topic)

    def vector(self, metric, topics=None):
        topics = sorted(self.per_topic) if topics is None else topics
        return np.array([self.per_topic[t][metric] for t in topics])

    def to_dict(self):
        return {
            "per_topic": self.per_topic,
            "aggregates": self.aggregates,
            "n_topics": self.n_topics,
            "no_relevant": self.no_relevant,
            "not_in_qrels": self.not_in_qrels,
        }

    def format(self, per_query=False):
        lines = []
        if per_query:
            for topic in sorted(self.per_topic):
                for m in METRICS:
                    lines.append(f"{m:<12}{topic:<10}{self.per_topic[topic][m]:.6f}")
        for m in METRICS:
            lines.append(f"{m:<12}{'all':<10}{self.aggregates[m]:.6f}")
        lines.append(f"{'num_q':<12}{'all':<10}{self.n_topics}")
        if self.no_relevant:
            lines.append(f"{'no_rel':<12}{'all':<10}{len(self.no_relevant)}")
        if self.not_in_qrels:
            lines.append(f"{'unjudged_q':<12}{'all':<10}{len(self.not_in_qrels)}")
        return "\n".join(lines) + "\n"


def evaluate(run, qrels):
    """Per-topic and mean metrics for the run's topics that have relevant documents."""
    per_topic = {}
    no_rel, missing = [], []
    for topic in sorted(run.results):
        if topic not in qrels:
            missing.append(topic)
            continue
        judged = qrels[topic]
        rel = _relevant(judged)
        if not rel:
            no_rel.append(topic)
            continue
        ranking = run.ranking(topic)
        per_topic[topic] = {
            "map": average_precision(ranking, rel, 1000),
            "ndcg20": ndcg_at_k(ranking, judged, 20),
            "recall1000": recall_at_k(ranking, rel, 1000),
        }
    aggregates = {
        m: (math.fsum(v[m] for v in per_topic.values()) / len(per_topic) if per_topic else 0.0)
        for m in METRICS
    }
    return MetricsReport(per_topic, aggregates, no_rel, missing)


# -- significance --------------------------------------------------------------


@dataclass(frozen=True)
class SigTestResult:
    t_statistic: float
    p_value: float
    n_pairs: int
    mean_diff: float
    degenerate: bool = False


def paired_ttest(a, b):
    """Two-sided paired Student's t-test on ``a - b``.

    The p-value is ``I_{nu/(nu+t^2)}(nu/2, 1/2)`` with ``nu = n - 1``.
    Zero-variance differences give ``p = 1`` if the mean difference is 0;
    otherwise ``t = +/-inf``, ``p = 0`` and ``degenerate`` is set.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired vectors must be one-dimensional and of equal length")
    n = a.size
    if n < 2:
        raise ValueError("need at least two pairs")
    d = a - b
    mean = math.fsum(d) / n
    var = math.fsum((d - mean) ** 2) / (n - 1)
    if var == 0.0:
        if mean == 0.0:
            return SigTestResult(0.0, 1.0, n, 0.0)
        warnings.warn("paired differences have zero variance", DegenerateTestWarning, stacklevel=2)
        return SigTestResult(math.copysign(math.inf, mean), 0.0, n, mean, degenerate=True)
    t = mean / math.sqrt(var / n)
    nu = n - 1
    p = float(special.betainc(nu / 2.0, 0.5, nu / (nu + t * t)))
    return SigTestResult(t, min(max(p, 0.0), 1.0), n, mean)


# -- batch runs and sweeps -----------------------------------------------------


def batch_run(idx, cfg, topics, k=1000, tag="spudlm", threads=1):
    """Retrieve for every ``(topic_id, text)``; empty queries give empty rankings."""

    def one(topic):
        tid, text = topic
        q = prepare_query(text, idx)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            hits = retrieve(q, idx, cfg, k) if q else []
        return tid, [(h.doc_id, h.score) for h in hits]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs = list(pool.map(one, topics))
    else:
        pairs = [one(t) for t in topics]
    return Run(dict(pairs), tag)


def parse_grid(text):
    """``"250:2500:250"`` (inclusive) or ``"250,500,1000"`` -> list of floats."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0 or stop < start:
            raise ValueError(f"bad grid {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    return [float(x) for x in text.split(",") if x.strip()]


@dataclass
class SweepResult:
    rows: list
    per_query: dict
    errors: dict

    def format(self):
        lines = ["param\tmap\tndcg20\trecall1000"]
        for p, m, n, r in self.rows:
            lines.append(f"{p:g}\t{m:.6f}\t{n:.6f}\t{r:.6f}")
        for p, err in self.errors.items():
            lines.append(f"{p:g}\terror: {err}")
        return "\n".join(lines) + "\n"


def sweep(idx, model, grid, topics, qrels, k=1000, threads=1):
    """One batch run and evaluation per grid value, in grid order.

    Per-topic metrics are kept (``per_query[param]``) so any two grid
    points can be compared with :func:`paired_ttest`. A failing grid point
    is recorded in ``errors`` and the sweep continues.
    """
    if not grid:
        raise ValueError("grid is empty")
    rows, per_query, errors = [], {}, {}
    for param in grid:
        try:
            cfg = ModelConfig.from_name(model, param)
            report = evaluate(batch_run(idx, cfg, topics, k=k, threads=threads), qrels)
        except Exception as exc:  # one bad point must not sink the sweep
            errors[param] = str(exc)
            continue
        agg = report.aggregates
        rows.append((param, agg["map"], agg["ndcg20"], agg["recall1000"]))
        per_query[param] = report.per_topic
    return SweepResult(rows, per_query, errors)

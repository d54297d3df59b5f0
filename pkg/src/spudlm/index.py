"""Inverted index with the collection statistics the ranking functions need.

Besides the usual ``cf``/``df`` and token lengths, every document records
its vector length (number of distinct terms), and the collection keeps
the sum of vector lengths, which normalises the document-frequency
background model.
"""

import hashlib
import json
import os
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import (
    ChecksumError,
    CorpusReadError,
    DataError,
    DuplicateDocumentError,
    FormatVersionError,
    IndexFormatError,
    TruncatedIndexError,
)
from .textprep import TokenPipelineConfig, tokenize

__all__ = [
    "CollectionStats",
    "DocStats",
    "IndexBuilder",
    "InvertedIndex",
    "PostingsList",
    "build_index",
    "load_index",
    "read_corpus",
    "save_index",
    "term_lookup",
]

MAGIC = "SPUDLM-INDEX"
FORMAT_VERSION = 1

_MANIFEST = "manifest.json"
_DICTIONARY = "dictionary.tsv"
_POSTINGS = "postings.bin"
_DOCTABLE = "doctable.jsonl"


@dataclass(frozen=True)
class DocStats:
    doc_id: str
    length_tokens: int
    length_types: int


@dataclass(frozen=True)
class CollectionStats:
    n: int
    total_tokens: int
    vocab_size: int
    sum_vector_lengths: int
    avg_length_tokens: float
    avg_length_types: float

    def to_dict(self):
        return {
            "n": self.n,
            "total_tokens": self.total_tokens,
            "vocab_size": self.vocab_size,
            "sum_vector_lengths": self.sum_vector_lengths,
            "avg_length_tokens": self.avg_length_tokens,
            "avg_length_types": self.avg_length_types,
        }


class PostingsList:
    """Postings for one term, sorted by document ordinal."""

    __slots__ = ("term", "df", "cf", "docs", "tfs")

    def __init__(self, term, docs, tfs):
        self.term = term
        self.docs = np.asarray(docs, dtype=np.int64)
        self.tfs = np.asarray(tfs, dtype=np.int64)
        self.docs.flags.writeable = False
        self.tfs.flags.writeable = False
        self.df = int(self.docs.size)
        self.cf = int(self.tfs.sum())

    def tf(self, ordinal):
        i = int(np.searchsorted(self.docs, ordinal))
        if i < self.df and self.docs[i] == ordinal:
            return int(self.tfs[i])
        return 0

    def __len__(self):
        return self.df

    def __iter__(self):
        return zip(self.docs.tolist(), self.tfs.tolist())

    def __eq__(self, other):
        if not isinstance(other, PostingsList):
            return NotImplemented
        return (
            self.term == other.term
            and np.array_equal(self.docs, other.docs)
            and np.array_equal(self.tfs, other.tfs)
        )

    def __repr__(self):
        return f"PostingsList({self.term!r}, df={self.df}, cf={self.cf})"


class InvertedIndex:
    """Read-only index. Construct through :class:`IndexBuilder` or :func:`load_index`."""

    def __init__(self, dictionary, docs, pipeline):
        self.dictionary = dictionary
        self.docs = tuple(docs)
        self.pipeline = pipeline
        self.terms = tuple(sorted(dictionary))
        self.doc_lengths = np.array([d.length_tokens for d in self.docs], dtype=np.int64)
        self.doc_types = np.array([d.length_types for d in self.docs], dtype=np.int64)
        self._ordinals = {d.doc_id: i for i, d in enumerate(self.docs)}
        total = int(self.doc_lengths.sum())
        vec = int(self.doc_types.sum())
        n = len(self.docs)
        self.stats = CollectionStats(
            n=n,
            total_tokens=total,
            vocab_size=len(dictionary),
            sum_vector_lengths=vec,
            avg_length_tokens=total / n if n else 0.0,
            avg_length_types=vec / n if n else 0.0,
        )
        self._forward = self._build_forward()

    def _build_forward(self):
        # CSR layout: document ordinal -> (term ids, tfs)
        n = len(self.docs)
        counts = np.zeros(n + 1, dtype=np.int64)
        chunks_d, chunks_t, chunks_f = [], [], []
        for tid, term in enumerate(self.terms):
            pl = self.dictionary[term]
            chunks_d.append(pl.docs)
            chunks_t.append(np.full(pl.df, tid, dtype=np.int64))
            chunks_f.append(pl.tfs)
        if chunks_d:
            d = np.concatenate(chunks_d)
            t = np.concatenate(chunks_t)
            f = np.concatenate(chunks_f)
        else:
            d = t = f = np.zeros(0, dtype=np.int64)
        order = np.lexsort((t, d))
        np.add.at(counts, d + 1, 1)
        return np.cumsum(counts), t[order], f[order]

    @property
    def pipeline_hash(self):
        return self.pipeline.hash

    @property
    def n_docs(self):
        return len(self.docs)

    def __contains__(self, term):
        return term in self.dictionary

    def term_lookup(self, term):
        return self.dictionary.get(term)

    def ordinal(self, doc_id):
        return self._ordinals[doc_id]

    def doc_id(self, ordinal):
        return self.docs[ordinal].doc_id

    def is_retrievable(self, ordinal):
        return self.docs[ordinal].length_tokens > 0

    def doc_terms(self, ordinal):
        """Forward view of one document as ``{term: c(t,d)}``."""
        ptr, tids, tfs = self._forward
        lo, hi = ptr[ordinal], ptr[ordinal + 1]
        return {self.terms[t]: f for t, f in zip(tids[lo:hi].tolist(), tfs[lo:hi].tolist())}

    def __eq__(self, other):
        if not isinstance(other, InvertedIndex):
            return NotImplemented
        return (
            self.docs == other.docs
            and self.stats == other.stats
            and self.pipeline == other.pipeline
            and self.dictionary == other.dictionary
        )

    def __repr__(self):
        s = self.stats
        return f"InvertedIndex(n={s.n}, vocab={s.vocab_size}, tokens={s.total_tokens})"


def term_lookup(idx, term):
    return idx.term_lookup(term)


class IndexBuilder:
    """Single-writer accumulator; :meth:`finalize` freezes it into an index."""

    def __init__(self, cfg=None):
        self.cfg = cfg if cfg is not None else TokenPipelineConfig.default()
        self.docs = []
        self._seen = set()
        self._postings = {}
        self.cf = Counter()
        self.df = Counter()

    def add(self, doc_id, text):
        return self.add_tokens(doc_id, tokenize(text, self.cfg))

    def add_tokens(self, doc_id, tokens):
        if doc_id in self._seen:
            raise DuplicateDocumentError(doc_id)
        self._seen.add(doc_id)
        ordinal = len(self.docs)
        counts = Counter(tokens)
        for term, tf in counts.items():
            self._postings.setdefault(term, ([], []))
            self._postings[term][0].append(ordinal)
            self._postings[term][1].append(tf)
            self.cf[term] += tf
            self.df[term] += 1
        self.docs.append(DocStats(doc_id, len(tokens), len(counts)))
        return ordinal

    def finalize(self):
        if not self.docs:
            raise DataError("cannot build an index from an empty corpus")
        dictionary = {
            term: PostingsList(term, docs, tfs)
            for term, (docs, tfs) in self._postings.items()
        }
        return InvertedIndex(dictionary, self.docs, self.cfg)


def build_index(corpus, cfg=None):
    """Index an iterable of ``(doc_id, text)`` pairs."""
    builder = IndexBuilder(cfg)
    for doc_id, text in corpus:
        builder.add(doc_id, text)
    return builder.finalize()


def read_corpus(path):
    """Yield ``(id, text)`` from a JSON-lines corpus file."""
    offset = 0
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            start = offset
            offset += len(raw)
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line.decode("utf-8"))
                doc_id, text = obj["id"], obj["text"]
            except (UnicodeDecodeError, ValueError, KeyError, TypeError) as exc:
                raise CorpusReadError(path, lineno, start, repr(exc)) from None
            if not isinstance(doc_id, str) or not isinstance(text, str):
                raise CorpusReadError(path, lineno, start, "'id' and 'text' must be strings")
            yield doc_id, text


# -- persistence -------------------------------------------------------------


def _varint_encode(values):
    values = np.asarray(values, dtype=np.uint64)
    if values.size == 0:
        return b""
    nbytes = np.ones(values.size, dtype=np.int64)
    rest = values >> np.uint64(7)
    while rest.any():
        nbytes += rest > 0
        rest >>= np.uint64(7)
    starts = np.concatenate(([0], np.cumsum(nbytes)[:-1]))
    out = np.zeros(int(nbytes.sum()), dtype=np.uint8)
    for k in range(int(nbytes.max())):
        sel = nbytes > k
        chunk = (values[sel] >> np.uint64(7 * k)) & np.uint64(0x7F)
        more = (nbytes[sel] > k + 1).astype(np.uint64) << np.uint64(7)
        out[starts[sel] + k] = (chunk | more).astype(np.uint8)
    return out.tobytes()


def _varint_decode(buf):
    b = np.frombuffer(buf, dtype=np.uint8)
    if b.size == 0:
        return np.zeros(0, dtype=np.int64)
    ends = np.flatnonzero(b < 0x80)
    if ends.size == 0 or ends[-1] != b.size - 1:
        raise IndexFormatError("postings block ends inside a varint")
    starts = np.concatenate(([0], ends[:-1] + 1))
    group = np.repeat(np.arange(ends.size), ends - starts + 1)
    shift = (np.arange(b.size) - starts[group]) * 7
    payload = (b & 0x7F).astype(np.uint64) << shift.astype(np.uint64)
    return np.add.reduceat(payload, starts).astype(np.int64)


def _sha256(data):
    return hashlib.sha256(data).hexdigest()


def save_index(idx, path):
    """Write ``idx`` to directory ``path``. Output is byte-deterministic."""
    os.makedirs(path, exist_ok=True)
    dict_lines = []
    postings = bytearray()
    for term in idx.terms:
        pl = idx.dictionary[term]
        if "\t" in term or "\n" in term:
            raise DataError(f"term contains a tab or newline: {term!r}")
        gaps = np.diff(pl.docs, prepend=0)
        inter = np.empty(2 * pl.df, dtype=np.int64)
        inter[0::2] = gaps
        inter[1::2] = pl.tfs
        block = _varint_encode(inter)
        dict_lines.append(f"{term}\t{pl.df}\t{pl.cf}\t{len(postings)}\t{len(block)}\n")
        postings += block
    dictionary = "".join(dict_lines).encode("utf-8")
    doctable = "".join(
        json.dumps([d.doc_id, d.length_tokens, d.length_types], ensure_ascii=False) + "\n"
        for d in idx.docs
    ).encode("utf-8")
    files = {_DICTIONARY: dictionary, _POSTINGS: bytes(postings), _DOCTABLE: doctable}
    manifest = {
        "magic": MAGIC,
        "format_version": FORMAT_VERSION,
        "pipeline_hash": idx.pipeline_hash,
        "pipeline": idx.pipeline.to_dict(),
        "stats": idx.stats.to_dict(),
        "files": {name: {"bytes": len(data), "sha256": _sha256(data)} for name, data in files.items()},
    }
    for name, data in files.items():
        with open(os.path.join(path, name), "wb") as fh:
            fh.write(data)
    with open(os.path.join(path, _MANIFEST), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_checked(path, name, meta):
    try:
        with open(os.path.join(path, name), "rb") as fh:
            data = fh.read()
    except FileNotFoundError:
        raise IndexFormatError(f"missing index file {name}") from None
    if len(data) < meta["bytes"]:
        raise TruncatedIndexError(f"{name}: {len(data)} bytes, expected {meta['bytes']}")
    if len(data) != meta["bytes"] or _sha256(data) != meta["sha256"]:
        raise ChecksumError(f"{name}: checksum mismatch")
    return data


def load_index(path):
    """Load a directory written by :func:`save_index`."""
    try:
        with open(os.path.join(path, _MANIFEST), encoding="utf-8") as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise IndexFormatError(f"{path}: no {_MANIFEST}") from None
    except ValueError as exc:
        raise IndexFormatError(f"{path}: unreadable manifest ({exc})") from None
    if manifest.get("magic") != MAGIC:
        raise IndexFormatError(f"{path}: not a spudlm index")
    if manifest.get("format_version") != FORMAT_VERSION:
        raise FormatVersionError(
            f"{path}: format version {manifest.get('format_version')}, expected {FORMAT_VERSION}"
        )
    files = manifest["files"]
    raw = {name: _read_checked(path, name, files[name]) for name in (_DICTIONARY, _POSTINGS, _DOCTABLE)}
    pipeline = TokenPipelineConfig.from_dict(manifest["pipeline"])
    if pipeline.hash != manifest["pipeline_hash"]:
        raise ChecksumError("pipeline hash does not match stored pipeline")

    docs = []
    for line in raw[_DOCTABLE].decode("utf-8").splitlines():
        doc_id, ntok, ntypes = json.loads(line)
        docs.append(DocStats(doc_id, ntok, ntypes))

    postings = raw[_POSTINGS]
    dictionary = {}
    for line in raw[_DICTIONARY].decode("utf-8").splitlines():
        term, df, cf, off, size = line.split("\t")
        off, size, df = int(off), int(size), int(df)
        vals = _varint_decode(postings[off:off + size])
        if vals.size != 2 * df:
            raise IndexFormatError(f"postings for {term!r}: expected {df} entries")
        pl = PostingsList(term, np.cumsum(vals[0::2]), vals[1::2])
        if pl.cf != int(cf):
            raise IndexFormatError(f"postings for {term!r}: cf mismatch")
        dictionary[term] = pl
    idx = InvertedIndex(dictionary, docs, pipeline)
    if idx.stats.to_dict() != manifest["stats"]:
        raise IndexFormatError("collection statistics disagree with manifest")
    return idx

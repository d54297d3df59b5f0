"""Text-to-token pipeline shared by documents and queries."""

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from importlib import resources

from .porter import porter_stem

__all__ = [
    "STOPWORDS_ENV",
    "TokenPipelineConfig",
    "default_stopwords",
    "load_stopwords",
    "porter_stem",
    "tokenize",
]

STOPWORDS_ENV = "SPUDLM_STOPWORDS"

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")
_ALPHA_RE = re.compile(r"[a-z]+\Z")


def load_stopwords(path):
    """Read a stopword file: UTF-8, one word per line, ``#`` lines ignored."""
    with open(path, encoding="utf-8") as fh:
        return parse_stopwords(fh.read())


def parse_stopwords(text):
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


def default_stopwords():
    """The bundled English list, or the file named by ``$SPUDLM_STOPWORDS``."""
    env = os.environ.get(STOPWORDS_ENV)
    if env:
        return load_stopwords(env)
    text = resources.files("spudlm").joinpath("data/stopwords.txt").read_text("utf-8")
    return parse_stopwords(text)


@dataclass(frozen=True)
class TokenPipelineConfig:
    """Tokenizer settings. Stopwords are matched before stemming."""

    lowercase: bool = True
    stopwords: frozenset = field(default_factory=frozenset)
    stem: bool = True

    @classmethod
    def default(cls):
        return cls(stopwords=default_stopwords())

    def to_dict(self):
        return {
            "lowercase": self.lowercase,
            "stem": self.stem,
            "stopwords": sorted(self.stopwords),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            lowercase=bool(data["lowercase"]),
            stopwords=frozenset(data["stopwords"]),
            stem=bool(data["stem"]),
        )

    @property
    def hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def tokenize(text, cfg):
    """Split on non-ASCII-alphanumerics, lowercase, drop stopwords, stem.

    Only purely alphabetic tokens go through the stemmer; tokens carrying
    digits are kept verbatim.
    """
    out = []
    for tok in _TOKEN_RE.findall(text):
        if cfg.lowercase:
            tok = tok.lower()
        if tok in cfg.stopwords:
            continue
        if cfg.stem and _ALPHA_RE.match(tok):
            tok = porter_stem(tok)
        if tok:
            out.append(tok)
    return out

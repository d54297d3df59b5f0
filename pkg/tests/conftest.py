import json

import pytest

from spudlm.index import build_index
from spudlm.textprep import TokenPipelineConfig

# d1 = {t1 x8, t2 x2}, d2 = {t2}, d3 = {t2 x3}, d4 = {t2}
TOY_CORPUS = [
    ("d1", "t1 " * 8 + "t2 t2"),
    ("d2", "t2"),
    ("d3", "t2 t2 t2"),
    ("d4", "t2"),
]

PLAIN = TokenPipelineConfig(stopwords=frozenset(), stem=False)


@pytest.fixture(scope="session")
def toy_index():
    return build_index(TOY_CORPUS, PLAIN)


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


@pytest.fixture
def toy_files(tmp_path):
    """Toy corpus, topics and qrels on disk."""
    corpus = tmp_path / "corpus.jsonl"
    write_jsonl(corpus, [{"id": i, "text": t} for i, t in TOY_CORPUS])
    topics = tmp_path / "topics.jsonl"
    write_jsonl(topics, [{"id": "q1", "text": "t1 t2"}, {"id": "q2", "text": "t2"}])
    qrels = tmp_path / "qrels.txt"
    qrels.write_text("q1 0 d1 2\nq1 0 d3 1\nq2 0 d3 1\nq2 0 d2 0\n")
    return tmp_path, corpus, topics, qrels


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(RESULTS):
            terminalreporter.write_line(line)

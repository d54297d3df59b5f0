import json
import subprocess
import sys

import pytest

from conftest import write_jsonl
from spudlm.cli import main
from spudlm.index import load_index
from spudlm.synthetic import planted_collection


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def indexed(toy_files, capsys):
    tmp, corpus, topics, qrels = toy_files
    code, _, _ = run_cli(capsys, "index", "--corpus", corpus, "--out", tmp / "idx")
    assert code == 0
    return tmp, tmp / "idx", topics, qrels


def test_help_exits_zero():
    proc = subprocess.run([sys.executable, "-m", "spudlm", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "usage: spudlm" in proc.stdout


def test_unknown_flag_is_named(capsys):
    code, _, err = run_cli(capsys, "eval", "--run", "r", "--qrels", "q", "--frobnicate")
    assert code == 1 and "--frobnicate" in err
    code, _, err = run_cli(capsys, "--frobnicate")
    assert code == 1 and "--frobnicate" in err


def test_unknown_subcommand(capsys):
    code, _, err = run_cli(capsys, "explode")
    assert code == 1 and "usage:" in err


def test_config_echoed_to_stderr(indexed, capsys):
    _, idx, _, _ = indexed
    code, _, err = run_cli(capsys, "search", "--index", idx, "--model", "spud_dir", "--param", "10", "--query", "t2")
    line = next(l for l in err.splitlines() if l.startswith("config: "))
    cfg = json.loads(line[len("config: "):])
    assert cfg["model"] == "spud_dir" and cfg["param"] == 10.0 and cfg["k"] == 10 and cfg["threads"] == 1


def test_search(indexed, capsys):
    _, idx, _, _ = indexed
    code, out, _ = run_cli(capsys, "search", "--index", idx, "--model", "spud_dir", "--param", "10", "--query", "t2")
    assert code == 0
    assert [l.split("\t")[1] for l in out.splitlines()] == ["d2", "d3", "d4", "d1"]


def test_spud_jm_rejects_param(indexed, capsys):
    _, idx, _, _ = indexed
    code, _, err = run_cli(capsys, "search", "--index", idx, "--model", "spud_jm", "--param", "5", "--query", "t2")
    assert code == 1 and "no parameter" in err
    code, _, _ = run_cli(capsys, "search", "--index", idx, "--model", "mql_dir", "--query", "t2")
    assert code == 1


def test_run_eval_pipeline(indexed, capsys):
    tmp, idx, topics, qrels = indexed
    code, _, _ = run_cli(capsys, "run", "--index", idx, "--model", "spud_jm", "--topics", topics,
                         "--out", tmp / "run.txt", "--tag", "jm")
    assert code == 0
    lines = (tmp / "run.txt").read_text().splitlines()
    assert lines[0].split() == ["q1", "Q0", "d1", "1", "0.307485", "jm"]
    code, out, _ = run_cli(capsys, "eval", "--run", tmp / "run.txt", "--qrels", qrels, "--json")
    report = json.loads(out)
    assert code == 0 and report["n_topics"] == 2
    code, out, _ = run_cli(capsys, "eval", "--run", tmp / "run.txt", "--qrels", qrels, "--per-query")
    assert "map         q1" in out


def test_repeated_pipeline_is_byte_identical(toy_files, capsys):
    tmp, corpus, topics, qrels = toy_files
    outputs = []
    for rep in range(2):
        d = tmp / f"rep{rep}"
        run_cli(capsys, "index", "--corpus", corpus, "--out", d / "idx")
        run_cli(capsys, "run", "--index", d / "idx", "--model", "spud_dir", "--param", "1000",
                "--topics", topics, "--out", d / "run")
        _, report, _ = run_cli(capsys, "eval", "--run", d / "run", "--qrels", qrels, "--json")
        files = {p.name: p.read_bytes() for p in sorted((d / "idx").iterdir())}
        outputs.append((files, (d / "run").read_bytes(), report))
    assert outputs[0] == outputs[1]


def test_stopword_precedence(toy_files, tmp_path, capsys, monkeypatch):
    _, corpus, _, _ = toy_files
    env_list = tmp_path / "env.txt"
    env_list.write_text("t1\n")
    flag_list = tmp_path / "flag.txt"
    flag_list.write_text("t2\n")
    monkeypatch.setenv("SPUDLM_STOPWORDS", str(env_list))
    run_cli(capsys, "index", "--corpus", corpus, "--out", tmp_path / "a")
    assert load_index(tmp_path / "a").terms == ("t2",)
    run_cli(capsys, "index", "--corpus", corpus, "--out", tmp_path / "b", "--stopwords", flag_list)
    assert load_index(tmp_path / "b").terms == ("t1",)
    monkeypatch.delenv("SPUDLM_STOPWORDS")
    run_cli(capsys, "index", "--corpus", corpus, "--out", tmp_path / "c")
    assert load_index(tmp_path / "c").terms == ("t1", "t2")


def test_no_stem_flag(tmp_path, capsys):
    corpus = tmp_path / "c.jsonl"
    write_jsonl(corpus, [{"id": "a", "text": "running dogs"}])
    run_cli(capsys, "index", "--corpus", corpus, "--out", tmp_path / "s")
    run_cli(capsys, "index", "--corpus", corpus, "--out", tmp_path / "n", "--no-stem")
    assert load_index(tmp_path / "s").terms == ("dog", "run")
    assert load_index(tmp_path / "n").terms == ("dogs", "running")


def test_data_errors_exit_two(indexed, tmp_path, capsys):
    tmp, idx, _, qrels = indexed
    assert run_cli(capsys, "eval", "--run", tmp_path / "missing", "--qrels", qrels)[0] == 2
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{oops\n")
    code, _, err = run_cli(capsys, "index", "--corpus", bad, "--out", tmp_path / "i")
    assert code == 2 and "line 1" in err
    data = bytearray((idx / "postings.bin").read_bytes())
    data[0] ^= 0x01
    (idx / "postings.bin").write_bytes(bytes(data))
    assert run_cli(capsys, "search", "--index", idx, "--model", "spud_jm", "--query", "t2")[0] == 2


def test_estimate_mc(indexed, capsys):
    _, idx, _, _ = indexed
    code, out, _ = run_cli(capsys, "estimate-mc", "--index", idx)
    rows = dict(l.split("\t") for l in out.splitlines())
    assert code == 0 and rows["converged"] == "true"
    m = float(rows["m_c"])
    assert float(rows["0.8"]) == pytest.approx(4 * m, rel=1e-6)
    assert float(rows["0.5"]) == pytest.approx(m, rel=1e-6)


def test_estimate_mc_non_convergence_exits_three(indexed, capsys):
    _, idx, _, _ = indexed
    assert run_cli(capsys, "estimate-mc", "--index", idx, "--max-iter", "2")[0] == 3


def test_estimate_mc_divergence_exits_three(tmp_path, capsys, monkeypatch):
    from spudlm import cli
    from spudlm.errors import DivergenceError

    def boom(*a, **k):
        raise DivergenceError("iterate left the positive reals", last_value=1.0, iterations=3)

    corpus = tmp_path / "c.jsonl"
    write_jsonl(corpus, [{"id": "a", "text": "x y"}])
    run_cli(capsys, "index", "--corpus", corpus, "--out", tmp_path / "i")
    monkeypatch.setattr(cli, "estimate_mc", boom)
    assert run_cli(capsys, "estimate-mc", "--index", tmp_path / "i")[0] == 3


@pytest.fixture
def planted_files(tmp_path, capsys):
    col = planted_collection(n_docs=150, n_topics=6, seed=1)
    corpus, topics, qrels = tmp_path / "c.jsonl", tmp_path / "t.jsonl", tmp_path / "q.txt"
    write_jsonl(corpus, [{"id": i, "text": t} for i, t in col.corpus])
    write_jsonl(topics, [{"id": i, "text": t} for i, t in col.topics])
    qrels.write_text("".join(f"{t} 0 {d} {g}\n" for t, j in sorted(col.qrels.items()) for d, g in sorted(j.items())))
    run_cli(capsys, "index", "--corpus", corpus, "--out", tmp_path / "idx")
    return tmp_path, tmp_path / "idx", topics, qrels


def test_expand_and_sigtest(planted_files, capsys):
    tmp, idx, topics, qrels = planted_files
    for variant in ("rm3", "purm"):
        code, _, _ = run_cli(capsys, "expand", "--index", idx, "--model", "spud_dir", "--param", "500",
                             "--topics", topics, "--variant", variant, "--k", "5", "--terms", "10",
                             "--out", tmp / f"{variant}.run")
        assert code == 0
    code, out, _ = run_cli(capsys, "sigtest", "--run-a", tmp / "rm3.run", "--run-b", tmp / "purm.run",
                           "--qrels", qrels, "--metric", "ndcg20", "--json")
    res = json.loads(out)
    assert code == 0 and res["n_pairs"] == 6 and 0.0 <= res["p_value"] <= 1.0


def test_sweep_cli(planted_files, capsys):
    _, idx, topics, qrels = planted_files
    code, out, _ = run_cli(capsys, "sweep", "--index", idx, "--model", "mql_dir", "--grid", "250:1000:250",
                           "--topics", topics, "--qrels", qrels)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "param\tmap\tndcg20\trecall1000"
    assert [l.split("\t")[0] for l in lines[1:]] == ["250", "500", "750", "1000"]
    assert run_cli(capsys, "sweep", "--index", idx, "--model", "spud_jm", "--topics", topics, "--qrels", qrels)[0] == 1


def test_diagnose_commands(planted_files, capsys):
    tmp, idx, topics, qrels = planted_files
    code, out, _ = run_cli(capsys, "diagnose", "lnc2", "--index", idx, "--model", "lm2", "--param", "500",
                           "--trials", "100", "--seed", "3")
    assert code == 0 and "verdict\tviolated" in out and "witness\t" in out
    code, out, _ = run_cli(capsys, "diagnose", "lnc2", "--index", idx, "--model", "lm3", "--param", "500",
                           "--trials", "100", "--seed", "3")
    assert "verdict\tsatisfied" in out and "max_abs_delta\t0.000e+00" in out
    assert run_cli(capsys, "diagnose", "lnc2", "--index", idx, "--model", "lm3", "--param", "5")[0] == 1

    run_cli(capsys, "run", "--index", idx, "--model", "spud_jm", "--topics", topics, "--out", tmp / "r")
    code, _, _ = run_cli(capsys, "diagnose", "length-bins", "--index", idx, "--run", tmp / "r", "--qrels", qrels,
                         "--bins", "5", "--out", tmp / "bins.csv")
    rows = (tmp / "bins.csv").read_text().splitlines()
    assert code == 0 and rows[0] == "bin,min_length,max_length,p_retrieved,p_relevant" and len(rows) == 6

    code, out, _ = run_cli(capsys, "diagnose", "bg-ratio", "--index", idx, "--top", "3")
    assert code == 0 and len(out.splitlines()) == 6

    code, _, _ = run_cli(capsys, "diagnose", "idf-curve", "--delta", "0.1", "--n", "1000", "--max-df", "10",
                         "--out", tmp / "idf.csv")
    rows = (tmp / "idf.csv").read_text().splitlines()
    assert code == 0 and rows[10] == "10,2.397895,4.605170"

"""Command-line entry point: ``spudlm <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical divergence.
"""

import argparse
import json
import sys

from . import __version__
from .diagnostics import (
    background_ratio_table,
    check_lnc2,
    idf_family_curve,
    length_bin_analysis,
    random_lnc2_trials,
    write_csv,
)
from .errors import ConfigError, DataError, DivergenceError, DomainError
from .estimation import derive_mu_prime, estimate_mc
from .evaluation import (
    METRICS,
    MU_GRID,
    PI_GRID,
    Run,
    batch_run,
    evaluate,
    paired_ttest,
    parse_grid,
    read_qrels,
    read_run,
    read_topics,
    sweep,
    write_run,
)
from .feedback import FeedbackConfig, expand_and_rerank
from .index import build_index, load_index, read_corpus, save_index
from .ranking import ModelConfig, prepare_query, retrieve
from .textprep import TokenPipelineConfig, default_stopwords, load_stopwords

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGENCE = 0, 1, 2, 3

MODEL_NAMES = ("mql_jm", "mql_dir", "lm1", "lm2", "lm3", "lm4", "spud_jm", "spud_dir")


class UsageError(Exception):
    pass


class _ReportedUsageError(UsageError):
    """Raised after argparse has already printed usage and the message."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise _ReportedUsageError(message)


def _model_config(args):
    try:
        return ModelConfig.from_name(args.model, args.param)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _log(msg):
    sys.stderr.write(msg + "\n")


# -- subcommands -------------------------------------------------------------


def cmd_index(args):
    stopwords = load_stopwords(args.stopwords) if args.stopwords else default_stopwords()
    cfg = TokenPipelineConfig(stopwords=stopwords, stem=not args.no_stem)
    idx = build_index(read_corpus(args.corpus), cfg)
    save_index(idx, args.out)
    s = idx.stats
    _log(f"indexed {s.n} documents, {s.vocab_size} terms, {s.total_tokens} tokens")
    return EXIT_OK


def cmd_search(args):
    cfg = _model_config(args)
    idx = load_index(args.index)
    q = prepare_query(args.query, idx)
    if not q:
        _log("warning: query has no in-vocabulary terms")
        return EXIT_OK
    for rank, hit in enumerate(retrieve(q, idx, cfg, args.k), start=1):
        print(f"{rank}\t{hit.doc_id}\t{hit.score:.6f}")
    return EXIT_OK


def cmd_run(args):
    cfg = _model_config(args)
    idx = load_index(args.index)
    run = batch_run(idx, cfg, read_topics(args.topics), k=args.k, tag=args.tag, threads=args.threads)
    write_run(run, args.out)
    return EXIT_OK


def cmd_estimate_mc(args):
    idx = load_index(args.index)
    est = estimate_mc(idx, init=args.init, tol=args.tol, max_iter=args.max_iter)
    print(f"m_c\t{est.m_c:.6f}")
    print(f"iterations\t{est.iterations}")
    print(f"converged\t{str(est.converged).lower()}")
    print(f"residual\t{est.residual:.3e}")
    if est.uninformative:
        print("note\tuninformative collection (all documents have length 1)")
    print("omega\tmu_prime")
    for omega in (0.5, 0.7, 0.8, 0.9):
        print(f"{omega}\t{derive_mu_prime(omega, est.m_c):.6f}")
    if not est.converged:
        _log(f"error: no convergence after {est.iterations} iterations")
        return EXIT_DIVERGENCE
    return EXIT_OK


def cmd_expand(args):
    cfg = _model_config(args)
    try:
        fb = FeedbackConfig(k_docs=args.k, n_terms=args.terms, tau=args.tau,
                            expansion_mu=args.expansion_mu, variant=args.variant,
                            score_mu=args.param)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    idx = load_index(args.index)
    results = {}
    for tid, text in read_topics(args.topics):
        q = prepare_query(text, idx)
        hits = expand_and_rerank(q, idx, cfg, fb, k=args.depth) if q else []
        results[tid] = [(h.doc_id, h.score) for h in hits]
    write_run(Run(results, args.tag), args.out)
    return EXIT_OK


def cmd_eval(args):
    report = evaluate(read_run(args.run), read_qrels(args.qrels))
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    else:
        sys.stdout.write(report.format(per_query=args.per_query))
    return EXIT_OK


def cmd_sweep(args):
    if args.grid:
        grid = parse_grid(args.grid)
    else:
        grid = list(PI_GRID if args.model == "mql_jm" else MU_GRID)
    if args.model == "spud_jm":
        raise UsageError("spud_jm has no parameter to sweep")
    idx = load_index(args.index)
    result = sweep(idx, args.model, grid, read_topics(args.topics), read_qrels(args.qrels),
                   k=args.k, threads=args.threads)
    sys.stdout.write(result.format())
    if args.per_query_out:
        with open(args.per_query_out, "w", encoding="utf-8") as fh:
            json.dump({f"{p:g}": v for p, v in result.per_query.items()}, fh, sort_keys=True)
            fh.write("\n")
    return EXIT_DATA if result.errors else EXIT_OK


def cmd_sigtest(args):
    qrels = read_qrels(args.qrels)
    a = evaluate(read_run(args.run_a), qrels)
    b = evaluate(read_run(args.run_b), qrels)
    topics = sorted(set(a.per_topic) & set(b.per_topic))
    if len(topics) < 2:
        raise DataError("fewer than two topics are shared by the two runs")
    res = paired_ttest(a.vector(args.metric, topics), b.vector(args.metric, topics))
    if args.json:
        print(json.dumps({"metric": args.metric, "t_statistic": res.t_statistic,
                          "p_value": res.p_value, "n_pairs": res.n_pairs,
                          "mean_diff": res.mean_diff, "degenerate": res.degenerate}))
    else:
        print(f"metric\t{args.metric}")
        print(f"n_pairs\t{res.n_pairs}")
        print(f"mean_diff\t{res.mean_diff:.6f}")
        print(f"t\t{res.t_statistic:.6f}")
        print(f"p\t{res.p_value:.6g}")
    return EXIT_OK


def cmd_diag_lnc2(args):
    cfg = _model_config(args)
    idx = load_index(args.index)
    report = check_lnc2(idx, cfg, random_lnc2_trials(idx, args.trials, args.seed))
    print(f"model\t{report.model}")
    print(f"trials\t{len(report.trials)}")
    print(f"max_abs_delta\t{report.max_abs_delta:.3e}")
    print(f"verdict\t{report.verdict}")
    w = report.witness
    if w is not None:
        terms = " ".join(f"{t}x{c}" for t, c in w.query.terms)
        print(f"witness\tdoc={idx.doc_id(w.doc)} k={w.k} query={terms} "
              f"original={w.score_original:.6f} concat={w.score_concat:.6f}")
    return EXIT_OK


def cmd_diag_length_bins(args):
    idx = load_index(args.index)
    curve = length_bin_analysis(read_run(args.run), read_qrels(args.qrels), idx,
                                n_bins=args.bins, length_kind=args.length)
    write_csv(args.out, ["bin", "min_length", "max_length", "p_retrieved", "p_relevant"],
              curve.rows())
    return EXIT_OK


def cmd_diag_bg_ratio(args):
    idx = load_index(args.index)
    top, bottom = background_ratio_table(idx, top_n=args.top)
    for label, rows in (("top", top), ("bottom", bottom)):
        for i, r in enumerate(rows, start=1):
            print(f"{label}\t{i}\t{r.term}\t{r.ratio:.6f}\t{r.p_dcm:.6g}\t{r.p_multinomial:.6g}")
    return EXIT_OK


def cmd_diag_idf_curve(args):
    n = load_index(args.index).n_docs if args.index else args.n
    max_df = args.max_df or n
    rows = idf_family_curve(n, args.delta, range(1, max_df + 1))
    write_csv(args.out, ["df", "spud_idf", "classic_idf"], rows)
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="spudlm", description="Pólya urn query-likelihood retrieval workbench.")
    p.add_argument("--version", action="version", version=f"spudlm {__version__}")
    p.add_argument("--threads", type=int, default=1, help="cap on internal parallelism")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def model_args(sp, choices=MODEL_NAMES):
        sp.add_argument("--model", required=True, choices=choices)
        sp.add_argument("--param", type=float, default=None,
                        help="pi, mu or mu' depending on the model (omit for spud_jm)")

    sp = sub.add_parser("index", help="build an index from a JSON-lines corpus")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--stopwords", help="stopword file (default: $SPUDLM_STOPWORDS or bundled list)")
    sp.add_argument("--no-stem", action="store_true")
    sp.set_defaults(func=cmd_index)

    sp = sub.add_parser("search", help="rank documents for one query")
    sp.add_argument("--index", required=True)
    model_args(sp)
    sp.add_argument("--query", required=True)
    sp.add_argument("-k", type=int, default=10)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("run", help="batch retrieval to a TREC run file")
    sp.add_argument("--index", required=True)
    model_args(sp)
    sp.add_argument("--topics", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--tag", default="spudlm")
    sp.add_argument("-k", type=int, default=1000)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("estimate-mc", help="estimate the background concentration m_c")
    sp.add_argument("--index", required=True)
    sp.add_argument("--init", type=float, default=200.0)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=100)
    sp.set_defaults(func=cmd_estimate_mc)

    sp = sub.add_parser("expand", help="pseudo-relevance feedback run (RM3 or PURM)")
    sp.add_argument("--index", required=True)
    model_args(sp, choices=("spud_dir", "mql_dir"))
    sp.add_argument("--topics", required=True)
    sp.add_argument("--variant", required=True, choices=("rm3", "purm"))
    sp.add_argument("--k", type=int, default=20, help="feedback documents")
    sp.add_argument("--terms", type=int, default=50)
    sp.add_argument("--tau", type=float, default=0.5)
    sp.add_argument("--expansion-mu", type=float, default=0.0)
    sp.add_argument("--depth", type=int, default=1000)
    sp.add_argument("--tag", default="spudlm-prf")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("eval", help="MAP, NDCG@20 and Recall@1000 of a run")
    sp.add_argument("--run", required=True)
    sp.add_argument("--qrels", required=True)
    sp.add_argument("--per-query", action="store_true")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("sweep", help="evaluate a model over a parameter grid")
    sp.add_argument("--index", required=True)
    sp.add_argument("--model", required=True, choices=MODEL_NAMES)
    sp.add_argument("--grid", help="start:stop:step (inclusive) or comma list")
    sp.add_argument("--topics", required=True)
    sp.add_argument("--qrels", required=True)
    sp.add_argument("-k", type=int, default=1000)
    sp.add_argument("--per-query-out", help="write per-topic metrics per grid point as JSON")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("sigtest", help="paired two-sided t-test between two runs")
    sp.add_argument("--run-a", required=True)
    sp.add_argument("--run-b", required=True)
    sp.add_argument("--qrels", required=True)
    sp.add_argument("--metric", choices=METRICS, default="map")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_sigtest)

    diag = sub.add_parser("diagnose", help="analyses of ranking behaviour")
    dsub = diag.add_subparsers(dest="diagnostic", metavar="DIAGNOSTIC", parser_class=_Parser)
    dsub.required = True

    sp = dsub.add_parser("lnc2", help="self-concatenation invariance check")
    sp.add_argument("--index", required=True)
    model_args(sp)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)
    sp.set_defaults(func=cmd_diag_lnc2)

    sp = dsub.add_parser("length-bins", help="retrieval vs relevance by document length")
    sp.add_argument("--index", required=True)
    sp.add_argument("--run", required=True)
    sp.add_argument("--qrels", required=True)
    sp.add_argument("--bins", type=int, default=50)
    sp.add_argument("--length", choices=("tokens", "types"), default="tokens")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_diag_length_bins)

    sp = dsub.add_parser("bg-ratio", help="terms ranked by DCM/multinomial background ratio")
    sp.add_argument("--index", required=True)
    sp.add_argument("--top", type=int, default=10)
    sp.set_defaults(func=cmd_diag_bg_ratio)

    sp = dsub.add_parser("idf-curve", help="log(1 + delta n/df) next to log(n/df)")
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--n", type=int, default=1000, help="collection size (ignored with --index)")
    sp.add_argument("--index")
    sp.add_argument("--max-df", type=int)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_diag_idf_curve)
    return p


def _resolved(args):
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    if getattr(args, "command", None) == "index" and not args.stopwords:
        import os

        from .textprep import STOPWORDS_ENV

        cfg["stopwords"] = os.environ.get(STOPWORDS_ENV) or "<bundled>"
    return cfg


def main(argv=None):
    parser = build_parser()
    try:
        # parse_known_args first so an unknown flag is named even when the
        # subcommand is missing
        args, extra = parser.parse_known_args(argv)
        if extra:
            parser.error("unrecognized arguments: " + " ".join(extra))
        if args.command is None:
            parser.error("a subcommand is required")
        _log("config: " + json.dumps(_resolved(args), sort_keys=True))
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except _ReportedUsageError:
        return EXIT_USAGE
    except UsageError as exc:
        _log(f"error: {exc}")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except DivergenceError as exc:
        _log(f"error: {exc}")
        return EXIT_DIVERGENCE
    except (DataError, DomainError, ConfigError, OSError, ValueError) as exc:
        _log(f"error: {exc}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

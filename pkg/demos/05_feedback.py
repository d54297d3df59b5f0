"""Pseudo-relevance feedback with RM3 and PURM.

Both build an expansion model from the top documents of a first pass,
weighting each document by its query likelihood. RM3 takes that
likelihood from multinomial Dirichlet scoring, PURM from SPUD_dir. With
tau = 1 the original query is kept unchanged and the second pass
reproduces the first.
"""

from spudlm.evaluation import Run, evaluate
from spudlm.feedback import FeedbackConfig, expand_and_rerank, expansion_model
from spudlm.index import build_index
from spudlm.ranking import Model, ModelConfig, prepare_query, retrieve
from spudlm.synthetic import planted_collection
from spudlm.textprep import TokenPipelineConfig

plain = TokenPipelineConfig(stopwords=frozenset(), stem=False)
col = planted_collection(n_docs=800, n_topics=20, seed=5)
idx = build_index(col.corpus, plain)
model = ModelConfig(Model.SPUD_DIR, mu_prime=1000.0)

tid, text = col.topics[0]
q = prepare_query(text, idx)
first = retrieve(q, idx, model, 1000)
for variant in ("rm3", "purm"):
    qe = expansion_model(q, idx, first, FeedbackConfig(variant=variant, n_terms=8, score_mu=1000.0))
    top = sorted(qe.weights.items(), key=lambda kv: -kv[1])[:5]
    print(f"{variant:<5} expansion for {tid}: " + ", ".join(f"{t}={w:.3f}" for t, w in top))

print()
runs = {"first pass": {}}
for tid, text in col.topics:
    q = prepare_query(text, idx)
    runs["first pass"][tid] = [(h.doc_id, h.score) for h in retrieve(q, idx, model, 1000)]
    for variant in ("rm3", "purm"):
        for tau in (1.0, 0.5):
            fb = FeedbackConfig(variant=variant, tau=tau, score_mu=1000.0)
            hits = expand_and_rerank(q, idx, model, fb, 1000)
            runs.setdefault(f"{variant} tau={tau}", {})[tid] = [(h.doc_id, h.score) for h in hits]
for name, results in runs.items():
    agg = evaluate(Run(results), col.qrels).aggregates
    print(f"{name:<14} MAP {agg['map']:.4f}  NDCG@20 {agg['ndcg20']:.4f}")

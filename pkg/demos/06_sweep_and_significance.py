"""Sweeping the smoothing parameter and testing a difference.

A sweep runs the full retrieve-and-evaluate loop once per grid value and
keeps per-topic scores, so any two settings (or two models) can be
compared with a paired t-test over topics.
"""

from spudlm.evaluation import MU_GRID, batch_run, evaluate, paired_ttest, sweep
from spudlm.index import build_index
from spudlm.ranking import Model, ModelConfig
from spudlm.synthetic import planted_collection
from spudlm.textprep import TokenPipelineConfig

plain = TokenPipelineConfig(stopwords=frozenset(), stem=False)
col = planted_collection(n_docs=1500, n_topics=30, concentration=20.0, seed=6)
idx = build_index(col.corpus, plain)

for model in ("mql_dir", "spud_dir"):
    res = sweep(idx, model, list(MU_GRID), col.topics, col.qrels)
    print(model)
    print(res.format())

topics = sorted(col.qrels)
jm = evaluate(batch_run(idx, ModelConfig(Model.SPUD_JM), col.topics), col.qrels)
dirichlet = evaluate(batch_run(idx, ModelConfig(Model.MQL_DIR, mu=1000.0), col.topics), col.qrels)
t = paired_ttest(jm.vector("map", topics), dirichlet.vector("map", topics))
print(f"spud_jm vs mql_dir(1000): MAP {jm.aggregates['map']:.4f} vs {dirichlet.aggregates['map']:.4f}, "
      f"t = {t.t_statistic:.3f}, p = {t.p_value:.3g} over {t.n_pairs} topics")

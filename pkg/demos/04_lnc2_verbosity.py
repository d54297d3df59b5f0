"""Does repeating a document change its score?

Pasting a document after itself k times makes it more verbose without
adding content. Models that normalise by the number of distinct terms
(LM3, SPUD_dir) give the copy the same score. Multinomial Dirichlet
smoothing (MQL_dir, LM2) treats the copy as a longer, more reliable
sample and moves its score.
"""

from spudlm.diagnostics import check_lnc2, random_lnc2_trials
from spudlm.index import build_index
from spudlm.ranking import Model, ModelConfig
from spudlm.synthetic import polya_corpus
from spudlm.textprep import TokenPipelineConfig

plain = TokenPipelineConfig(stopwords=frozenset(), stem=False)
idx = build_index(polya_corpus(300, vocab_size=200, seed=4), plain)
trials = random_lnc2_trials(idx, 1000, seed=42)

for cfg in (ModelConfig(Model.SPUD_DIR, mu_prime=1000.0), ModelConfig(Model.LM3, mu=1000.0),
            ModelConfig(Model.MQL_DIR, mu=1000.0), ModelConfig(Model.LM2, mu=1000.0)):
    rep = check_lnc2(idx, cfg, trials)
    line = f"{cfg.model.value:<9}{rep.verdict:<10} max |delta| = {rep.max_abs_delta:.3e}"
    w = rep.witness
    if w is not None:
        line += (f"   e.g. {idx.doc_id(w.doc)} x{w.k + 1}: "
                 f"{w.score_original:.4f} -> {w.score_concat:.4f}")
    print(line)

"""Two background models on a four-document collection.

The multinomial background counts tokens: a term that fills one long
document looks common. The DCM background counts documents: it asks how
many documents the term appeared in at all. On this collection the two
disagree about which term is more likely.
"""

from fractions import Fraction

from spudlm.index import build_index
from spudlm.ranking import Model, ModelConfig, Query, retrieve
from spudlm.textprep import TokenPipelineConfig

corpus = [
    ("d1", "t1 " * 8 + "t2 t2"),
    ("d2", "t2"),
    ("d3", "t2 t2 t2"),
    ("d4", "t2"),
]
idx = build_index(corpus, TokenPipelineConfig(stopwords=frozenset(), stem=False))
s = idx.stats
print(f"n={s.n}  |c|={s.total_tokens}  sum |d vec|={s.sum_vector_lengths}\n")

print(f"{'term':<6}{'cf':>4}{'df':>4}{'p_mult = cf/|c|':>18}{'p_dcm = df/S':>16}")
for term in idx.terms:
    pl = idx.dictionary[term]
    p_mult = Fraction(pl.cf, s.total_tokens)
    p_dcm = Fraction(pl.df, s.sum_vector_lengths)
    print(f"{term:<6}{pl.cf:>4}{pl.df:>4}{str(p_mult):>18}{str(p_dcm):>16}")

# t1 fills d1 but appears nowhere else, so the DCM background treats it as rare
print("\nRanking for the query 't1 t2':")
q = Query.from_counts({"t1": 1, "t2": 1})
for cfg in (ModelConfig(Model.MQL_DIR, mu=10.0), ModelConfig(Model.SPUD_DIR, mu_prime=10.0),
            ModelConfig(Model.SPUD_JM)):
    hits = retrieve(q, idx, cfg)
    print(f"  {cfg.model.value:<9}" + "  ".join(f"{h.doc_id}:{h.score:+.3f}" for h in hits))

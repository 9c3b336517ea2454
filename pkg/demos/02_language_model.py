"""Train the built-in LM on verbalized edges; score sequences and rank fills.

Every edge is rendered through four templates (two with the generic
"relates to", two with its own edge-type name); the n-gram counts plus
skip-gram token embeddings come from that corpus.
"""

from hinfill import build_lm_corpus, fill_candidates, load_hin, train_builtin_lm
from hinfill.verbalize import build_infill_template

hin = load_hin("data/synthetic/nodes.tsv", "data/synthetic/edges.tsv")
corpus = build_lm_corpus(hin)
print(f"corpus: {len(corpus)} sentences from {len(hin.edges)} edges (4 per edge)")
print("sample sentences:")
for s in corpus[:4]:
    print("  ", " ".join(s))

lm = train_builtin_lm(hin, order=3, smoothing=0.1, dim=32, epochs=3, seed=7)
print(f"\nvocabulary: {lm.vocab_size} tokens, embedding dim {lm.embedding_dim}")

for seq in [
    ("iron", "fatigue", "treated", "by", "zorvexil"),
    ("iron", "fatigue", "treated", "by", "krxa"),
    ("zorvexil", "treated", "by", "iron", "fatigue"),
]:
    print(f"score {' '.join(seq)!r}: {lm.score(seq):.3f}")

# rank candidate fills for the interior node of a 2-hop prompt
template = build_infill_template(("iron", "fatigue"), ("zorvexil",), 2)
template = template.substitute(0, ("treated", "by"))
fills = fill_candidates(lm, template, 0, hin.all_names(), k=5)
print("\ntop fills for 'iron fatigue treated by [MASK] ...':")
for f in fills:
    print(f"  {' '.join(f.tokens):24s} {f.log_score:.3f}")

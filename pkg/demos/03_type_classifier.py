"""Train the context-aware node type classifier and type names on the fly.

The classifier sees a name embedding plus a context embedding
(neighbor [SEP] edge type [SEP] name) and predicts the node type; an
auxiliary head predicts the neighbor's type from the same context.
"""

from hinfill import load_hin, train_builtin_lm, train_classifier
from hinfill.classifier import classifier_features, classify

hin = load_hin("data/synthetic/nodes.tsv", "data/synthetic/edges.tsv")
lm = train_builtin_lm(hin, order=3, smoothing=0.1, dim=32, epochs=8, seed=7)
params = train_classifier(hin, lm, lam=1.0, lr=0.5, epochs=80, seed=7)

hist = params.history
print(f"trained {hist['best_epoch'] + 1} epochs to best validation loss "
      f"{min(hist['val_loss']):.4f} (train loss {hist['train_loss'][-1]:.4f})")

cases = [
    (("quandrol",), ("iron", "fatigue"), ("treated", "by")),
    (("krxa",), ("xaladine",), ("targets",)),
    (("pallid", "drift"), ("ashen", "drift"), ("similar", "to")),
    (("made", "up", "name"), ("iron", "fatigue"), ("treated", "by")),
]
print("\nname (context)                          -> predicted type")
for name, prev_name, etype in cases:
    h_i, h_e = classifier_features(lm, name, prev_name, etype)
    probs = classify(params, h_i, h_e)
    best = int(probs.argmax())
    label = f"{' '.join(prev_name)} -[{' '.join(etype)}]-> {' '.join(name)}"
    print(f"{label:42s} {hin.node_type_raw[best]} (p={probs[best]:.2f})")

import math

import numpy as np
import pytest

from hinfill.classifier import (
    ClassifierParams,
    classifier_features,
    classify,
    loss_and_grads,
    predict_type,
    train_classifier,
)
from hinfill.graph import load_hin_from_strings
from hinfill.lm import lm_from_sentences


def _params(k, d, lam=1.0, rng=None):
    rng = rng or np.random.default_rng(0)
    return ClassifierParams(
        w1=rng.normal(size=(k, 2 * d)), b1=rng.normal(size=k),
        w2=rng.normal(size=(k, 2 * d)), b2=rng.normal(size=k), lam=lam,
    )


def test_zero_params_give_uniform():
    k, d = 4, 3
    p = ClassifierParams(np.zeros((k, 2 * d)), np.zeros(k), np.zeros((k, 2 * d)), np.zeros(k), 1.0)
    out = classify(p, np.ones(d), np.ones(d))
    assert np.allclose(out, 1 / k)


def test_two_class_hand_softmax():
    # logits (1, 0) via W1 row dotted with unit features
    d = 1
    w1 = np.array([[0.5, 0.5], [0.0, 0.0]])
    p = ClassifierParams(w1, np.zeros(2), np.zeros((2, 2)), np.zeros(2), 1.0)
    out = classify(p, np.array([1.0]), np.array([1.0]))
    e = math.e
    assert out[0] == pytest.approx(e / (e + 1), abs=1e-12)
    assert out[1] == pytest.approx(1 / (e + 1), abs=1e-12)


def test_softmax_shift_invariance():
    rng = np.random.default_rng(1)
    p = _params(3, 4, rng=rng)
    h_i, h_e = rng.normal(size=4), rng.normal(size=4)
    base = classify(p, h_i, h_e)
    shifted = ClassifierParams(p.w1, p.b1 + 7.5, p.w2, p.b2, p.lam)
    assert np.allclose(classify(shifted, h_i, h_e), base, atol=1e-12)


def test_classify_sums_to_one_on_random_inputs():
    rng = np.random.default_rng(2)
    for _ in range(50):
        k, d = int(rng.integers(2, 6)), int(rng.integers(1, 8))
        p = _params(k, d, rng=rng)
        out = classify(p, rng.normal(size=d), rng.normal(size=d))
        assert abs(out.sum() - 1.0) < 1e-9
        assert (out > 0).all()


def test_dimension_mismatch_rejected():
    p = _params(2, 3)
    with pytest.raises(ValueError):
        classify(p, np.zeros(2), np.zeros(3))


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(3)
    eps = 1e-6
    for trial in range(20):
        k, d, n = int(rng.integers(2, 5)), int(rng.integers(1, 5)), 5
        p = _params(k, d, lam=float(rng.uniform(0.2, 2.0)), rng=rng)
        x_main = rng.normal(size=(n, 2 * d))
        x_ngh = rng.normal(size=(n, 2 * d))
        y_main = rng.integers(k, size=n)
        y_ngh = rng.integers(k, size=n)
        _, grads, _, _ = loss_and_grads(p, x_main, y_main, x_ngh, y_ngh)
        for name in ("w1", "b1", "w2", "b2"):
            arr = getattr(p, name)
            g = grads[name]
            flat = arr.ravel()
            for idx in rng.choice(flat.size, size=min(6, flat.size), replace=False):
                orig = flat[idx]
                flat[idx] = orig + eps
                up, _, _, _ = loss_and_grads(p, x_main, y_main, x_ngh, y_ngh)
                flat[idx] = orig - eps
                dn, _, _, _ = loss_and_grads(p, x_main, y_main, x_ngh, y_ngh)
                flat[idx] = orig
                fd = (up - dn) / (2 * eps)
                denom = max(abs(fd), abs(g.ravel()[idx]), 1e-8)
                assert abs(fd - g.ravel()[idx]) / denom < 1e-4


def test_lambda_linearity():
    rng = np.random.default_rng(4)
    k, d, n = 3, 4, 8
    x_main = rng.normal(size=(n, 2 * d))
    x_ngh = rng.normal(size=(n, 2 * d))
    y_main = rng.integers(k, size=n)
    y_ngh = rng.integers(k, size=n)
    base = _params(k, d, rng=np.random.default_rng(9))
    for lam in (0.0, 0.5, 1.0, 2.0):
        p = ClassifierParams(base.w1, base.b1, base.w2, base.b2, lam)
        loss, _, l_main, l_ngh = loss_and_grads(p, x_main, y_main, x_ngh, y_ngh)
        assert loss == l_main + lam * l_ngh


def _separable_hin():
    # two type clusters whose names share disjoint token sets
    nodes = "".join(f"{i}\tred item{i}\talpha\n" for i in range(5))
    nodes += "".join(f"{5 + i}\tblue thing{i}\tbeta\n" for i in range(5))
    edges = "".join(f"{i}\t{5 + i}\tfeeds\n" for i in range(5))
    return load_hin_from_strings(nodes, edges)


def _toy_backend(hin, separable=False):
    sentences = [n.name for n in hin.nodes]
    lm = lm_from_sentences(sentences, order=2, smoothing=0.5, dim=8, seed=1,
                           extra_vocab=["[SEP]"], name_index=sentences, embed_epochs=5)
    if separable:
        # disjoint feature supports: alpha-name tokens live in dims 0..3,
        # beta-name tokens in dims 4..7
        emb = np.zeros_like(lm.embeddings)
        for tok, tid in lm.token_ids.items():
            if tok in ("red", "item0", "item1", "item2", "item3", "item4"):
                emb[tid, :4] = 1.0
            elif tok in ("blue", "thing0", "thing1", "thing2", "thing3", "thing4"):
                emb[tid, 4:] = 1.0
        lm.embeddings = emb
        lm.unk_vector = emb.mean(axis=0)
    return lm


def test_separable_toy_trains_to_perfect_accuracy():
    hin = _separable_hin()
    backend = _toy_backend(hin, separable=True)
    params = train_classifier(hin, backend, lam=1.0, lr=1.0, epochs=60, seed=0, val_fraction=0.2)
    losses = params.history["train_loss"]
    assert all(b <= a + 1e-12 for a, b in zip(losses[:10], losses[1:11]))
    correct = 0
    total = 0
    for e in hin.edges:
        for v_i, v_j in ((e.src, e.dst), (e.dst, e.src)):
            h_i, h_e = classifier_features(
                backend, hin.node_name(v_i), hin.node_name(v_j), hin.edge_type_names[e.etype])
            correct += predict_type(params, h_i, h_e) == hin.node_type(v_i)
            total += 1
    assert correct == total


def test_lambda_zero_main_loss_trajectory_matches():
    hin = _separable_hin()
    backend = _toy_backend(hin)
    with_aux = train_classifier(hin, backend, lam=0.0, lr=0.5, epochs=15, seed=5)
    again = train_classifier(hin, backend, lam=0.0, lr=0.5, epochs=15, seed=5)
    assert with_aux.history["train_main"] == again.history["train_main"]
    assert with_aux.history["train_loss"] == with_aux.history["train_main"]


def test_early_stopping_returns_minimum_validation_params():
    hin = _separable_hin()
    backend = _toy_backend(hin)
    params = train_classifier(hin, backend, lam=1.0, lr=1.0, epochs=30, seed=2)
    hist = params.history
    assert hist["val_loss"][hist["best_epoch"]] == min(hist["val_loss"])


def test_single_node_type_refused():
    hin = load_hin_from_strings("0\ta\tx\n1\tb\tx\n", "0\t1\tr\n")
    backend = _toy_backend(hin)
    with pytest.raises(ValueError, match="node types"):
        train_classifier(hin, backend, lam=1.0, lr=0.1, epochs=2, seed=0)


def test_features_deterministic_and_head_independent(planted_hin, planted_lm):
    name_i, name_j = ("iron", "fatigue"), ("zorvexil",)
    etype = ("treated", "by")
    h_i1, h_e1 = classifier_features(planted_lm, name_i, name_j, etype)
    h_i2, h_e2 = classifier_features(planted_lm, name_i, name_j, etype)
    assert np.array_equal(h_i1, h_i2) and np.array_equal(h_e1, h_e2)
    h_i3, h_e3 = classifier_features(planted_lm, name_i, ("quandrol",), etype)
    assert np.array_equal(h_i1, h_i3)      # h_i depends only on v_i
    assert not np.array_equal(h_e1, h_e3)  # context embedding does change
    assert h_i1.shape == (planted_lm.embedding_dim,)
    assert h_e1.shape == (planted_lm.embedding_dim,)


def test_params_binary_roundtrip(tmp_path, planted_classifier):
    path = str(tmp_path / "clf.bin")
    planted_classifier.save(path)
    loaded = ClassifierParams.load(path)
    assert np.array_equal(loaded.w1, planted_classifier.w1)
    assert np.array_equal(loaded.b1, planted_classifier.b1)
    assert np.array_equal(loaded.w2, planted_classifier.w2)
    assert np.array_equal(loaded.b2, planted_classifier.b2)
    assert loaded.lam == planted_classifier.lam


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
    with pytest.raises(ValueError, match="magic"):
        ClassifierParams.load(str(path))


def test_joint_finetune_updates_lm_embeddings():
    hin = _separable_hin()
    backend = _toy_backend(hin)
    before = backend.embeddings.copy()
    train_classifier(hin, backend, lam=1.0, lr=0.5, epochs=3, seed=0, joint_finetune=True)
    assert not np.allclose(before, backend.embeddings)


def test_argmax_tie_breaks_to_lowest_type_id():
    k, d = 3, 2
    p = ClassifierParams(np.zeros((k, 2 * d)), np.zeros(k), np.zeros((k, 2 * d)), np.zeros(k), 1.0)
    assert predict_type(p, np.zeros(d), np.zeros(d)) == 0

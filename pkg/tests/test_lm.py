import math

import numpy as np
import pytest

from hinfill.graph import load_hin_from_strings
from hinfill.lm import (
    BuiltinLm,
    build_lm_corpus,
    fill_candidates,
    lm_from_sentences,
    train_builtin_lm,
)
from hinfill.verbalize import build_infill_template


@pytest.fixture()
def bigram_ab():
    # corpus "a b a b", add-1 smoothing, vocabulary exactly {a, b}
    return lm_from_sentences([("a", "b", "a", "b")], order=2, smoothing=1.0, dim=4, seed=0)


def test_one_edge_graph_corpus_has_four_sentences():
    hin = load_hin_from_strings("0\ta\tx\n1\tb\ty\n", "0\t1\tr\n")
    assert len(build_lm_corpus(hin)) == 4


def test_bigram_hand_count(bigram_ab):
    a, b = bigram_ab.token_id("a"), bigram_ab.token_id("b")
    assert bigram_ab.vocab_size == 2
    assert bigram_ab.conditional_prob((a,), b) == pytest.approx(0.75)  # (2+1)/(2+2)


def test_score_is_hand_computed_smoothed_product(bigram_ab):
    a, b = bigram_ab.token_id("a"), bigram_ab.token_id("b")
    # P(a|BOS) = (1+1)/(1+2), P(b|a) = (2+1)/(2+2)
    expected = math.log(2 / 3) + math.log(3 / 4)
    assert bigram_ab.score(("a", "b")) == pytest.approx(expected, abs=1e-12)


def test_uniform_untrained_single_token():
    lm = lm_from_sentences([("x",)], order=2, smoothing=0.5, dim=2, seed=0,
                           extra_vocab=[f"t{i}" for i in range(7)])
    assert lm.vocab_size == 8
    # context (BOS, t3) was never observed: conditional is uniform over 8
    assert lm.conditional_prob((lm.token_id("t3"),), lm.token_id("t5")) == pytest.approx(1 / 8)


def test_score_nonpositive_and_prefix_monotone(planted_lm):
    seq = ("iron", "fatigue", "treated", "by", "zorvexil")
    full = planted_lm.score(seq)
    assert full <= 0
    for cut in range(1, len(seq)):
        assert full <= planted_lm.score(seq[:cut]) + 1e-12


def test_training_is_deterministic(planted_hin):
    a = train_builtin_lm(planted_hin, order=3, smoothing=0.1, dim=16, epochs=2, seed=3)
    b = train_builtin_lm(planted_hin, order=3, smoothing=0.1, dim=16, epochs=2, seed=3)
    assert a.counts == b.counts
    assert np.array_equal(a.embeddings, b.embeddings)
    assert a.score(("iron", "fatigue")) == b.score(("iron", "fatigue"))


def test_conditional_distributions_normalize(planted_lm):
    rng = np.random.default_rng(0)
    contexts = list(planted_lm.counts)
    for _ in range(100):
        ctx = contexts[int(rng.integers(len(contexts)))]
        total = sum(
            planted_lm.conditional_prob(ctx, t) for t in range(planted_lm.vocab_size)
        )
        assert abs(total - 1.0) < 1e-9


def test_empty_sequence_rejected(bigram_ab):
    with pytest.raises(ValueError):
        bigram_ab.score(())
    with pytest.raises(ValueError):
        bigram_ab.embed(())


def test_fill_single_candidate_regardless_of_k(bigram_ab):
    t = build_infill_template(("a",), ("b",), 2)
    fills = fill_candidates(bigram_ab, t, 0, [("a",)], k=5)
    assert len(fills) == 1
    assert fills[0].tokens == ("a",)


def test_fill_k_at_least_candidates_returns_all_sorted(bigram_ab):
    t = build_infill_template(("a",), ("b",), 2)
    fills = fill_candidates(bigram_ab, t, 0, [("a",), ("b",)], k=10)
    assert len(fills) == 2
    assert fills[0].log_score >= fills[1].log_score


def test_fill_order_matches_bruteforce_oracle(planted_lm):
    rng = np.random.default_rng(4)
    vocab = planted_lm.tokens
    for _ in range(10):
        n_cand = int(rng.integers(2, 21))
        candidates = []
        for _ in range(n_cand):
            length = int(rng.integers(1, 3))
            candidates.append(tuple(vocab[int(rng.integers(len(vocab)))] for _ in range(length)))
        candidates = list(dict.fromkeys(candidates))
        t = build_infill_template(("iron", "fatigue"), ("zorvexil",), 2)
        fills = fill_candidates(planted_lm, t, 0, candidates, k=len(candidates))
        prefix = t.prefix_before(0)
        brute = sorted(
            ((c, planted_lm.score(prefix + c)) for c in candidates),
            key=lambda x: (-x[1], x[0]),
        )
        assert [f.tokens for f in fills] == [c for c, _ in brute]
        for f, (_, s) in zip(fills, brute):
            assert f.log_score == pytest.approx(s, abs=1e-12)


def test_fill_empty_candidates_rejected(bigram_ab):
    t = build_infill_template(("a",), ("b",), 2)
    with pytest.raises(ValueError):
        fill_candidates(bigram_ab, t, 0, [], k=3)


def test_fill_full_rescoring_option(planted_lm):
    # with rescore_full the tail of the sentence participates in the score
    t = build_infill_template(("iron", "fatigue"), ("zorvexil",), 2)
    t = t.substitute(0, ("treated", "by"))
    cands = [("quandrol",), ("krxa",)]
    full = fill_candidates(planted_lm, t, 0, cands, k=2, rescore_full=True)
    for f in full:
        sub = t.substitute(0, f.tokens)
        seq = tuple(x for x in sub.tokens if x != "[MASK]")
        assert f.log_score == pytest.approx(planted_lm.score(seq), abs=1e-12)
    greedy = fill_candidates(planted_lm, t, 0, cands, k=2, rescore_full=False)
    assert {f.tokens for f in full} == {f.tokens for f in greedy}


def test_embed_single_token_is_its_row(planted_lm):
    tid = planted_lm.token_id("zorvexil")
    assert np.array_equal(planted_lm.embed(("zorvexil",)), planted_lm.embeddings[tid])


def test_embed_duplicate_equals_single(planted_lm):
    assert np.allclose(planted_lm.embed(("zorvexil", "zorvexil")), planted_lm.embed(("zorvexil",)))


def test_embed_unknown_token_uses_unk_row(planted_lm):
    assert np.array_equal(planted_lm.embed(("zzzunknownzzz",)), planted_lm.unk_vector)


def test_trained_names_embed_differently(planted_lm):
    a = planted_lm.embed(("zorvexil",))
    b = planted_lm.embed(("xaladine",))
    assert not np.allclose(a, b)


def test_score_independent_of_batching(planted_lm):
    seqs = [("iron", "fatigue"), ("zorvexil",), ("xaladine", "targets", "krxa")]
    one_at_a_time = [planted_lm.score(s) for s in seqs]
    together = [planted_lm.score(s) for s in seqs]
    assert one_at_a_time == together


def test_json_roundtrip(planted_lm, tmp_path):
    path = str(tmp_path / "lm.json")
    planted_lm.save(path)
    loaded = BuiltinLm.load(path)
    assert loaded.counts == planted_lm.counts
    assert np.allclose(loaded.embeddings, planted_lm.embeddings)
    assert loaded.score(("iron", "fatigue")) == planted_lm.score(("iron", "fatigue"))
    assert loaded.name_index == planted_lm.name_index


def test_capabilities_and_dim(planted_lm):
    assert planted_lm.capabilities == frozenset({"score", "fill", "embed"})
    assert planted_lm.embedding_dim == 32

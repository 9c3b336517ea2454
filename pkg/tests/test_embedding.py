import numpy as np
import pytest

from hinfill import sgns
from hinfill.embedding import (
    EmbeddingTable,
    cycled_metapath,
    metapath_walks,
    metapath_walks_detailed,
    random_table,
    train_skipgram,
)
from hinfill.graph import MetaPath, load_hin_from_strings, path_matches
from hinfill.induction import RankedMetaPaths, RankedEntry


def test_cycled_metapath_wraps_from_second_position():
    mp = MetaPath((0, 1), (5,))
    c = cycled_metapath(mp, 3)
    assert c.node_types == (0, 1, 1, 1)
    assert c.edge_types == (5, 5, 5)
    mp2 = MetaPath((0, 1, 0), (2, 3))
    c2 = cycled_metapath(mp2, 5)
    assert c2.node_types == (0, 1, 0, 1, 0, 1)
    assert c2.edge_types == (2, 3, 2, 3, 2)


def test_walk_length_one_emits_two_node_walks(planted_hin):
    mp = MetaPath((0, 1), (0,))  # disease -treated by-> drug
    walks = metapath_walks(planted_hin, [mp], walk_length=1, walks_per_node=2, seed=0)
    assert walks
    for w in walks:
        assert len(w) in (1, 2)
        if len(w) == 2:
            assert planted_hin.node_type(w[0]) == 0
            assert planted_hin.node_type(w[1]) == 1


def test_all_walks_match_cycled_truncated_pattern(planted_hin):
    mps = [MetaPath((0, 1), (0,)), MetaPath((1, 2), (1,)), MetaPath((0, 0), (2,))]
    records = metapath_walks_detailed(planted_hin, mps, walk_length=6, walks_per_node=3, seed=1)
    assert records
    checked = 0
    for r in records:
        if len(r.nodes) < 2:
            continue
        mp = mps[r.metapath_index]
        pattern = cycled_metapath(mp, len(r.nodes) - 1)
        path = [r.nodes[0]]
        for node, et in zip(r.nodes[1:], r.edge_types):
            path.extend([et, node])
        assert path_matches(planted_hin, path, pattern)
        checked += 1
    assert checked > 0


def test_bipartite_cycle_alternates_types():
    nodes = "0\tleft a\tA\n1\tleft b\tA\n2\tright a\tB\n3\tright b\tB\n"
    edges = "0\t2\tfwd\n1\t3\tfwd\n2\t1\tbwd\n3\t0\tbwd\n"
    hin = load_hin_from_strings(nodes, edges)
    mp = MetaPath((0, 1, 0), (0, 1))  # A -fwd-> B -bwd-> A
    records = metapath_walks_detailed(hin, [mp], walk_length=4, walks_per_node=1, seed=2)
    for r in records:
        assert len(r.nodes) == 5
        types = [hin.node_type(n) for n in r.nodes]
        assert types == [0, 1, 0, 1, 0]


def test_walks_stop_at_dead_ends(planted_hin):
    mp = MetaPath((0, 1), (0,))  # drugs have no outgoing treated-by edges
    records = metapath_walks_detailed(planted_hin, [mp], walk_length=9, walks_per_node=1, seed=3)
    assert all(len(r.nodes) <= 2 for r in records)


def test_off_schema_metapaths_are_skipped(planted_hin):
    entries = [
        RankedEntry(MetaPath((0, 1), (0,)), 5, (), off_schema=False),
        RankedEntry(MetaPath((2, 0), (0,)), 4, (), off_schema=True),
    ]
    ranked = RankedMetaPaths(entries=entries, q=2)
    walks = metapath_walks(planted_hin, ranked, walk_length=1, walks_per_node=1, seed=0)
    starts = {w[0] for w in walks}
    assert starts <= set(planted_hin.nodes_by_type[0])


def test_no_on_schema_metapaths_is_an_error(planted_hin):
    ranked = RankedMetaPaths(
        entries=[RankedEntry(MetaPath((2, 0), (0,)), 1, (), off_schema=True)], q=1)
    with pytest.raises(ValueError):
        metapath_walks(planted_hin, ranked, walk_length=1, walks_per_node=1, seed=0)


def test_skipgram_deterministic():
    walks = [[0, 1, 2], [2, 1, 0], [0, 2]]
    a = train_skipgram(walks, dim=8, window=2, negatives=3, lr=0.05, epochs=4, seed=5)
    b = train_skipgram(walks, dim=8, window=2, negatives=3, lr=0.05, epochs=4, seed=5)
    assert np.array_equal(a.matrix, b.matrix)
    assert a.ids == b.ids


def test_skipgram_toy_separation():
    # u and v always co-occur; x sits alone and only serves as a negative
    walks = [[0, 1], [2]] * 30
    emb = train_skipgram(walks, dim=16, window=1, negatives=5, lr=0.3, epochs=100, seed=0)
    sig = lambda z: 1.0 / (1.0 + np.exp(-z))
    s_uv = sig(emb.vector(0) @ emb.vector(1))
    s_ux = sig(emb.vector(0) @ emb.vector(2))
    assert s_uv > 0.9
    assert s_ux < 0.5


def test_loss_decreases_after_one_sgd_step():
    rng = np.random.default_rng(7)
    table = rng.normal(scale=0.3, size=(6, 4))
    examples = [(0, 1, [2, 3]), (1, 4, [5]), (2, 0, [4, 5])]
    before = sgns.batch_loss(table, examples)
    for c, o, negs in examples:
        sgns.sgd_example(table, c, o, negs, lr=1e-3)
    after = sgns.batch_loss(table, examples)
    assert after < before


def test_sgns_gradient_matches_finite_differences():
    rng = np.random.default_rng(9)
    eps = 1e-6
    for _ in range(20):
        n, d = 5, int(rng.integers(2, 5))
        table = rng.normal(scale=0.5, size=(n, d))
        examples = []
        for _ in range(4):
            c, o = rng.integers(n), rng.integers(n)
            negs = [int(x) for x in rng.integers(n, size=2)]
            examples.append((int(c), int(o), negs))
        grads = sgns.batch_gradients(table, examples)
        for row, g in grads.items():
            for k in range(d):
                orig = table[row, k]
                table[row, k] = orig + eps
                up = sgns.batch_loss(table, examples)
                table[row, k] = orig - eps
                dn = sgns.batch_loss(table, examples)
                table[row, k] = orig
                fd = (up - dn) / (2 * eps)
                denom = max(abs(fd), abs(g[k]), 1e-8)
                assert abs(fd - g[k]) / denom < 1e-4


def test_unvisited_nodes_keep_initialization_and_are_flagged():
    walks = [[0, 1]] * 5
    emb = train_skipgram(walks, dim=4, window=1, negatives=2, lr=0.1, epochs=3, seed=1,
                         node_ids=[0, 1, 7, 9])
    assert emb.training_meta["unvisited"] == [7, 9]
    rng = np.random.default_rng(1)
    init = sgns.init_table(4, 4, rng)
    ids = (0, 1, 7, 9)
    for nid in (7, 9):
        assert np.array_equal(emb.vector(nid), init[ids.index(nid)])


def test_table_covers_all_requested_nodes(planted_hin):
    walks = [[0, 10], [1, 11]]
    ids = [n.node_id for n in planted_hin.nodes]
    emb = train_skipgram(walks, dim=4, window=1, negatives=1, lr=0.1, epochs=1, seed=0,
                         node_ids=ids)
    for nid in ids:
        assert nid in emb


def test_init_range_matches_contract():
    rng = np.random.default_rng(0)
    table = sgns.init_table(1000, 10, rng)
    assert table.max() <= 0.5 / 10
    assert table.min() >= -0.5 / 10


def test_text_roundtrip(tmp_path):
    emb = train_skipgram([[0, 1], [1, 2]], dim=3, window=1, negatives=2, lr=0.1,
                         epochs=2, seed=3)
    path = str(tmp_path / "emb.txt")
    emb.save_text(path)
    loaded = EmbeddingTable.load_text(path)
    assert loaded.ids == emb.ids
    assert np.array_equal(loaded.matrix, emb.matrix)


def test_binary_roundtrip(tmp_path):
    emb = train_skipgram([[0, 1], [1, 2]], dim=3, window=1, negatives=2, lr=0.1,
                         epochs=2, seed=3)
    path = str(tmp_path / "emb.bin")
    emb.save_binary(path)
    loaded = EmbeddingTable.load_binary(path)
    assert loaded.ids == emb.ids
    assert np.array_equal(loaded.matrix, emb.matrix)


def test_empty_walks_rejected():
    with pytest.raises(ValueError):
        train_skipgram([], dim=4, window=1, negatives=1, lr=0.1, epochs=1, seed=0)
    with pytest.raises(ValueError):
        train_skipgram([[0, 1]], dim=0, window=1, negatives=1, lr=0.1, epochs=1, seed=0)


def test_random_table_is_initialization_only():
    t = random_table([3, 1, 2], dim=5, seed=4)
    assert t.ids == (1, 2, 3)
    assert t.training_meta["trained"] is False

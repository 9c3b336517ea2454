from collections import Counter

import numpy as np
import pytest

from hinfill.graph import MetaPath, load_hin_from_strings
from hinfill.induction import RankedMetaPaths, induce, metapath_counts, path_to_metapath
from hinfill.sampler import TypedPath


def _tp(names, etypes, types):
    return TypedPath(
        names=tuple(tuple(n.split()) for n in names),
        edge_types=tuple(etypes),
        assigned_types=tuple(types),
        provenance=tuple(("graph-node", i) for i in range(len(names))),
        total_log_score=-1.0,
    )


def test_one_hop_projection():
    p = _tp(["ulnar ache", "corvalol"], [0], [0, 1])
    assert path_to_metapath(p) == MetaPath((0, 1), (0,))


def test_same_type_two_hop_projection():
    # ontology-style path whose nodes all carry one type
    p = _tp(
        ["ceratobranchial 5 tooth", "calcareous tooth", "tooth enamel organ"],
        [3, 7],
        [2, 2, 2],
    )
    mp = path_to_metapath(p)
    assert mp.node_types == (2, 2, 2)
    assert mp.edge_types == (3, 7)


def test_value_equality_of_identical_patterns():
    a = _tp(["x", "y"], [1], [0, 1])
    b = _tp(["other", "names"], [1], [0, 1])
    assert path_to_metapath(a) == path_to_metapath(b)


def test_single_path_counts_once():
    ranked = induce([_tp(["a", "b"], [0], [0, 1])], q=5)
    assert len(ranked.entries) == 1
    assert ranked.entries[0].count == 1


def test_q_larger_than_distinct_returns_all():
    paths = [_tp(["a", "b"], [0], [0, 1]), _tp(["c", "d"], [1], [1, 0])]
    ranked = induce(paths, q=10)
    assert len(ranked.entries) == 2


def test_empty_collection_gives_empty_result():
    ranked = induce([], q=3)
    assert ranked.entries == []


def test_counts_sum_to_input_size():
    rng = np.random.default_rng(0)
    paths = [
        _tp(["a", "b"], [int(rng.integers(3))], [int(rng.integers(2)), int(rng.integers(2))])
        for _ in range(137)
    ]
    assert sum(metapath_counts(paths).values()) == 137


def test_induce_matches_bruteforce_dfs_enumeration():
    # 15-node synthetic graph; enumerate every path of <= 3 hops by DFS,
    # convert with ground-truth types, compare frequency tables
    rng = np.random.default_rng(8)
    nodes = "".join(f"{i}\tn{i}\tt{rng.integers(3)}\n" for i in range(15))
    edges = "".join(
        f"{rng.integers(15)}\t{rng.integers(15)}\te{rng.integers(3)}\n" for _ in range(25)
    )
    hin = load_hin_from_strings(nodes, edges)

    all_paths = []

    def dfs(node, names, etypes, types):
        if len(etypes) >= 1:
            all_paths.append(_tp(list(names), list(etypes), list(types)))
        if len(etypes) == 3:
            return
        for et, nxt in sorted(hin.out_adj[node]):
            dfs(nxt, names + [" ".join(hin.node_name(nxt))], etypes + [et],
                types + [hin.node_type(nxt)])

    for n in hin.nodes:
        dfs(n.node_id, [" ".join(n.name)], [], [n.type_id])

    if len(all_paths) > 200:
        all_paths = all_paths[:200]
    brute = Counter(
        (p.assigned_types, p.edge_types) for p in all_paths
    )
    for q in (1, 3, 10):
        ranked = induce(all_paths, q=q)
        expected = sorted(brute.items(), key=lambda kv: (-kv[1], kv[0]))[:q]
        got = [((e.metapath.node_types, e.metapath.edge_types), e.count) for e in ranked.entries]
        assert got == expected


def test_permutation_invariance():
    rng = np.random.default_rng(3)
    paths = [
        _tp([f"w{i}", f"v{i}"], [int(rng.integers(2))], [int(rng.integers(2)), 1])
        for i in range(40)
    ]
    ranked_a = induce(paths, q=4)
    shuffled = list(paths)
    rng.shuffle(shuffled)
    ranked_b = induce(shuffled, q=4)
    assert [(e.metapath, e.count) for e in ranked_a.entries] == [
        (e.metapath, e.count) for e in ranked_b.entries
    ]
    assert [e.examples for e in ranked_a.entries] == [e.examples for e in ranked_b.entries]


def test_ties_break_lexicographically():
    paths = [_tp(["a", "b"], [1], [0, 1]), _tp(["c", "d"], [0], [0, 1])]
    ranked = induce(paths, q=2)
    assert ranked.entries[0].metapath.edge_types == (0,)
    assert ranked.entries[1].metapath.edge_types == (1,)


def test_off_schema_flagging(planted_hin, planted_schema):
    on = _tp(["iron fatigue", "zorvexil"], [0], [0, 1])
    off = _tp(["zorvexil", "iron fatigue"], [0], [1, 0])  # drug -treated by-> disease
    ranked = induce([on, off, off], q=2, schema=planted_schema)
    flags = {e.metapath.node_types: e.off_schema for e in ranked.entries}
    assert flags[(0, 1)] is False
    assert flags[(1, 0)] is True


def test_serialization_idempotent(tmp_path, planted_hin):
    paths = [
        _tp(["iron fatigue", "zorvexil"], [0], [0, 1]),
        _tp(["iron fatigue", "zorvexil"], [0], [0, 1]),
        _tp(["xaladine", "krxa"], [1], [1, 2]),
    ]
    ranked = induce(paths, q=5)
    first = str(tmp_path / "m1.json")
    second = str(tmp_path / "m2.json")
    ranked.save(planted_hin, first)
    loaded = RankedMetaPaths.load(first)
    loaded.save(planted_hin, second)
    assert open(first, "rb").read() == open(second, "rb").read()


def test_examples_capped_at_three():
    paths = [_tp([f"a{i}", f"b{i}"], [0], [0, 1]) for i in range(7)]
    ranked = induce(paths, q=1)
    assert ranked.entries[0].count == 7
    assert len(ranked.entries[0].examples) == 3


def test_q_must_be_positive():
    with pytest.raises(ValueError):
        induce([], q=0)

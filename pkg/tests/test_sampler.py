import numpy as np
import pytest

from hinfill.classifier import classifier_features, predict_type
from hinfill.graph import derive_schema, load_hin_from_strings
from hinfill.lm import fill_candidates, train_builtin_lm
from hinfill.sampler import (
    DeadEndError,
    SamplerConfig,
    TaskData,
    TypedPath,
    read_paths_jsonl,
    run_sampling,
    sample_pair,
    sample_path,
    write_paths_jsonl,
)
from hinfill.verbalize import build_infill_template


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(hop_range=(0, 4))
    with pytest.raises(ValueError):
        SamplerConfig(hop_range=(2, 9))
    with pytest.raises(ValueError):
        SamplerConfig(repeats_per_pair=0)
    with pytest.raises(ValueError):
        SamplerConfig(temperature=-0.1)
    with pytest.raises(ValueError):
        SamplerConfig(subset_policy="bogus")


def test_single_training_edge_pair_probability_one():
    cfg = SamplerConfig(subset_policy="lp-training-edges")
    td = TaskData(training_edges=[(3, 9)])
    rng = np.random.default_rng(0)
    for _ in range(10):
        assert sample_pair(None, cfg, td, rng) == (3, 9)


def test_nc_policy_orthogonal_labels_never_partnered():
    cfg = SamplerConfig(subset_policy="nc-label-similar")
    td = TaskData(labels={1: (0,), 2: (0,), 3: (1,)})
    rng = np.random.default_rng(1)
    for _ in range(200):
        u, v = sample_pair(None, cfg, td, rng)
        if u in (1, 2):
            assert v in (1, 2)  # node 3 has cosine 0 with both
        else:
            pytest.fail("node 3 has no overlapping partner and cannot be the anchor")


def test_lp_policy_uniform_chi_square(planted_hin):
    edges = [(0, 10), (1, 11), (2, 10), (3, 12)]
    cfg = SamplerConfig(subset_policy="lp-training-edges", seed=0)
    td = TaskData(training_edges=edges)
    rng = np.random.default_rng(42)
    n = 10_000
    counts = {e: 0 for e in edges}
    for _ in range(n):
        counts[sample_pair(planted_hin, cfg, td, rng)] += 1
    expected = n / len(edges)
    # each count within 3 sigma of the binomial mean
    sigma = (n * (1 / 4) * (3 / 4)) ** 0.5
    for e, c in counts.items():
        assert abs(c - expected) < 3 * sigma


def test_all_policy_draws_edge_endpoints(planted_hin):
    cfg = SamplerConfig(subset_policy="all")
    rng = np.random.default_rng(2)
    edge_pairs = {(e.src, e.dst) for e in planted_hin.edges}
    for _ in range(50):
        assert sample_pair(planted_hin, cfg, None, rng) in edge_pairs


def test_one_hop_uses_schema_and_no_classifier(planted_hin, planted_schema, planted_lm):
    cfg = SamplerConfig(hop_range=(1, 4), seed=0)
    rng = np.random.default_rng(0)
    # disease 0 -> drug 10: the only connecting edge type is "treated by"
    p = sample_path(planted_hin, planted_lm, None, 0, 10, 1, cfg, rng, planted_schema)
    assert p.hops == 1
    assert p.edge_types == (0,)
    assert p.assigned_types == (planted_hin.node_type(0), planted_hin.node_type(10))
    assert p.provenance[0] == ("graph-node", 0)
    assert p.provenance[1] == ("graph-node", 10)
    assert p.total_log_score == 0.0


def test_one_hop_triple_always_in_schema(planted_hin, planted_schema, planted_lm):
    rng = np.random.default_rng(3)
    cfg = SamplerConfig(hop_range=(1, 1), seed=3)
    for e in planted_hin.edges[:10]:
        p = sample_path(planted_hin, planted_lm, None, e.src, e.dst, 1, cfg, rng, planted_schema)
        triple = (p.assigned_types[0], p.edge_types[0], p.assigned_types[1])
        assert triple in planted_schema


def test_one_hop_dead_end_when_no_connecting_type(planted_hin, planted_schema, planted_lm):
    rng = np.random.default_rng(0)
    cfg = SamplerConfig(hop_range=(1, 1))
    # gene -> disease has no schema triple
    with pytest.raises(DeadEndError):
        sample_path(planted_hin, planted_lm, None, 18, 0, 1, cfg, rng, planted_schema)


def test_two_hop_greedy_matches_bruteforce_oracle(planted_hin, planted_schema, planted_lm,
                                                  planted_classifier):
    cfg = SamplerConfig(hop_range=(1, 4), temperature=0.0, seed=0)
    rng = np.random.default_rng(0)
    v_h, v_t = 28, 29  # "ashen drift" -similar to-> "pallid drift"
    p = sample_path(planted_hin, planted_lm, planted_classifier, v_h, v_t, 2, cfg, rng,
                    planted_schema)
    # greedy first edge: argmax LM score over schema-valid head edge types
    head_types = planted_schema.etypes_from(planted_hin.node_type(v_h))
    scores = [
        (planted_lm.score(planted_hin.node_name(v_h) + planted_hin.edge_type_names[e]), -e)
        for e in head_types
    ]
    best_e1 = -max(scores)[1]
    assert p.edge_types[0] == best_e1
    # greedy interior fill: argmax of substitute-and-score over every node name
    template = build_infill_template(planted_hin.node_name(v_h), planted_hin.node_name(v_t), 2)
    template = template.substitute(0, planted_hin.edge_type_names[best_e1])
    fills = fill_candidates(planted_lm, template, 0, planted_hin.all_names(), k=5)
    assert p.names[1] == fills[0].tokens
    # and its type matches an independent classifier call (or the graph type)
    ids = planted_hin.name_to_ids.get(p.names[1], [])
    types = {planted_hin.node_type(i) for i in ids}
    if len(types) == 1:
        assert p.assigned_types[1] == types.pop()
    else:
        h_i, h_e = classifier_features(
            planted_lm, p.names[1], planted_hin.node_name(v_h),
            planted_hin.edge_type_names[best_e1])
        assert p.assigned_types[1] == predict_type(planted_classifier, h_i, h_e)


def test_structural_postconditions(planted_hin, planted_schema, planted_lm, planted_classifier):
    cfg = SamplerConfig(hop_range=(1, 4), temperature=0.7, seed=1)
    rng = np.random.default_rng(1)
    for l in (2, 3, 4):
        try:
            p = sample_path(planted_hin, planted_lm, planted_classifier, 28, 29, l, cfg, rng,
                            planted_schema)
        except DeadEndError:
            continue
        assert len(p.names) == l + 1
        assert len(p.edge_types) == l
        assert len(p.assigned_types) == l + 1
        assert p.provenance[0][0] == "graph-node" and p.provenance[-1][0] == "graph-node"


def test_sampled_edges_schema_valid_at_source(planted_hin, planted_schema, planted_lm,
                                              planted_classifier):
    cfg = SamplerConfig(hop_range=(1, 4), repeats_per_pair=4, temperature=0.8, seed=5)
    paths, _ = run_sampling(planted_hin, planted_lm, planted_classifier, cfg, n_pairs=12,
                            schema=planted_schema)
    assert paths
    for p in paths:
        for k, e in enumerate(p.edge_types):
            src_type = p.assigned_types[k]
            assert e in planted_schema.etypes_from(src_type)


def test_run_sampling_reproducible(planted_hin, planted_schema, planted_lm, planted_classifier):
    cfg = SamplerConfig(hop_range=(1, 3), repeats_per_pair=3, temperature=0.6, seed=9)
    a, sa = run_sampling(planted_hin, planted_lm, planted_classifier, cfg, n_pairs=6,
                         schema=planted_schema)
    b, sb = run_sampling(planted_hin, planted_lm, planted_classifier, cfg, n_pairs=6,
                         schema=planted_schema)
    assert a == b
    assert sa.to_json() == sb.to_json()


def test_run_sampling_worker_count_does_not_change_output(planted_hin, planted_schema,
                                                          planted_lm, planted_classifier):
    cfg = SamplerConfig(hop_range=(1, 2), repeats_per_pair=2, temperature=0.6, seed=4)
    seq, _ = run_sampling(planted_hin, planted_lm, planted_classifier, cfg, n_pairs=6,
                          schema=planted_schema, workers=1)
    par, _ = run_sampling(planted_hin, planted_lm, planted_classifier, cfg, n_pairs=6,
                          schema=planted_schema, workers=4)
    assert seq == par


def test_complete_schema_graph_has_zero_dead_ends():
    # every (type, edge type, type) combination exists
    nodes = "0\taa\tx\n1\tbb\tx\n2\tcc\ty\n3\tdd\ty\n"
    edges = ""
    for s in range(4):
        for d in range(4):
            if s != d:
                edges += f"{s}\t{d}\tlinks\n"
    hin = load_hin_from_strings(nodes, edges)
    schema = derive_schema(hin)
    lm = train_builtin_lm(hin, order=2, smoothing=0.5, dim=8, epochs=1, seed=0)
    from hinfill.classifier import train_classifier
    clf = train_classifier(hin, lm, lam=1.0, lr=0.5, epochs=5, seed=0)
    cfg = SamplerConfig(hop_range=(1, 4), repeats_per_pair=3, temperature=1.0, seed=0)
    _, stats = run_sampling(hin, lm, clf, cfg, n_pairs=8, schema=schema)
    assert stats.dead_ends == 0
    assert stats.dead_end_rate == 0.0


def test_jsonl_roundtrip(tmp_path, planted_hin, planted_schema, planted_lm, planted_classifier):
    cfg = SamplerConfig(hop_range=(1, 2), repeats_per_pair=2, temperature=0.5, seed=2)
    paths, _ = run_sampling(planted_hin, planted_lm, planted_classifier, cfg, n_pairs=5,
                            schema=planted_schema)
    path = str(tmp_path / "paths.jsonl")
    write_paths_jsonl(paths, planted_hin, path)
    loaded = read_paths_jsonl(path)
    assert loaded == paths


def test_typed_path_validates_shape():
    with pytest.raises(ValueError):
        TypedPath(names=(("a",),), edge_types=(0,), assigned_types=(0, 1),
                  provenance=(("graph-node", 0), ("graph-node", 1)), total_log_score=0.0)
    with pytest.raises(ValueError):
        TypedPath(names=(("a",), ("b",)), edge_types=(0,), assigned_types=(0, 1),
                  provenance=(("classifier-typed", None), ("graph-node", 1)),
                  total_log_score=0.0)

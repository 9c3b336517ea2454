"""Sample typed paths between node pairs by iterative text infilling.

1-hop paths skip infilling entirely: a schema-valid edge type between the
endpoint types is drawn uniformly. Longer paths fill an l-hop template left
to right: edge-type slots are proposed from schema-valid candidates weighted
by LM score, node slots are filled by substitute-and-score over all node
names, and each filled node is typed on the fly (graph type when the name
resolves unambiguously, classifier otherwise).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .classifier import ClassifierParams, classifier_features, predict_type
from .graph import Hin, Schema, Tokens, derive_schema
from .lm import Fill, ScorerBackend, fill_candidates
from .verbalize import CONNECTIVE, MASK, PERIOD, RELATES_TO, Mask, MaskedTemplate

SUBSET_POLICIES = ("lp-training-edges", "nc-label-similar", "all")


class DeadEndError(RuntimeError):
    """No schema-valid edge type exists at some step; the caller may retry."""


@dataclass
class SamplerConfig:
    hop_range: tuple[int, int] = (1, 4)
    repeats_per_pair: int = 10
    temperature: float = 1.0
    top_k_fill: int = 0          # 0 keeps every candidate
    subset_policy: str = "all"
    rescore_full: bool = False
    max_retries: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        lo, hi = self.hop_range
        if not (1 <= lo <= hi <= 8):
            raise ValueError(f"hop range must sit within 1..8, got {self.hop_range}")
        if self.repeats_per_pair < 1:
            raise ValueError("repeats_per_pair must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0 (0 means greedy)")
        if self.subset_policy not in SUBSET_POLICIES:
            raise ValueError(f"unknown subset policy {self.subset_policy!r}")

    def hops(self) -> range:
        return range(self.hop_range[0], self.hop_range[1] + 1)


@dataclass
class TaskData:
    """Pair-sampling inputs: positive training edges (LP) or node labels (NC)."""
    training_edges: Optional[list[tuple[int, int]]] = None
    labels: Optional[dict[int, tuple[int, ...]]] = None


@dataclass(frozen=True)
class TypedPath:
    """A sampled path: concrete names with on-the-fly type assignments."""

    names: tuple[Tokens, ...]
    edge_types: tuple[int, ...]
    assigned_types: tuple[int, ...]
    provenance: tuple[tuple[str, Optional[int]], ...]
    total_log_score: float

    def __post_init__(self) -> None:
        l = len(self.edge_types)
        if len(self.names) != l + 1 or len(self.assigned_types) != l + 1 or len(self.provenance) != l + 1:
            raise ValueError("inconsistent path lengths")
        if self.provenance[0][0] != "graph-node" or self.provenance[-1][0] != "graph-node":
            raise ValueError("path endpoints must come from graph nodes")

    @property
    def hops(self) -> int:
        return len(self.edge_types)

    def to_json(self, hin: Hin) -> dict:
        return {
            "names": [" ".join(n) for n in self.names],
            "edge_types": [" ".join(hin.edge_type_names[e]) for e in self.edge_types],
            "edge_type_ids": list(self.edge_types),
            "type_ids": list(self.assigned_types),
            "type_names": [hin.node_type_raw[t] for t in self.assigned_types],
            "provenance": [{"kind": k, "node_id": i} for k, i in self.provenance],
            "log_score": self.total_log_score,
        }

    @staticmethod
    def from_json(obj: dict) -> "TypedPath":
        return TypedPath(
            names=tuple(tuple(n.split()) for n in obj["names"]),
            edge_types=tuple(obj["edge_type_ids"]),
            assigned_types=tuple(obj["type_ids"]),
            provenance=tuple((p["kind"], p["node_id"]) for p in obj["provenance"]),
            total_log_score=float(obj["log_score"]),
        )


def write_paths_jsonl(paths: Sequence[TypedPath], hin: Hin, out_path: str) -> None:
    with open(out_path, "w", encoding="utf-8") as f:
        for p in paths:
            f.write(json.dumps(p.to_json(hin), sort_keys=True, separators=(",", ":")))
            f.write("\n")


def read_paths_jsonl(path: str) -> list[TypedPath]:
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                out.append(TypedPath.from_json(json.loads(line)))
    return out


# -- pair sampling ----------------------------------------------------------

def _label_cosine(a: tuple[int, ...], b: tuple[int, ...]) -> float:
    if not a or not b:
        return 0.0
    inter = len(set(a) & set(b))
    return inter / float(np.sqrt(len(set(a)) * len(set(b))))


def sample_pair(hin: Hin, config: SamplerConfig, task_data: Optional[TaskData],
                rng: np.random.Generator) -> tuple[int, int]:
    """Draw (v_h, v_t) according to the configured subset policy."""
    policy = config.subset_policy
    if policy == "lp-training-edges":
        if not task_data or not task_data.training_edges:
            raise ValueError("lp-training-edges policy needs non-empty training edges")
        u, v = task_data.training_edges[int(rng.integers(len(task_data.training_edges)))]
        return int(u), int(v)
    if policy == "nc-label-similar":
        if not task_data or not task_data.labels:
            raise ValueError("nc-label-similar policy needs node labels")
        labeled = sorted(task_data.labels)
        if len(labeled) < 2:
            raise ValueError("need at least 2 labeled nodes")
        for _ in range(100):
            u = labeled[int(rng.integers(len(labeled)))]
            others = [v for v in labeled if v != u]
            weights = np.array([_label_cosine(task_data.labels[u], task_data.labels[v]) for v in others])
            total = weights.sum()
            if total > 0:
                v = others[int(rng.choice(len(others), p=weights / total))]
                return u, v
        raise ValueError("no label-similar partner found for any sampled node")
    if not hin.edges:
        raise ValueError("graph has no edges to sample pairs from")
    e = hin.edges[int(rng.integers(len(hin.edges)))]
    return e.src, e.dst


# -- infilling draft --------------------------------------------------------

class _Draft:
    """Working l-hop template whose edge slots can be overwritten."""

    def __init__(self, v_h: Tokens, v_t: Tokens, l: int):
        self.l = l
        self.segments: list[tuple[str, object]] = [("lit", tuple(v_h))]
        for i in range(1, l):
            if i > 1:
                self.segments.append(("lit", (CONNECTIVE,)))
            self.segments.append(("edge", i))
            self.segments.append(("node", i))
            self.segments.append(("lit", (PERIOD,)))
        self.segments.append(("lit", (CONNECTIVE,)))
        self.segments.append(("edge", l))
        self.segments.append(("lit", tuple(v_t)))
        self.edge_fill: dict[int, Tokens] = {}
        self.node_fill: dict[int, Tokens] = {}

    def set_edge(self, i: int, tokens: Tokens) -> None:
        self.edge_fill[i] = tuple(tokens)

    def set_node(self, i: int, tokens: Tokens) -> None:
        self.node_fill[i] = tuple(tokens)

    def prefix_before(self, kind: str, index: int) -> Tokens:
        out: list[str] = []
        for seg_kind, val in self.segments:
            if seg_kind == kind and val == index:
                return tuple(out)
            if seg_kind == "lit":
                out.extend(val)
            elif seg_kind == "edge":
                out.extend(self.edge_fill[val])
            else:
                out.extend(self.node_fill[val])
        raise KeyError(f"no {kind} slot {index}")

    def to_template(self) -> MaskedTemplate:
        """Current state as a MaskedTemplate; unfilled slots become masks."""
        tokens: list[str] = []
        masks: list[Mask] = []
        for seg_kind, val in self.segments:
            if seg_kind == "lit":
                tokens.extend(val)
            elif seg_kind == "edge":
                if val in self.edge_fill:
                    tokens.extend(self.edge_fill[val])
                else:
                    masks.append(Mask("edge", val, len(tokens)))
                    tokens.append(MASK)
            else:
                if val in self.node_fill:
                    tokens.extend(self.node_fill[val])
                else:
                    masks.append(Mask("node", val, len(tokens)))
                    tokens.append(MASK)
        return MaskedTemplate(tokens=tuple(tokens), masks=tuple(masks))


def _sample_scored(scored: list[tuple[int, float]], temperature: float,
                   rng: np.random.Generator) -> tuple[int, float]:
    """Pick from (item, log_score) pairs: greedy at T=0, softmax otherwise."""
    if temperature <= 0:
        best = min(range(len(scored)), key=lambda i: (-scored[i][1], scored[i][0]))
        return scored[best]
    logits = np.array([s for _, s in scored]) / temperature
    logits -= logits.max()
    probs = np.exp(logits)
    probs /= probs.sum()
    idx = int(rng.choice(len(scored), p=probs))
    return scored[idx]


def _sample_fill(fills: list[Fill], temperature: float, rng: np.random.Generator) -> Fill:
    if temperature <= 0:
        return fills[0]  # fill_candidates already sorted with lexicographic ties
    logits = np.array([f.log_score for f in fills]) / temperature
    logits -= logits.max()
    probs = np.exp(logits)
    probs /= probs.sum()
    return fills[int(rng.choice(len(fills), p=probs))]


def _assign_type(hin: Hin, backend: ScorerBackend, classifier: ClassifierParams,
                 name: Tokens, prev_name: Tokens, prev_etype: Tokens):
    ids = hin.name_to_ids.get(tuple(name), [])
    types = {hin.node_type(i) for i in ids}
    if len(types) == 1:
        return next(iter(types)), ("graph-node", min(ids))
    if classifier is None:
        raise DeadEndError(f"name {' '.join(name)!r} needs the classifier, none provided")
    h_i, h_e = classifier_features(backend, name, prev_name, prev_etype)
    return predict_type(classifier, h_i, h_e), ("classifier-typed", None)


def _propose_edge(hin: Hin, backend: ScorerBackend, prefix: Tokens, candidates: list[int],
                  temperature: float, rng: np.random.Generator) -> tuple[int, float]:
    scored = [(e, backend.score(prefix + hin.edge_type_names[e])) for e in candidates]
    return _sample_scored(scored, temperature, rng)


def sample_path(
    hin: Hin,
    backend: ScorerBackend,
    classifier: Optional[ClassifierParams],
    v_h: int,
    v_t: int,
    l: int,
    config: SamplerConfig,
    rng: np.random.Generator,
    schema: Optional[Schema] = None,
) -> TypedPath:
    """Sample one l-hop typed path from v_h to v_t; raises DeadEndError."""
    if schema is None:
        schema = derive_schema(hin)
    lo, hi = config.hop_range
    if not (lo <= l <= hi):
        raise ValueError(f"hop count {l} outside configured range {config.hop_range}")
    type_h, type_t = hin.node_type(v_h), hin.node_type(v_t)
    name_h, name_t = hin.node_name(v_h), hin.node_name(v_t)

    if l == 1:
        etypes = schema.etypes_between(type_h, type_t)
        if not etypes:
            raise DeadEndError(
                f"no edge type connects types {hin.node_type_raw[type_h]!r} "
                f"and {hin.node_type_raw[type_t]!r}"
            )
        e = etypes[int(rng.integers(len(etypes)))]
        return TypedPath(
            names=(name_h, name_t),
            edge_types=(e,),
            assigned_types=(type_h, type_t),
            provenance=(("graph-node", v_h), ("graph-node", v_t)),
            total_log_score=0.0,
        )

    draft = _Draft(name_h, name_t, l)
    total = 0.0
    edge_ids: dict[int, int] = {}

    # first edge: schema-valid for the head type, LM-weighted
    head_cands = schema.etypes_from(type_h)
    if not head_cands:
        raise DeadEndError(f"type {hin.node_type_raw[type_h]!r} has no outgoing edge types")
    e1, s1 = _propose_edge(hin, backend, draft.prefix_before("edge", 1), head_cands,
                           config.temperature, rng)
    draft.set_edge(1, hin.edge_type_names[e1])
    edge_ids[1] = e1
    total += s1

    # last edge sampled up front as template context (tail-type validity only);
    # the final value comes from the resample after the last interior node is typed
    tail_cands = schema.etypes_to(type_t)
    if not tail_cands:
        raise DeadEndError(f"type {hin.node_type_raw[type_t]!r} has no incoming edge types")
    scored_tail = [(e, backend.score(hin.edge_type_names[e] + name_t)) for e in tail_cands]
    e_last0, _ = _sample_scored(scored_tail, config.temperature, rng)
    draft.set_edge(l, hin.edge_type_names[e_last0])

    # interior edges start as the common connective
    for i in range(2, l):
        draft.set_edge(i, RELATES_TO)

    names: list[Tokens] = [name_h]
    types: list[int] = [type_h]
    prov: list[tuple[str, Optional[int]]] = [("graph-node", v_h)]
    candidates = hin.all_names()
    prev_etype = hin.edge_type_names[e1]

    for k in range(1, l):
        template = draft.to_template()
        fills = fill_candidates(backend, template, 0, candidates, k=len(candidates),
                                rescore_full=config.rescore_full)
        if config.top_k_fill > 0:
            fills = fills[: config.top_k_fill]
        chosen = _sample_fill(fills, config.temperature, rng)
        draft.set_node(k, chosen.tokens)
        total += chosen.log_score
        t_k, prov_k = _assign_type(hin, backend, classifier, chosen.tokens, names[-1], prev_etype)
        names.append(chosen.tokens)
        types.append(t_k)
        prov.append(prov_k)

        next_cands = (schema.etypes_between(t_k, type_t) if k + 1 == l
                      else schema.etypes_from(t_k))
        if not next_cands:
            raise DeadEndError(
                f"no schema-valid edge type out of type {hin.node_type_raw[t_k]!r} at hop {k + 1}"
            )
        e_next, s_next = _propose_edge(hin, backend, draft.prefix_before("edge", k + 1),
                                       next_cands, config.temperature, rng)
        draft.set_edge(k + 1, hin.edge_type_names[e_next])
        edge_ids[k + 1] = e_next
        total += s_next
        prev_etype = hin.edge_type_names[e_next]

    names.append(name_t)
    types.append(type_t)
    prov.append(("graph-node", v_t))
    return TypedPath(
        names=tuple(names),
        edge_types=tuple(edge_ids[i] for i in range(1, l + 1)),
        assigned_types=tuple(types),
        provenance=tuple(prov),
        total_log_score=total,
    )


@dataclass
class SamplingStats:
    attempts: int = 0
    successes: int = 0
    dead_ends: int = 0
    skipped: int = 0
    by_hop: dict = field(default_factory=dict)

    @property
    def dead_end_rate(self) -> float:
        return self.dead_ends / self.attempts if self.attempts else 0.0

    def to_json(self) -> dict:
        return {
            "attempts": self.attempts, "successes": self.successes,
            "dead_ends": self.dead_ends, "skipped": self.skipped,
            "dead_end_rate": self.dead_end_rate,
            "by_hop": {str(k): v for k, v in sorted(self.by_hop.items())},
        }


def _sample_for_pair(hin, backend, classifier, config, task_data, schema, pair_idx):
    rng = np.random.default_rng([config.seed, pair_idx])
    paths: list[TypedPath] = []
    stats = SamplingStats()
    v_h, v_t = sample_pair(hin, config, task_data, rng)
    for l in config.hops():
        for _ in range(config.repeats_per_pair):
            done = False
            for _attempt in range(config.max_retries + 1):
                stats.attempts += 1
                try:
                    p = sample_path(hin, backend, classifier, v_h, v_t, l, config, rng, schema)
                except DeadEndError:
                    stats.dead_ends += 1
                    continue
                paths.append(p)
                stats.successes += 1
                stats.by_hop[l] = stats.by_hop.get(l, 0) + 1
                done = True
                break
            if not done:
                stats.skipped += 1
    return paths, stats


def run_sampling(
    hin: Hin,
    backend: ScorerBackend,
    classifier: Optional[ClassifierParams],
    config: SamplerConfig,
    n_pairs: int,
    task_data: Optional[TaskData] = None,
    schema: Optional[Schema] = None,
    workers: int = 1,
) -> tuple[list[TypedPath], SamplingStats]:
    """Sample paths for n_pairs endpoint pairs over the configured hop schedule.

    Each pair owns a seed derived from (config.seed, pair index) and results
    are concatenated in pair order, so output is identical for any worker count.
    """
    if schema is None:
        schema = derive_schema(hin)
    results: list = [None] * n_pairs
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_sample_for_pair, hin, backend, classifier, config,
                            task_data, schema, i): i
                for i in range(n_pairs)
            }
            for fut, i in futures.items():
                results[i] = fut.result()
    else:
        for i in range(n_pairs):
            results[i] = _sample_for_pair(hin, backend, classifier, config, task_data, schema, i)
    all_paths: list[TypedPath] = []
    total = SamplingStats()
    for paths, stats in results:
        all_paths.extend(paths)
        total.attempts += stats.attempts
        total.successes += stats.successes
        total.dead_ends += stats.dead_ends
        total.skipped += stats.skipped
        for k, v in stats.by_hop.items():
            total.by_hop[k] = total.by_hop.get(k, 0) + v
    return all_paths, total

"""Downstream heads and studies: link prediction, node classification,
zero-shot pseudo-pair generation, and the path-likelihood hypothesis study."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .embedding import EmbeddingTable
from .graph import Hin, Tokens
from .lm import ScorerBackend, fill_candidates
from .metrics import auc_score, average_precision, micro_macro_f1, roc_points, sigmoid, spearman
from .verbalize import CONNECTIVE, MASK, PERIOD, Mask, MaskedTemplate
from .classifier import softmax


@dataclass
class EvalReport:
    task: str
    metrics: dict
    config: dict = field(default_factory=dict)
    metapaths: list = field(default_factory=list)

    def __post_init__(self) -> None:
        for name, value in self.metrics.items():
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"metric {name} = {value} outside [0, 1]")

    def to_json(self) -> dict:
        return {"task": self.task, "metrics": self.metrics,
                "config": self.config, "metapaths": self.metapaths}

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, sort_keys=True, separators=(",", ":"))


# -- link prediction ---------------------------------------------------------

@dataclass
class LinkPredictionData:
    target_etype: int
    train_pos: list[tuple[int, int]]
    test_pos: list[tuple[int, int]]
    train_neg: list[tuple[int, int]]
    test_neg: list[tuple[int, int]]

    def __post_init__(self) -> None:
        pos = set(self.train_pos) | set(self.test_pos)
        neg = set(self.train_neg) | set(self.test_neg)
        if pos & neg:
            raise ValueError("positive and negative pairs overlap")
        if set(self.test_pos) & set(self.train_pos):
            raise ValueError("test positives overlap training positives")


def build_link_prediction_data(
    hin: Hin,
    target_etype: int,
    test_fraction: float = 0.3,
    seed: int = 0,
) -> LinkPredictionData:
    """Split target-type edges and corrupt tails for 1:1 negatives.

    Corrupted tails are drawn from nodes whose type is an observed tail type
    of the target edge type, avoiding true pairs.
    """
    positives = sorted({(e.src, e.dst) for e in hin.edges if e.etype == target_etype})
    if len(positives) < 2:
        raise ValueError(f"edge type {target_etype} has too few edges for a split")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(positives))
    n_test = max(1, int(round(len(positives) * test_fraction)))
    test_idx = set(order[:n_test].tolist())
    test_pos = [positives[i] for i in sorted(test_idx)]
    train_pos = [positives[i] for i in range(len(positives)) if i not in test_idx]

    tail_types = sorted({hin.node_type(v) for _, v in positives})
    tail_pool = sorted(n for t in tail_types for n in hin.nodes_by_type.get(t, []))
    true_pairs = set(positives)

    def corrupt(pairs: list[tuple[int, int]], used: set) -> list[tuple[int, int]]:
        out = []
        for u, v in pairs:
            for _ in range(1000):
                cand = tail_pool[int(rng.integers(len(tail_pool)))]
                pair = (u, cand)
                if cand != v and pair not in true_pairs and pair not in used:
                    used.add(pair)
                    out.append(pair)
                    break
            else:
                raise ValueError("could not draw a negative tail; graph too dense")
        return out

    used: set = set()
    train_neg = corrupt(train_pos, used)
    test_neg = corrupt(test_pos, used)
    return LinkPredictionData(target_etype, train_pos, test_pos, train_neg, test_neg)


def edge_score(emb: EmbeddingTable, u: int, v: int) -> float:
    """sigmoid(e_u . e_v); strictly inside (0, 1)."""
    return sigmoid(float(emb.vector(u) @ emb.vector(v)))


def eval_link_prediction(emb: EmbeddingTable, data: LinkPredictionData,
                         config: Optional[dict] = None) -> EvalReport:
    """AUC and AP over the test split of a link prediction dataset."""
    if not data.test_pos or not data.test_neg:
        raise ValueError("test split needs both positives and negatives")
    pos = [edge_score(emb, u, v) for u, v in data.test_pos]
    neg = [edge_score(emb, u, v) for u, v in data.test_neg]
    scores = pos + neg
    labels = [1] * len(pos) + [0] * len(neg)
    return EvalReport(
        task="link-prediction",
        metrics={"auc": auc_score(pos, neg), "ap": average_precision(scores, labels)},
        config=config or {},
    )


def lp_scores_and_labels(emb: EmbeddingTable, data: LinkPredictionData):
    pos = [(u, v, edge_score(emb, u, v), 1) for u, v in data.test_pos]
    neg = [(u, v, edge_score(emb, u, v), 0) for u, v in data.test_neg]
    return pos + neg


def lp_roc_points(emb: EmbeddingTable, data: LinkPredictionData):
    rows = lp_scores_and_labels(emb, data)
    return roc_points([r[2] for r in rows], [r[3] for r in rows])


def lp_loss(emb: EmbeddingTable, pos: Sequence[tuple[int, int]],
            neg: Sequence[tuple[int, int]]) -> float:
    """-sum log sigma(e_u.e_v) over positives - sum log sigma(-e_u.e_v) over negatives."""
    loss = 0.0
    for u, v in pos:
        loss -= np.log(max(sigmoid(float(emb.vector(u) @ emb.vector(v))), 1e-300))
    for u, v in neg:
        loss -= np.log(max(sigmoid(-float(emb.vector(u) @ emb.vector(v))), 1e-300))
    return float(loss)


def lp_finetune(emb: EmbeddingTable, data: LinkPredictionData, lr: float = 1e-3,
                epochs: int = 1) -> tuple[EmbeddingTable, list[float]]:
    """Optional fine-tuning of embeddings on the pairwise loss (train split)."""
    matrix = emb.matrix.copy()
    table = EmbeddingTable(dim=emb.dim, ids=emb.ids, matrix=matrix,
                           training_meta=dict(emb.training_meta, lp_finetuned=True))
    losses = [lp_loss(table, data.train_pos, data.train_neg)]
    for _ in range(epochs):
        for pairs, sign in ((data.train_pos, 1.0), (data.train_neg, -1.0)):
            for u, v in pairs:
                ru, rv = table.rows[u], table.rows[v]
                eu, ev = matrix[ru].copy(), matrix[rv].copy()
                s = sigmoid(sign * float(eu @ ev))
                coef = lr * (1.0 - s) * sign
                matrix[ru] += coef * ev
                matrix[rv] += coef * eu
        losses.append(lp_loss(table, data.train_pos, data.train_neg))
    return table, losses


# -- node classification -----------------------------------------------------

@dataclass
class NodeClassificationData:
    labels: dict[int, int]
    num_classes: int
    train_nodes: list[int]
    test_nodes: list[int]

    def __post_init__(self) -> None:
        for n, c in self.labels.items():
            if not (0 <= c < self.num_classes):
                raise ValueError(f"label {c} of node {n} outside 0..{self.num_classes - 1}")
        overlap = set(self.train_nodes) & set(self.test_nodes)
        if overlap:
            raise ValueError("train/test node overlap")


def build_node_classification_data(labels: dict[int, int], num_classes: int,
                                   test_fraction: float = 0.3, seed: int = 0) -> NodeClassificationData:
    nodes = sorted(labels)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(nodes))
    n_test = max(1, int(round(len(nodes) * test_fraction)))
    test = [nodes[i] for i in sorted(order[:n_test].tolist())]
    train = [nodes[i] for i in sorted(order[n_test:].tolist())]
    return NodeClassificationData(labels, num_classes, train, test)


@dataclass
class NcHead:
    w: np.ndarray  # C x dim
    b: np.ndarray  # C
    history: dict = field(default_factory=dict, repr=False)


def nc_loss_and_grads(w, b, x, y):
    """Mean cross entropy of softmax(w e_v + b) plus gradients."""
    n = x.shape[0]
    probs = softmax(x @ w.T + b)
    loss = -np.log(np.maximum(probs[np.arange(n), y], 1e-300)).mean()
    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    return loss, delta.T @ x, delta.sum(axis=0)


def train_nc_head(
    emb: EmbeddingTable,
    data: NodeClassificationData,
    lr: float = 0.5,
    epochs: int = 200,
    seed: int = 0,
    batch_size: int = 32,
    val_fraction: float = 0.125,
) -> NcHead:
    """Softmax regression on frozen embeddings with early stopping on a
    12.5% validation slice of the training nodes."""
    train_classes = {data.labels[n] for n in data.train_nodes}
    if len(train_classes) < 2:
        raise ValueError("training split has a single class; nothing to separate")
    rng = np.random.default_rng(seed)
    nodes = list(data.train_nodes)
    order = rng.permutation(len(nodes))
    n_val = max(1, int(round(len(nodes) * val_fraction)))
    val_nodes = [nodes[i] for i in order[:n_val]]
    fit_nodes = [nodes[i] for i in order[n_val:]] or list(val_nodes)

    def tensorize(ns):
        x = np.stack([emb.vector(n) for n in ns])
        y = np.array([data.labels[n] for n in ns], dtype=int)
        return x, y

    x_fit, y_fit = tensorize(fit_nodes)
    x_val, y_val = tensorize(val_nodes)
    w = np.zeros((data.num_classes, emb.dim))
    b = np.zeros(data.num_classes)
    best = (w.copy(), b.copy())
    best_val = np.inf
    history = {"train_loss": [], "val_loss": [], "best_epoch": -1}
    for epoch in range(epochs):
        perm = rng.permutation(len(fit_nodes))
        for start in range(0, len(perm), batch_size):
            idx = perm[start : start + batch_size]
            _, gw, gb = nc_loss_and_grads(w, b, x_fit[idx], y_fit[idx])
            w -= lr * gw
            b -= lr * gb
        tr, _, _ = nc_loss_and_grads(w, b, x_fit, y_fit)
        vl, _, _ = nc_loss_and_grads(w, b, x_val, y_val)
        history["train_loss"].append(float(tr))
        history["val_loss"].append(float(vl))
        if vl < best_val:
            best_val = vl
            best = (w.copy(), b.copy())
            history["best_epoch"] = epoch
    return NcHead(w=best[0], b=best[1], history=history)


def predict_classes(head: NcHead, emb: EmbeddingTable, nodes: Sequence[int]) -> np.ndarray:
    x = np.stack([emb.vector(n) for n in nodes])
    return np.argmax(softmax(x @ head.w.T + head.b), axis=1)


def eval_node_classification(head: NcHead, emb: EmbeddingTable,
                             data: NodeClassificationData,
                             config: Optional[dict] = None) -> EvalReport:
    if not data.test_nodes:
        raise ValueError("empty test set")
    y_true = [data.labels[n] for n in data.test_nodes]
    y_pred = predict_classes(head, emb, data.test_nodes)
    micro, macro = micro_macro_f1(y_true, y_pred, data.num_classes)
    return EvalReport(task="node-classification",
                      metrics={"micro_f1": micro, "macro_f1": macro},
                      config=config or {})


# -- zero-shot pseudo pairs ---------------------------------------------------

def zero_shot_pairs(
    hin: Hin,
    backend: ScorerBackend,
    edge_type_name: Tokens,
    n: int,
    seed: int = 0,
    temperature: float = 1.0,
    max_attempts: Optional[int] = None,
) -> list[tuple[int, int]]:
    """Generate up to n distinct node pairs for a relation by filling
    ``[MASK] <edge type> [MASK]`` head-first, keeping resolvable names.

    A name matching several nodes resolves to the lowest node id.
    """
    if n == 0:
        return []
    if not edge_type_name:
        raise ValueError("edge type name must be non-empty")
    candidates = hin.all_names()
    rng = np.random.default_rng(seed)
    budget = max_attempts if max_attempts is not None else max(50 * n, 100)
    etype = tuple(edge_type_name)
    template = MaskedTemplate(
        tokens=(MASK,) + etype + (MASK,),
        masks=(Mask("node", 1, 0), Mask("node", 2, len(etype) + 1)),
    )
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for _ in range(budget):
        if len(pairs) >= n:
            break
        left_fills = fill_candidates(backend, template, 0, candidates, k=len(candidates))
        left = _temperature_pick(left_fills, temperature, rng)
        partial = template.substitute(0, left.tokens)
        right_fills = fill_candidates(backend, partial, 0, candidates, k=len(candidates))
        right = _temperature_pick(right_fills, temperature, rng)
        u_ids = hin.name_to_ids.get(left.tokens)
        v_ids = hin.name_to_ids.get(right.tokens)
        if not u_ids or not v_ids:
            continue
        pair = (min(u_ids), min(v_ids))
        if pair not in seen:
            seen.add(pair)
            pairs.append(pair)
    if not pairs:
        raise ValueError("no resolvable pseudo pairs generated within the budget")
    return pairs


def _temperature_pick(fills, temperature, rng):
    if temperature <= 0:
        return fills[0]
    logits = np.array([f.log_score for f in fills]) / temperature
    logits -= logits.max()
    probs = np.exp(logits)
    probs /= probs.sum()
    return fills[int(rng.choice(len(fills), p=probs))]


# -- hypothesis study ---------------------------------------------------------

@dataclass
class HypothesisReport:
    plm_scores: list[float]
    name_scores: list[float]
    connectivity: list[int]
    spearman_plm_name: float
    spearman_plm_connectivity: float
    paths: list[tuple[int, int, int, int, int]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "n_paths": len(self.plm_scores),
            "spearman_plm_name": self.spearman_plm_name,
            "spearman_plm_connectivity": self.spearman_plm_connectivity,
            "plm_scores": self.plm_scores,
            "name_scores": self.name_scores,
            "connectivity": self.connectivity,
        }


def name_similarity(backend: ScorerBackend, head: Tokens, tail: Tokens) -> float:
    """1 / (1 + Euclidean distance between the endpoint name embeddings)."""
    diff = backend.embed(head) - backend.embed(tail)
    return float(1.0 / (1.0 + np.linalg.norm(diff)))


def _directly_connected(hin: Hin, u: int, w: int) -> int:
    if any(dst == w for _, dst in hin.out_adj[u]):
        return 1
    if any(dst == u for _, dst in hin.out_adj[w]):
        return 1
    return 0


def verbalize_two_hop(hin: Hin, u: int, e1: int, m: int, e2: int, w: int) -> Tokens:
    """The filled 2-hop sentence: ``u e1 m . It e2 w``."""
    return (hin.node_name(u) + hin.edge_type_names[e1] + hin.node_name(m)
            + (PERIOD, CONNECTIVE) + hin.edge_type_names[e2] + hin.node_name(w))


def sample_two_hop_paths(hin: Hin, n_paths: int, seed: int = 0) -> list[tuple[int, int, int, int, int]]:
    """Distinct (u, e1, m, e2, w) tuples drawn by two random hops."""
    if not hin.edges:
        raise ValueError("graph has no edges")
    rng = np.random.default_rng(seed)
    found: list = []
    seen: set = set()
    for _ in range(max(200, 60 * n_paths)):
        if len(found) >= n_paths:
            break
        e = hin.edges[int(rng.integers(len(hin.edges)))]
        outs = hin.out_adj[e.dst]
        if not outs:
            continue
        et2, w = outs[int(rng.integers(len(outs)))]
        tup = (e.src, e.etype, e.dst, et2, w)
        if tup not in seen:
            seen.add(tup)
            found.append(tup)
    return found


def hypothesis_study(hin: Hin, backend: ScorerBackend, n_paths: int = 1000,
                     seed: int = 0) -> HypothesisReport:
    """Score sampled 2-hop paths three ways and report rank correlations.

    Per path: LM log-probability of the verbalized sentence, endpoint
    name-embedding similarity, and direct endpoint adjacency (either
    direction).
    """
    paths = sample_two_hop_paths(hin, n_paths, seed)
    if len(paths) < 2:
        raise ValueError(f"graph admits only {len(paths)} distinct 2-hop paths; need >= 2")
    plm, name, conn = [], [], []
    for u, e1, m, e2, w in paths:
        plm.append(backend.score(verbalize_two_hop(hin, u, e1, m, e2, w)))
        name.append(name_similarity(backend, hin.node_name(u), hin.node_name(w)))
        conn.append(_directly_connected(hin, u, w))
    return HypothesisReport(
        plm_scores=plm,
        name_scores=name,
        connectivity=conn,
        spearman_plm_name=spearman(plm, name),
        spearman_plm_connectivity=spearman(plm, conn),
        paths=paths,
    )

"""Context-aware node type classifier.

Two softmax heads share the backend's embeddings: the main head predicts a
node's type from [name embedding ; context embedding], the auxiliary head
predicts the neighbor's type from [neighbor name embedding ; context
embedding]. The combined loss is main + lambda * neighbor. Embeddings are
frozen by default; joint updates are available for the built-in backend.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .graph import Hin, Tokens
from .lm import BuiltinLm, ScorerBackend
from .verbalize import verbalize_context

MAGIC = b"HINTYPC1"


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class ClassifierParams:
    w1: np.ndarray  # K x 2d
    b1: np.ndarray  # K
    w2: np.ndarray  # K x 2d
    b2: np.ndarray  # K
    lam: float
    history: dict = field(default_factory=dict, repr=False)

    @property
    def num_types(self) -> int:
        return int(self.w1.shape[0])

    @property
    def dim(self) -> int:
        return int(self.w1.shape[1] // 2)

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy(), self.lam)

    def save(self, path: str) -> None:
        """Flat binary: magic, K, d, lambda, then W1 b1 W2 b2 as little-endian f64."""
        k, d = self.num_types, self.dim
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<IId", k, d, self.lam))
            for arr in (self.w1, self.b1, self.w2, self.b2):
                f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())

    @staticmethod
    def load(path: str) -> "ClassifierParams":
        with open(path, "rb") as f:
            magic = f.read(8)
            if magic != MAGIC:
                raise ValueError(f"not a classifier params file (magic {magic!r})")
            k, d, lam = struct.unpack("<IId", f.read(16))
            def read(shape):
                n = int(np.prod(shape))
                return np.frombuffer(f.read(8 * n), dtype="<f8").reshape(shape).astype(float)
            w1 = read((k, 2 * d))
            b1 = read((k,))
            w2 = read((k, 2 * d))
            b2 = read((k,))
        return ClassifierParams(w1, b1, w2, b2, lam)


def classifier_features(backend: ScorerBackend, v_i: Tokens, v_j: Tokens,
                        edge_type_name: Tokens) -> tuple[np.ndarray, np.ndarray]:
    """(h_i, h_e): name embedding of v_i and embedding of 'v_j [SEP] a [SEP] v_i'."""
    h_i = backend.embed(v_i)
    h_e = backend.embed(verbalize_context(v_j, edge_type_name, v_i))
    return h_i, h_e


def classify(params: ClassifierParams, h_i: np.ndarray, h_e: np.ndarray) -> np.ndarray:
    """Type probabilities: softmax(W1 [h_i ; h_e] + b1)."""
    x = np.concatenate([h_i, h_e])
    if x.shape[0] != params.w1.shape[1]:
        raise ValueError(f"feature dim {x.shape[0]} does not match params ({params.w1.shape[1]})")
    return softmax(params.w1 @ x + params.b1)


def predict_type(params: ClassifierParams, h_i: np.ndarray, h_e: np.ndarray) -> int:
    """Argmax type id; exact ties resolve to the lowest id."""
    return int(np.argmax(classify(params, h_i, h_e)))


@dataclass
class _Incidences:
    """Per-incidence features and targets; one incidence per edge direction."""
    x_main: np.ndarray   # N x 2d  ([h_i ; h_e])
    y_main: np.ndarray   # N       (type of v_i)
    x_ngh: np.ndarray    # N x 2d  ([h_j ; h_e])
    y_ngh: np.ndarray    # N       (type of v_j)
    i_tokens: list       # token ids of v_i per example (joint mode)
    j_tokens: list
    ctx_tokens: list


def _build_incidences(hin: Hin, backend: ScorerBackend) -> _Incidences:
    xs_main, ys_main, xs_ngh, ys_ngh = [], [], [], []
    i_toks, j_toks, ctx_toks = [], [], []
    for e in hin.edges:
        for v_i, v_j in ((e.src, e.dst), (e.dst, e.src)):
            name_i = hin.node_name(v_i)
            name_j = hin.node_name(v_j)
            etype = hin.edge_type_names[e.etype]
            ctx = verbalize_context(name_j, etype, name_i)
            h_i = backend.embed(name_i)
            h_j = backend.embed(name_j)
            h_e = backend.embed(ctx)
            xs_main.append(np.concatenate([h_i, h_e]))
            ys_main.append(hin.node_type(v_i))
            xs_ngh.append(np.concatenate([h_j, h_e]))
            ys_ngh.append(hin.node_type(v_j))
            i_toks.append(name_i)
            j_toks.append(name_j)
            ctx_toks.append(ctx)
    return _Incidences(
        np.asarray(xs_main), np.asarray(ys_main, dtype=int),
        np.asarray(xs_ngh), np.asarray(ys_ngh, dtype=int),
        i_toks, j_toks, ctx_toks,
    )


def _head_loss_grads(w, b, x, y):
    """Mean cross entropy of softmax(w x + b) and its gradients; also d/dx."""
    n = x.shape[0]
    probs = softmax(x @ w.T + b)
    loss = -np.log(np.maximum(probs[np.arange(n), y], 1e-300)).mean()
    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    return loss, delta.T @ x, delta.sum(axis=0), delta @ w


def loss_and_grads(params: ClassifierParams, x_main, y_main, x_ngh, y_ngh):
    """Combined loss main + lambda * neighbor and gradients for all four params."""
    l_main, gw1, gb1, _ = _head_loss_grads(params.w1, params.b1, x_main, y_main)
    l_ngh, gw2, gb2, _ = _head_loss_grads(params.w2, params.b2, x_ngh, y_ngh)
    loss = l_main + params.lam * l_ngh
    return loss, {
        "w1": gw1, "b1": gb1,
        "w2": params.lam * gw2, "b2": params.lam * gb2,
    }, l_main, l_ngh


def train_classifier(
    hin: Hin,
    backend: ScorerBackend,
    lam: float = 1.0,
    lr: float = 0.5,
    epochs: int = 60,
    seed: int = 0,
    batch_size: int = 32,
    val_fraction: float = 0.2,
    joint_finetune: bool = False,
    joint_lr: float = 0.05,
) -> ClassifierParams:
    """SGD on the combined loss with a 4:1 train/validation split.

    Returns the parameters that achieved the lowest recorded validation loss.
    joint_finetune additionally pushes gradients into a BuiltinLm's token
    embedding table (mutating the backend).
    """
    if hin.num_node_types < 2:
        raise ValueError(
            "training a node type classifier needs at least 2 node types; "
            f"this graph has {hin.num_node_types}"
        )
    if joint_finetune and not isinstance(backend, BuiltinLm):
        raise ValueError("joint_finetune requires the built-in backend")
    inc = _build_incidences(hin, backend)
    n = inc.x_main.shape[0]
    if n == 0:
        raise ValueError("graph has no edges; nothing to train on")
    k = hin.num_node_types
    d = backend.embedding_dim

    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_val = max(1, int(round(n * val_fraction))) if n > 1 else 0
    val_idx, train_idx = order[:n_val], order[n_val:]
    if len(train_idx) == 0:
        train_idx = order
        val_idx = order

    params = ClassifierParams(
        w1=np.zeros((k, 2 * d)), b1=np.zeros(k),
        w2=np.zeros((k, 2 * d)), b2=np.zeros(k), lam=lam,
    )
    best = params.copy()
    best_val = np.inf
    history = {"train_loss": [], "train_main": [], "val_loss": [], "best_epoch": -1}

    for epoch in range(epochs):
        perm = rng.permutation(len(train_idx))
        for start in range(0, len(perm), batch_size):
            batch = train_idx[perm[start : start + batch_size]]
            if joint_finetune:
                _refresh_features(inc, backend, batch)
            _, grads, _, _ = loss_and_grads(
                params, inc.x_main[batch], inc.y_main[batch],
                inc.x_ngh[batch], inc.y_ngh[batch],
            )
            if joint_finetune:
                _joint_embedding_step(params, inc, backend, batch, joint_lr)
            params.w1 -= lr * grads["w1"]
            params.b1 -= lr * grads["b1"]
            params.w2 -= lr * grads["w2"]
            params.b2 -= lr * grads["b2"]
        if joint_finetune:
            _refresh_features(inc, backend, np.arange(n))
        tr_loss, _, tr_main, _ = loss_and_grads(
            params, inc.x_main[train_idx], inc.y_main[train_idx],
            inc.x_ngh[train_idx], inc.y_ngh[train_idx],
        )
        val_loss, _, _, _ = loss_and_grads(
            params, inc.x_main[val_idx], inc.y_main[val_idx],
            inc.x_ngh[val_idx], inc.y_ngh[val_idx],
        )
        history["train_loss"].append(float(tr_loss))
        history["train_main"].append(float(tr_main))
        history["val_loss"].append(float(val_loss))
        if val_loss < best_val:
            best_val = val_loss
            best = params.copy()
            history["best_epoch"] = epoch
    if joint_finetune:
        backend.unk_vector = backend.embeddings.mean(axis=0)
    best.history = history
    return best


def _refresh_features(inc: _Incidences, backend: BuiltinLm, idx) -> None:
    for i in idx:
        h_i = backend.embed(inc.i_tokens[i])
        h_j = backend.embed(inc.j_tokens[i])
        h_e = backend.embed(inc.ctx_tokens[i])
        inc.x_main[i] = np.concatenate([h_i, h_e])
        inc.x_ngh[i] = np.concatenate([h_j, h_e])


def _joint_embedding_step(params: ClassifierParams, inc: _Incidences,
                          backend: BuiltinLm, batch, joint_lr: float) -> None:
    """Push loss gradients through mean-pooled embeddings into the LM table."""
    d = params.dim
    _, _, _, dx_main = _head_loss_grads(params.w1, params.b1, inc.x_main[batch], inc.y_main[batch])
    _, _, _, dx_ngh = _head_loss_grads(params.w2, params.b2, inc.x_ngh[batch], inc.y_ngh[batch])
    dx_ngh = params.lam * dx_ngh
    for row, i in enumerate(batch):
        _apply_pooled_grad(backend, inc.i_tokens[i], dx_main[row, :d], joint_lr)
        _apply_pooled_grad(backend, inc.ctx_tokens[i], dx_main[row, d:] + dx_ngh[row, d:], joint_lr)
        _apply_pooled_grad(backend, inc.j_tokens[i], dx_ngh[row, :d], joint_lr)


def _apply_pooled_grad(backend: BuiltinLm, tokens, grad: np.ndarray, lr: float) -> None:
    ids = backend.ids(tokens)
    share = grad / len(ids)
    for tid in ids:
        if tid >= 0:
            backend.embeddings[tid] -= lr * share

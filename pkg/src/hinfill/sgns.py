"""Skip-gram with negative sampling over integer sequences.

One embedding table serves both center and context roles. The loss for a
(center, context, negatives) example is

    -log sigma(e_c . e_o) - sum_n log sigma(-e_c . e_n)

and training minimizes it by per-example SGD. Used for both LM token
embeddings and node embeddings.
"""

from __future__ import annotations

import numpy as np


def sigmoid(x):
    return np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.clip(x, -500, 500))),
                    np.exp(np.clip(x, -500, 500)) / (1.0 + np.exp(np.clip(x, -500, 500))))


def example_loss(table: np.ndarray, center: int, context: int, negatives) -> float:
    e_c = table[center]
    pos = float(sigmoid(e_c @ table[context]))
    loss = -np.log(max(pos, 1e-300))
    for n in negatives:
        neg = float(sigmoid(-(e_c @ table[n])))
        loss -= np.log(max(neg, 1e-300))
    return float(loss)


def batch_loss(table: np.ndarray, examples) -> float:
    """Sum of example losses over [(center, context, negatives), ...]."""
    return sum(example_loss(table, c, o, negs) for c, o, negs in examples)


def batch_gradients(table: np.ndarray, examples) -> dict[int, np.ndarray]:
    """Analytic gradient of batch_loss w.r.t. each touched table row."""
    grads: dict[int, np.ndarray] = {}

    def add(row: int, g: np.ndarray) -> None:
        if row in grads:
            grads[row] = grads[row] + g
        else:
            grads[row] = g.copy()

    for center, context, negatives in examples:
        e_c = table[center]
        s = float(sigmoid(e_c @ table[context]))
        add(center, -(1.0 - s) * table[context])
        add(context, -(1.0 - s) * e_c)
        for n in negatives:
            sn = float(sigmoid(e_c @ table[n]))
            add(center, sn * table[n])
            add(n, sn * e_c)
    return grads


def sgd_example(table: np.ndarray, center: int, context: int, negatives, lr: float) -> None:
    """In-place descent step on one example's loss."""
    e_c = table[center].copy()
    s = float(sigmoid(e_c @ table[context]))
    table[center] += lr * (1.0 - s) * table[context]
    table[context] += lr * (1.0 - s) * e_c
    negatives = np.asarray(negatives, dtype=int)
    if negatives.size:
        sn = sigmoid(table[negatives] @ e_c)
        table[center] -= lr * (sn @ table[negatives])
        np.add.at(table, negatives, (-lr * sn)[:, None] * e_c)


def init_table(n_rows: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """word2vec-style uniform(-0.5/dim, 0.5/dim) initialization."""
    return rng.uniform(-0.5 / dim, 0.5 / dim, size=(n_rows, dim))


def unigram_noise(sequences, n_rows: int, power: float = 0.75) -> np.ndarray:
    """Noise distribution proportional to corpus frequency ** power."""
    counts = np.zeros(n_rows, dtype=float)
    for seq in sequences:
        for item in seq:
            counts[item] += 1.0
    if counts.sum() == 0:
        raise ValueError("empty corpus")
    weights = counts ** power
    return weights / weights.sum()


def train(
    sequences,
    n_rows: int,
    dim: int,
    window: int,
    negatives: int,
    lr: float,
    epochs: int,
    seed: int,
    table: np.ndarray | None = None,
) -> np.ndarray:
    """Train the table over sequences of row indices; deterministic under seed.

    Negative draws that collide with the center or the positive context are
    skipped (a self-negative term σ(-e·e) destabilizes high learning rates).
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    sequences = [list(s) for s in sequences if len(s) > 0]
    if not sequences:
        raise ValueError("empty corpus")
    rng = np.random.default_rng(seed)
    if table is None:
        table = init_table(n_rows, dim, rng)
    noise = unigram_noise(sequences, n_rows)
    cum = np.cumsum(noise)
    cum[-1] = 1.0
    pairs: list[tuple[int, int]] = []
    for seq in sequences:
        for i, center in enumerate(seq):
            lo = max(0, i - window)
            hi = min(len(seq), i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    pairs.append((center, seq[j]))
    if not pairs:
        return table
    for _ in range(epochs):
        draws = np.searchsorted(cum, rng.random(len(pairs) * max(negatives, 1)), side="right")
        draws = draws.reshape(len(pairs), -1)
        for idx, (center, context) in enumerate(pairs):
            negs = draws[idx] if negatives > 0 else draws[idx][:0]
            negs = negs[(negs != context) & (negs != center)]
            sgd_example(table, center, context, negs, lr)
    return table

"""Ranking and classification metrics with explicit tie conventions.

AUC is the exact pairwise probability that a positive outranks a negative
(ties count 1/2). AP is the step-wise sum over ranked positives with a stable
descending sort. Both therefore agree with their brute-force definitions on
any input, which the test suite exploits.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def auc_score(pos_scores: Sequence[float], neg_scores: Sequence[float]) -> float:
    """P(random positive > random negative), counting ties as 1/2."""
    pos = np.asarray(pos_scores, dtype=float)
    neg = np.asarray(neg_scores, dtype=float)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((wins + 0.5 * ties) / (pos.size * neg.size))


def average_precision(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mean of precision taken at each positive, ranked by descending score.

    Ties keep their original relative order (stable sort), matching the
    brute-force oracle's convention.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise ValueError("AP needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    ranked = labels[order]
    hits = 0
    total = 0.0
    for rank, y in enumerate(ranked, start=1):
        if y == 1:
            hits += 1
            total += hits / rank
    return total / n_pos


def roc_points(scores: Sequence[float], labels: Sequence[int]) -> list[tuple[float, float]]:
    """(FPR, TPR) points along the ranked list, for curve export."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    order = np.argsort(-scores, kind="stable")
    ranked = labels[order]
    p = max(int(labels.sum()), 1)
    n = max(int((1 - labels).sum()), 1)
    tp = fp = 0
    points = [(0.0, 0.0)]
    for y in ranked:
        if y == 1:
            tp += 1
        else:
            fp += 1
        points.append((fp / n, tp / p))
    return points


def micro_macro_f1(y_true: Sequence[int], y_pred: Sequence[int], n_classes: int) -> tuple[float, float]:
    """(micro-F1, macro-F1) over pooled counts / unweighted class mean.

    Classes absent from both truth and prediction contribute F1 = 0 to the
    macro average, per the evaluation convention.
    """
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.size == 0:
        raise ValueError("empty test set")
    tp = np.zeros(n_classes)
    fp = np.zeros(n_classes)
    fn = np.zeros(n_classes)
    for t, p in zip(y_true, y_pred):
        if t == p:
            tp[t] += 1
        else:
            fp[p] += 1
            fn[t] += 1
    micro_p = tp.sum() / max(tp.sum() + fp.sum(), 1e-300)
    micro_r = tp.sum() / max(tp.sum() + fn.sum(), 1e-300)
    micro = 0.0 if micro_p + micro_r == 0 else 2 * micro_p * micro_r / (micro_p + micro_r)
    f1s = []
    for c in range(n_classes):
        prec = tp[c] / (tp[c] + fp[c]) if tp[c] + fp[c] > 0 else 0.0
        rec = tp[c] / (tp[c] + fn[c]) if tp[c] + fn[c] > 0 else 0.0
        f1s.append(0.0 if prec + rec == 0 else 2 * prec * rec / (prec + rec))
    return float(micro), float(np.mean(f1s))


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks with ties sharing the average of their rank range."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average ranks; nan if either side is constant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need two equal-length lists of size >= 2")
    rx = average_ranks(x)
    ry = average_ranks(y)
    sx = rx - rx.mean()
    sy = ry - ry.mean()
    denom = math.sqrt(float(sx @ sx) * float(sy @ sy))
    if denom == 0:
        return float("nan")
    return float((sx @ sy) / denom)

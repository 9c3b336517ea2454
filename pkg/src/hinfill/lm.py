"""Language-model contract and the built-in n-gram backend.

A backend can score token sequences, rank fills for a template mask, and
embed token sequences. The built-in model is an add-k smoothed n-gram over
the verbalized edge corpus, with skip-gram token embeddings; it is the
desk-scale stand-in for a fine-tuned generative PLM. A remote implementation
of the same contract lives in remote.py.
"""

from __future__ import annotations

import abc
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import sgns
from .graph import Hin, Tokens
from .verbalize import MASK, TEMPLATE_LITERALS, MaskedTemplate, verbalize_edge

BOS_ID = -1   # context padding; never a predicted token
UNK_ID = -2   # out-of-vocabulary sentinel; outside the smoothing vocabulary


class BackendError(RuntimeError):
    """The backend rejected a request (bad input, model not ready)."""


class TransportError(BackendError):
    """The remote backend could not be reached; distinguishable from a score."""


class Fill(NamedTuple):
    tokens: Tokens
    log_score: float


class ScorerBackend(abc.ABC):
    """score / fill / embed over whitespace-token sequences."""

    @property
    @abc.abstractmethod
    def embedding_dim(self) -> int: ...

    @property
    @abc.abstractmethod
    def capabilities(self) -> frozenset[str]: ...

    @abc.abstractmethod
    def score(self, tokens: Sequence[str]) -> float:
        """Summed conditional log-probability of the sequence; always <= 0."""

    @abc.abstractmethod
    def fill(self, template: MaskedTemplate, mask_position: int,
             candidates: Optional[Sequence[Tokens]], k: int) -> list[Fill]: ...

    @abc.abstractmethod
    def embed(self, tokens: Sequence[str]) -> np.ndarray: ...


@dataclass
class BuiltinLm(ScorerBackend):
    """Add-k smoothed n-gram LM plus skip-gram token embeddings.

    The smoothing vocabulary is exactly the training vocabulary; out-of-
    vocabulary tokens score with a zero count numerator. Contexts are padded
    with BOS, and no end-of-sequence event is scored, so a sequence's score
    never exceeds any of its prefixes'.
    """

    order: int
    smoothing: float
    tokens: list[str]
    counts: dict[tuple[int, ...], dict[int, int]]
    context_totals: dict[tuple[int, ...], int]
    embeddings: np.ndarray
    unk_vector: np.ndarray
    name_index: tuple[Tokens, ...] = ()
    meta: dict = field(default_factory=dict)
    token_ids: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.order < 2:
            raise ValueError("order must be >= 2")
        if self.smoothing <= 0:
            raise ValueError("smoothing must be positive")
        self.token_ids = {t: i for i, t in enumerate(self.tokens)}
        if len(self.token_ids) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")

    # -- vocabulary ---------------------------------------------------------

    @property
    def vocab_size(self) -> int:
        return len(self.tokens)

    def token_id(self, token: str) -> int:
        return self.token_ids.get(token, UNK_ID)

    def ids(self, tokens: Sequence[str]) -> list[int]:
        return [self.token_id(t) for t in tokens]

    # -- n-gram scoring -----------------------------------------------------

    def conditional_prob(self, context: tuple[int, ...], token_id: int) -> float:
        by_token = self.counts.get(context)
        c = by_token.get(token_id, 0) if by_token else 0
        total = self.context_totals.get(context, 0)
        return (c + self.smoothing) / (total + self.smoothing * self.vocab_size)

    def conditional_log_prob(self, context: tuple[int, ...], token_id: int) -> float:
        return math.log(self.conditional_prob(context, token_id))

    def _contexts(self, ids: Sequence[int]):
        pad = (BOS_ID,) * (self.order - 1)
        padded = pad + tuple(ids)
        for i, tok in enumerate(ids):
            yield padded[i : i + self.order - 1], tok

    def score(self, tokens: Sequence[str]) -> float:
        if not tokens:
            raise ValueError("cannot score an empty sequence")
        return sum(self.conditional_log_prob(ctx, tok) for ctx, tok in self._contexts(self.ids(tokens)))

    def fill(self, template: MaskedTemplate, mask_position: int,
             candidates: Optional[Sequence[Tokens]], k: int) -> list[Fill]:
        if candidates is None:
            candidates = list(self.name_index)
        return fill_candidates(self, template, mask_position, candidates, k)

    # -- embeddings ---------------------------------------------------------

    @property
    def embedding_dim(self) -> int:
        return int(self.embeddings.shape[1])

    @property
    def capabilities(self) -> frozenset[str]:
        return frozenset({"score", "fill", "embed"})

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        if not tokens:
            raise ValueError("cannot embed an empty sequence")
        rows = [self.embeddings[i] if i >= 0 else self.unk_vector for i in self.ids(tokens)]
        return np.mean(rows, axis=0)

    # -- serialization (shared with the remote scorer service) --------------

    def to_json(self) -> dict:
        ctx_items = sorted(self.counts.items())
        return {
            "format": "hinfill-lm-v1",
            "order": self.order,
            "smoothing": self.smoothing,
            "dim": self.embedding_dim,
            "tokens": list(self.tokens),
            "counts": [
                [list(ctx), sorted((t, c) for t, c in by_token.items())]
                for ctx, by_token in ctx_items
            ],
            "embeddings": self.embeddings.tolist(),
            "unk_vector": self.unk_vector.tolist(),
            "name_index": [list(n) for n in self.name_index],
            "meta": self.meta,
        }

    @staticmethod
    def from_json(obj: dict) -> "BuiltinLm":
        if obj.get("format") != "hinfill-lm-v1":
            raise ValueError(f"unsupported model format {obj.get('format')!r}")
        counts: dict[tuple[int, ...], dict[int, int]] = {}
        totals: dict[tuple[int, ...], int] = {}
        for ctx, items in obj["counts"]:
            key = tuple(ctx)
            counts[key] = {int(t): int(c) for t, c in items}
            totals[key] = sum(counts[key].values())
        return BuiltinLm(
            order=int(obj["order"]),
            smoothing=float(obj["smoothing"]),
            tokens=list(obj["tokens"]),
            counts=counts,
            context_totals=totals,
            embeddings=np.asarray(obj["embeddings"], dtype=float),
            unk_vector=np.asarray(obj["unk_vector"], dtype=float),
            name_index=tuple(tuple(n) for n in obj["name_index"]),
            meta=obj.get("meta", {}),
        )

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, separators=(",", ":"), sort_keys=True)

    @staticmethod
    def load(path: str) -> "BuiltinLm":
        with open(path, "r", encoding="utf-8") as f:
            return BuiltinLm.from_json(json.load(f))


def _count_ngrams(sentences: Sequence[Tokens], token_ids: dict[str, int], order: int):
    counts: dict[tuple[int, ...], dict[int, int]] = {}
    totals: dict[tuple[int, ...], int] = {}
    for sent in sentences:
        ids = [token_ids[t] for t in sent]
        padded = (BOS_ID,) * (order - 1) + tuple(ids)
        for i, tok in enumerate(ids):
            ctx = padded[i : i + order - 1]
            counts.setdefault(ctx, {})
            counts[ctx][tok] = counts[ctx].get(tok, 0) + 1
            totals[ctx] = totals.get(ctx, 0) + 1
    return counts, totals


def lm_from_sentences(
    sentences: Sequence[Tokens],
    order: int = 2,
    smoothing: float = 1.0,
    dim: int = 8,
    seed: int = 0,
    extra_vocab: Sequence[str] = (),
    name_index: Sequence[Tokens] = (),
    embed_epochs: int = 0,
    embed_window: int = 2,
    embed_negatives: int = 5,
    embed_lr: float = 0.05,
) -> BuiltinLm:
    """Build a BuiltinLm from raw sentences (vocabulary = corpus + extras)."""
    if not sentences:
        raise ValueError("empty corpus")
    tokens: list[str] = []
    token_ids: dict[str, int] = {}
    for sent in sentences:
        for t in sent:
            if t not in token_ids:
                token_ids[t] = len(tokens)
                tokens.append(t)
    for t in extra_vocab:
        if t not in token_ids:
            token_ids[t] = len(tokens)
            tokens.append(t)
    counts, totals = _count_ngrams(sentences, token_ids, order)
    rng = np.random.default_rng(seed)
    table = sgns.init_table(len(tokens), dim, rng)
    if embed_epochs > 0:
        table = sgns.train(
            [[token_ids[t] for t in s] for s in sentences],
            n_rows=len(tokens), dim=dim, window=embed_window,
            negatives=embed_negatives, lr=embed_lr, epochs=embed_epochs,
            seed=seed, table=table,
        )
    unk = table.mean(axis=0)
    return BuiltinLm(
        order=order, smoothing=smoothing, tokens=tokens,
        counts=counts, context_totals=totals,
        embeddings=table, unk_vector=unk,
        name_index=tuple(sorted(set(map(tuple, name_index)))),
        meta={"seed": seed, "sentences": len(sentences)},
    )


def build_lm_corpus(hin: Hin) -> list[Tokens]:
    """All four templates per edge with the target substituted: 4|E| sentences."""
    corpus: list[Tokens] = []
    for edge in hin.edges:
        for template_id in (1, 2, 3, 4):
            t = verbalize_edge(hin, edge, template_id)
            corpus.append(t.substitute(0, t.target).filled())
    return corpus


def train_builtin_lm(
    hin: Hin,
    order: int = 3,
    smoothing: float = 0.1,
    dim: int = 64,
    epochs: int = 5,
    seed: int = 0,
    window: int = 2,
    negatives: int = 5,
    lr: float = 0.05,
) -> BuiltinLm:
    """Train the built-in LM on the verbalized edge corpus of a graph."""
    corpus = build_lm_corpus(hin)
    lm = lm_from_sentences(
        corpus,
        order=order,
        smoothing=smoothing,
        dim=dim,
        seed=seed,
        extra_vocab=TEMPLATE_LITERALS,
        name_index=[n.name for n in hin.nodes],
        embed_epochs=epochs,
        embed_window=window,
        embed_negatives=negatives,
        embed_lr=lr,
    )
    lm.meta.update({"order": order, "epochs": epochs, "corpus_sentences": len(corpus)})
    return lm


def score(backend: ScorerBackend, tokens: Sequence[str]) -> float:
    return backend.score(tokens)


def embed(backend: ScorerBackend, tokens: Sequence[str]) -> np.ndarray:
    return backend.embed(tokens)


def fill_candidates(
    backend: ScorerBackend,
    template: MaskedTemplate,
    mask_position: int,
    candidates: Sequence[Tokens],
    k: int,
    rescore_full: bool = False,
) -> list[Fill]:
    """Rank candidate fills for one mask by substitute-and-score.

    Default scoring is greedy left context only: score(prefix + candidate).
    With rescore_full, the whole sentence is scored with the candidate in
    place and any remaining mask tokens dropped. Ties break lexicographically.
    """
    if not candidates:
        raise ValueError("candidate set must be non-empty")
    if not (0 <= mask_position < len(template.masks)):
        raise ValueError(f"mask position {mask_position} out of range")
    prefix = template.prefix_before(mask_position)
    scored: list[Fill] = []
    for cand in candidates:
        cand = tuple(cand)
        if rescore_full:
            full = template.substitute(mask_position, cand)
            seq = tuple(t for t in full.tokens if t != MASK)
        else:
            seq = prefix + cand
        scored.append(Fill(cand, backend.score(seq)))
    scored.sort(key=lambda f: (-f.log_score, f.tokens))
    return scored[: min(k, len(scored))]

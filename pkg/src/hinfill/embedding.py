"""Meta-path-guided random walks and skip-gram node embeddings."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import sgns
from .graph import Hin, MetaPath
from .induction import RankedMetaPaths

EMB_MAGIC = b"HINEMB01"


def cycled_metapath(mp: MetaPath, n_transitions: int) -> MetaPath:
    """The pattern a walk of n transitions is checked against: the meta-path
    repeated from index 1 after each full traversal, truncated to length."""
    if n_transitions < 1:
        raise ValueError("need at least one transition")
    node_types = [mp.node_types[0]]
    edge_types = []
    for i in range(n_transitions):
        j = i % mp.hops
        edge_types.append(mp.edge_types[j])
        node_types.append(mp.node_types[j + 1])
    return MetaPath(tuple(node_types), tuple(edge_types))


@dataclass(frozen=True)
class WalkRecord:
    nodes: tuple[int, ...]
    edge_types: tuple[int, ...]
    metapath_index: int


def metapath_walks_detailed(
    hin: Hin,
    metapaths: Sequence[MetaPath],
    walk_length: int,
    walks_per_node: int,
    seed: int = 0,
) -> list[WalkRecord]:
    """Walks with their traversed edge types and generating meta-path index.

    From every node whose type matches a meta-path's first node type, follow a
    uniformly random out-neighbor matching the pattern's next (edge type, node
    type), cycling the pattern, stopping after walk_length transitions or at a
    dead end.
    """
    if walk_length < 1:
        raise ValueError("walk_length must be >= 1")
    if not metapaths:
        raise ValueError("no meta-paths to guide walks")
    records: list[WalkRecord] = []
    for mp_idx, mp in enumerate(metapaths):
        starts = sorted(hin.nodes_by_type.get(mp.node_types[0], []))
        for node in starts:
            for w in range(walks_per_node):
                rng = np.random.default_rng([seed, mp_idx, node, w])
                walk = [node]
                traversed: list[int] = []
                cur = node
                for step in range(walk_length):
                    j = step % mp.hops
                    want_e = mp.edge_types[j]
                    want_t = mp.node_types[j + 1]
                    nbrs = sorted(
                        dst for et, dst in hin.out_adj[cur]
                        if et == want_e and hin.node_type(dst) == want_t
                    )
                    if not nbrs:
                        break
                    cur = nbrs[int(rng.integers(len(nbrs)))]
                    walk.append(cur)
                    traversed.append(want_e)
                records.append(WalkRecord(tuple(walk), tuple(traversed), mp_idx))
    return records


def metapath_walks(
    hin: Hin,
    metapaths: RankedMetaPaths | Sequence[MetaPath],
    walk_length: int,
    walks_per_node: int,
    seed: int = 0,
) -> list[list[int]]:
    """Node-id walk sequences guided by the on-schema meta-paths."""
    if isinstance(metapaths, RankedMetaPaths):
        mps = metapaths.on_schema()
    else:
        mps = list(metapaths)
    if not mps:
        raise ValueError("no on-schema meta-paths to guide walks")
    return [list(r.nodes) for r in metapath_walks_detailed(hin, mps, walk_length, walks_per_node, seed)]


@dataclass
class EmbeddingTable:
    """node id -> dense vector, plus how the table was trained."""

    dim: int
    ids: tuple[int, ...]
    matrix: np.ndarray
    training_meta: dict = field(default_factory=dict)
    rows: dict[int, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.rows = {nid: i for i, nid in enumerate(self.ids)}
        if self.matrix.shape != (len(self.ids), self.dim):
            raise ValueError("matrix shape does not match ids/dim")
        if not np.isfinite(self.matrix).all():
            raise ValueError("embedding table contains non-finite entries")

    def __contains__(self, node_id: int) -> bool:
        return node_id in self.rows

    def vector(self, node_id: int) -> np.ndarray:
        if node_id not in self.rows:
            raise KeyError(f"node {node_id} not in embedding table")
        return self.matrix[self.rows[node_id]]

    def save_text(self, path: str) -> None:
        """`node_id<TAB>v1 v2 ...` rows plus a JSON sidecar of training meta."""
        with open(path, "w", encoding="utf-8") as f:
            for nid in self.ids:
                vec = " ".join(repr(float(x)) for x in self.vector(nid))
                f.write(f"{nid}\t{vec}\n")
        with open(path + ".meta.json", "w", encoding="utf-8") as f:
            json.dump({"dim": self.dim, "count": len(self.ids), "training_meta": self.training_meta},
                      f, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def load_text(path: str) -> "EmbeddingTable":
        ids, vecs = [], []
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                if not line.strip():
                    continue
                nid, vec = line.rstrip("\n").split("\t")
                ids.append(int(nid))
                vecs.append([float(x) for x in vec.split()])
        meta = {}
        try:
            with open(path + ".meta.json", "r", encoding="utf-8") as f:
                meta = json.load(f).get("training_meta", {})
        except FileNotFoundError:
            pass
        matrix = np.asarray(vecs, dtype=float)
        return EmbeddingTable(dim=matrix.shape[1], ids=tuple(ids), matrix=matrix, training_meta=meta)

    def save_binary(self, path: str) -> None:
        """Magic, count, dim, int64 ids, then the float64 matrix, little-endian."""
        with open(path, "wb") as f:
            f.write(EMB_MAGIC)
            f.write(struct.pack("<II", len(self.ids), self.dim))
            f.write(np.asarray(self.ids, dtype="<i8").tobytes())
            f.write(np.ascontiguousarray(self.matrix, dtype="<f8").tobytes())

    @staticmethod
    def load_binary(path: str) -> "EmbeddingTable":
        with open(path, "rb") as f:
            magic = f.read(8)
            if magic != EMB_MAGIC:
                raise ValueError(f"not an embedding file (magic {magic!r})")
            count, dim = struct.unpack("<II", f.read(8))
            ids = np.frombuffer(f.read(8 * count), dtype="<i8")
            matrix = np.frombuffer(f.read(8 * count * dim), dtype="<f8").reshape(count, dim)
        return EmbeddingTable(dim=dim, ids=tuple(int(i) for i in ids), matrix=matrix.astype(float))


def random_table(node_ids: Sequence[int], dim: int, seed: int = 0) -> EmbeddingTable:
    """Initialization-only table (the untrained baseline)."""
    ids = tuple(sorted(node_ids))
    rng = np.random.default_rng(seed)
    return EmbeddingTable(dim=dim, ids=ids, matrix=sgns.init_table(len(ids), dim, rng),
                          training_meta={"trained": False, "seed": seed})


def train_skipgram(
    walks: Sequence[Sequence[int]],
    dim: int = 128,
    window: int = 2,
    negatives: int = 5,
    lr: float = 0.001,
    epochs: int = 5,
    seed: int = 0,
    node_ids: Optional[Sequence[int]] = None,
) -> EmbeddingTable:
    """Skip-gram with negative sampling over node-id walks.

    node_ids fixes the table universe (all graph nodes in pipeline use);
    nodes never visited by any walk keep their initialization and are listed
    in training_meta["unvisited"].
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    walks = [list(w) for w in walks if w]
    if not walks:
        raise ValueError("empty walk corpus")
    visited = {n for w in walks for n in w}
    ids = tuple(sorted(node_ids)) if node_ids is not None else tuple(sorted(visited))
    missing = visited - set(ids)
    if missing:
        raise ValueError(f"walks mention nodes outside the table universe: {sorted(missing)[:5]}")
    row_of = {nid: i for i, nid in enumerate(ids)}
    sequences = [[row_of[n] for n in w] for w in walks]
    rng = np.random.default_rng(seed)
    table = sgns.init_table(len(ids), dim, rng)
    table = sgns.train(sequences, n_rows=len(ids), dim=dim, window=window,
                       negatives=negatives, lr=lr, epochs=epochs, seed=seed, table=table)
    unvisited = sorted(set(ids) - visited)
    meta = {
        "walks": len(walks), "walk_nodes": len(visited),
        "window": window, "negatives": negatives, "lr": lr,
        "epochs": epochs, "seed": seed, "unvisited": unvisited,
    }
    return EmbeddingTable(dim=dim, ids=ids, matrix=table, training_meta=meta)

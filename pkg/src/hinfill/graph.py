"""Typed graph core: loading, validation, schema derivation, path matching.

Nodes carry a textual name and a node type; edges carry an edge type. Names
and type names are interned into a shared whitespace/lower-case token space
that the language model and classifier reuse.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO, Union

logger = logging.getLogger(__name__)

Tokens = tuple[str, ...]


class LoadError(ValueError):
    """A nodes/edges file violates the expected tab-separated format."""


def tokenize(text: str) -> Tokens:
    """Whitespace-split and lower-case a name into the shared token space."""
    return tuple(text.lower().split())


@dataclass(frozen=True)
class Node:
    node_id: int
    name: Tokens
    type_id: int
    raw_name: str


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    etype: int


@dataclass
class Hin:
    """An immutable heterogeneous information network plus derived indexes."""

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    node_type_names: tuple[Tokens, ...]
    edge_type_names: tuple[Tokens, ...]
    node_type_raw: tuple[str, ...]
    edge_type_raw: tuple[str, ...]
    by_id: dict[int, Node] = field(repr=False, default_factory=dict)
    out_adj: dict[int, list[tuple[int, int]]] = field(repr=False, default_factory=dict)
    in_adj: dict[int, list[tuple[int, int]]] = field(repr=False, default_factory=dict)
    name_to_ids: dict[Tokens, list[int]] = field(repr=False, default_factory=dict)
    nodes_by_type: dict[int, list[int]] = field(repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        self.by_id = {n.node_id: n for n in self.nodes}
        self.out_adj = {n.node_id: [] for n in self.nodes}
        self.in_adj = {n.node_id: [] for n in self.nodes}
        for e in self.edges:
            self.out_adj[e.src].append((e.etype, e.dst))
            self.in_adj[e.dst].append((e.etype, e.src))
        self.name_to_ids = {}
        self.nodes_by_type = {}
        for n in self.nodes:
            self.name_to_ids.setdefault(n.name, []).append(n.node_id)
            self.nodes_by_type.setdefault(n.type_id, []).append(n.node_id)
        self.validate()

    @property
    def num_node_types(self) -> int:
        return len(self.node_type_names)

    @property
    def num_edge_types(self) -> int:
        return len(self.edge_type_names)

    def node_type(self, node_id: int) -> int:
        return self.by_id[node_id].type_id

    def node_name(self, node_id: int) -> Tokens:
        return self.by_id[node_id].name

    def all_names(self) -> list[Tokens]:
        """Distinct node names, sorted (the fill candidate universe)."""
        return sorted(self.name_to_ids)

    def validate(self) -> None:
        if len(self.by_id) != len(self.nodes):
            raise LoadError("duplicate node ids")
        for n in self.nodes:
            if not n.name:
                raise LoadError(f"node {n.node_id} has an empty name")
            if not (0 <= n.type_id < len(self.node_type_names)):
                raise LoadError(f"node {n.node_id} has unknown type id {n.type_id}")
        for t in self.node_type_names:
            if not t:
                raise LoadError("empty node type name")
        for t in self.edge_type_names:
            if not t:
                raise LoadError("empty edge type name")
        for e in self.edges:
            if e.src not in self.by_id or e.dst not in self.by_id:
                raise LoadError(f"edge ({e.src}, {e.dst}) references an unknown node")
            if not (0 <= e.etype < len(self.edge_type_names)):
                raise LoadError(f"edge ({e.src}, {e.dst}) has unknown edge type {e.etype}")
        # adjacency must mirror the edge list exactly
        n_out = sum(len(v) for v in self.out_adj.values())
        n_in = sum(len(v) for v in self.in_adj.values())
        if n_out != len(self.edges) or n_in != len(self.edges):
            raise LoadError("adjacency inconsistent with edge list")


@dataclass(frozen=True)
class Schema:
    """The (source type, edge type, target type) triples observed in a graph."""

    triples: frozenset[tuple[int, int, int]]

    def __contains__(self, triple: tuple[int, int, int]) -> bool:
        return triple in self.triples

    def etypes_from(self, src_type: int) -> list[int]:
        return sorted({e for s, e, _ in self.triples if s == src_type})

    def etypes_to(self, dst_type: int) -> list[int]:
        return sorted({e for _, e, d in self.triples if d == dst_type})

    def etypes_between(self, src_type: int, dst_type: int) -> list[int]:
        return sorted({e for s, e, d in self.triples if s == src_type and d == dst_type})


@dataclass(frozen=True)
class MetaPath:
    """Alternating node-type / edge-type pattern: l+1 node types, l edge types."""

    node_types: tuple[int, ...]
    edge_types: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.node_types) != len(self.edge_types) + 1:
            raise ValueError(
                f"need len(node_types) == len(edge_types) + 1, "
                f"got {len(self.node_types)} and {len(self.edge_types)}"
            )
        if len(self.edge_types) < 1:
            raise ValueError("a meta-path has at least one edge type")

    @property
    def hops(self) -> int:
        return len(self.edge_types)

    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return (self.node_types, self.edge_types)

    def triples(self) -> list[tuple[int, int, int]]:
        return [
            (self.node_types[i], self.edge_types[i], self.node_types[i + 1])
            for i in range(self.hops)
        ]

    def is_valid(self, schema: Schema) -> bool:
        return all(t in schema for t in self.triples())


def _rows(source: Union[str, TextIO], what: str) -> Iterable[tuple[int, list[str]]]:
    if isinstance(source, str):
        handle: TextIO = open(source, "r", encoding="utf-8")
        close = True
    else:
        handle, close = source, False
    try:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.rstrip("\n").rstrip("\r")
            if not stripped.strip() or stripped.lstrip().startswith("#"):
                continue
            yield lineno, stripped.split("\t")
    finally:
        if close:
            handle.close()


def load_hin(nodes_source: Union[str, TextIO], edges_source: Union[str, TextIO]) -> Hin:
    """Load a graph from tab-separated node and edge streams.

    Nodes: ``id<TAB>name<TAB>type_name``. Edges: ``src_id<TAB>dst_id<TAB>edge_type_name``.
    Lines starting with ``#`` are comments. Exact duplicate edges are dropped
    with a warning; any other malformed content raises LoadError naming the line.
    """
    node_type_ids: dict[str, int] = {}
    node_type_raw: list[str] = []
    nodes: list[Node] = []
    seen_ids: set[int] = set()
    for lineno, cols in _rows(nodes_source, "nodes"):
        if len(cols) != 3:
            raise LoadError(f"nodes line {lineno}: expected 3 tab-separated columns, got {len(cols)}")
        raw_id, raw_name, raw_type = (c.strip() for c in cols)
        try:
            node_id = int(raw_id)
        except ValueError:
            raise LoadError(f"nodes line {lineno}: node id {raw_id!r} is not an integer") from None
        if node_id in seen_ids:
            raise LoadError(f"nodes line {lineno}: duplicate node id {node_id}")
        if not raw_name:
            raise LoadError(f"nodes line {lineno}: empty name field")
        if not raw_type:
            raise LoadError(f"nodes line {lineno}: empty type name field")
        if raw_type not in node_type_ids:
            node_type_ids[raw_type] = len(node_type_raw)
            node_type_raw.append(raw_type)
        seen_ids.add(node_id)
        nodes.append(Node(node_id, tokenize(raw_name), node_type_ids[raw_type], raw_name))

    edge_type_ids: dict[str, int] = {}
    edge_type_raw: list[str] = []
    edges: list[Edge] = []
    seen_edges: set[tuple[int, int, int]] = set()
    duplicates = 0
    for lineno, cols in _rows(edges_source, "edges"):
        if len(cols) != 3:
            raise LoadError(f"edges line {lineno}: expected 3 tab-separated columns, got {len(cols)}")
        raw_src, raw_dst, raw_type = (c.strip() for c in cols)
        try:
            src, dst = int(raw_src), int(raw_dst)
        except ValueError:
            raise LoadError(f"edges line {lineno}: endpoint ids must be integers") from None
        if src not in seen_ids:
            raise LoadError(f"edges line {lineno}: unknown source node {src}")
        if dst not in seen_ids:
            raise LoadError(f"edges line {lineno}: unknown target node {dst}")
        if not raw_type:
            raise LoadError(f"edges line {lineno}: empty edge type name field")
        if raw_type not in edge_type_ids:
            edge_type_ids[raw_type] = len(edge_type_raw)
            edge_type_raw.append(raw_type)
        key = (src, dst, edge_type_ids[raw_type])
        if key in seen_edges:
            duplicates += 1
            continue
        seen_edges.add(key)
        edges.append(Edge(src, dst, edge_type_ids[raw_type]))
    if duplicates:
        logger.warning("dropped %d exact duplicate edges", duplicates)

    hin = Hin(
        nodes=tuple(nodes),
        edges=tuple(edges),
        node_type_names=tuple(tokenize(t) for t in node_type_raw),
        edge_type_names=tuple(tokenize(t) for t in edge_type_raw),
        node_type_raw=tuple(node_type_raw),
        edge_type_raw=tuple(edge_type_raw),
    )
    logger.info(
        "loaded graph: %d nodes, %d edges, %d node types, %d edge types",
        len(hin.nodes), len(hin.edges), hin.num_node_types, hin.num_edge_types,
    )
    return hin


def load_hin_from_strings(nodes_text: str, edges_text: str) -> Hin:
    return load_hin(io.StringIO(nodes_text), io.StringIO(edges_text))


def derive_schema(hin: Hin) -> Schema:
    """Collect the type-level triple of every edge."""
    return Schema(frozenset(
        (hin.node_type(e.src), e.etype, hin.node_type(e.dst)) for e in hin.edges
    ))


def without_edges(hin: Hin, drop: set[tuple[int, int, int]]) -> Hin:
    """A copy of the graph minus the (src, dst, edge type) triples in drop.

    Used to hold test-split edges out of walk generation.
    """
    kept = tuple(e for e in hin.edges if (e.src, e.dst, e.etype) not in drop)
    return Hin(
        nodes=hin.nodes,
        edges=kept,
        node_type_names=hin.node_type_names,
        edge_type_names=hin.edge_type_names,
        node_type_raw=hin.node_type_raw,
        edge_type_raw=hin.edge_type_raw,
    )


def path_matches(hin: Hin, path: Sequence[int], metapath: MetaPath) -> bool:
    """True iff the node/edge-type sequence of ``path`` equals the meta-path.

    ``path`` alternates node ids and edge-type ids, starting and ending with a
    node id. A length mismatch returns False rather than raising.
    """
    if len(path) < 3 or len(path) % 2 == 0:
        raise ValueError("path must alternate node, edge type, node, ...")
    node_ids = path[0::2]
    etype_ids = path[1::2]
    for v in node_ids:
        if v not in hin.by_id:
            raise ValueError(f"unknown node id {v} in path")
    for e in etype_ids:
        if not (0 <= e < hin.num_edge_types):
            raise ValueError(f"unknown edge type id {e} in path")
    if len(node_ids) != len(metapath.node_types) or len(etype_ids) != len(metapath.edge_types):
        return False
    if any(hin.node_type(v) != t for v, t in zip(node_ids, metapath.node_types)):
        return False
    return all(e == r for e, r in zip(etype_ids, metapath.edge_types))

"""Aggregate sampled typed paths into frequency-ranked meta-paths."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .graph import Hin, MetaPath, Schema
from .sampler import TypedPath


def path_to_metapath(path: TypedPath) -> MetaPath:
    """Project a typed path onto its node-type / edge-type pattern."""
    return MetaPath(node_types=path.assigned_types, edge_types=path.edge_types)


def metapath_counts(paths: Sequence[TypedPath]) -> Counter:
    """Frequency of each meta-path over the whole collection (no truncation)."""
    return Counter(path_to_metapath(p) for p in paths)


@dataclass(frozen=True)
class RankedEntry:
    metapath: MetaPath
    count: int
    examples: tuple[TypedPath, ...]
    off_schema: bool = False


@dataclass
class RankedMetaPaths:
    entries: list[RankedEntry]
    q: int

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if len(self.entries) > self.q:
            raise ValueError("more entries than q")
        counts = [e.count for e in self.entries]
        if counts != sorted(counts, reverse=True):
            raise ValueError("entries must be sorted by non-increasing count")

    def metapaths(self) -> list[MetaPath]:
        return [e.metapath for e in self.entries]

    def on_schema(self) -> list[MetaPath]:
        return [e.metapath for e in self.entries if not e.off_schema]

    def to_json(self, hin: Hin) -> dict:
        return {
            "q": self.q,
            "metapaths": [
                {
                    "node_types": [hin.node_type_raw[t] for t in e.metapath.node_types],
                    "node_type_ids": list(e.metapath.node_types),
                    "edge_types": [hin.edge_type_raw[t] for t in e.metapath.edge_types],
                    "edge_type_ids": list(e.metapath.edge_types),
                    "count": e.count,
                    "off_schema": e.off_schema,
                    "examples": [p.to_json(hin) for p in e.examples],
                }
                for e in self.entries
            ],
        }

    @staticmethod
    def from_json(obj: dict) -> "RankedMetaPaths":
        entries = [
            RankedEntry(
                metapath=MetaPath(tuple(m["node_type_ids"]), tuple(m["edge_type_ids"])),
                count=int(m["count"]),
                examples=tuple(TypedPath.from_json(p) for p in m["examples"]),
                off_schema=bool(m["off_schema"]),
            )
            for m in obj["metapaths"]
        ]
        return RankedMetaPaths(entries=entries, q=int(obj["q"]))

    def save(self, hin: Hin, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(hin), f, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def load(path: str) -> "RankedMetaPaths":
        with open(path, "r", encoding="utf-8") as f:
            return RankedMetaPaths.from_json(json.load(f))


def induce(paths: Sequence[TypedPath], q: int, schema: Optional[Schema] = None) -> RankedMetaPaths:
    """Group paths by meta-path, rank by count (desc) with lexicographic
    tie-break on the type sequences, and keep the top q.

    Up to 3 example paths are retained per meta-path, chosen by their
    serialized order so the result is independent of input ordering.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    counts = metapath_counts(paths)
    groups: dict[MetaPath, list[TypedPath]] = {}
    for p in paths:
        groups.setdefault(path_to_metapath(p), []).append(p)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0].key()))
    entries = []
    for mp, count in ranked[:q]:
        examples = tuple(sorted(set(groups[mp]), key=lambda p: (p.names, p.total_log_score))[:3])
        off = not mp.is_valid(schema) if schema is not None else False
        entries.append(RankedEntry(metapath=mp, count=count, examples=examples, off_schema=off))
    return RankedMetaPaths(entries=entries, q=q)

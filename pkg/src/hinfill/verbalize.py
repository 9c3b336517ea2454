"""Turn graph elements into the token templates used for LM training and infilling."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .graph import Edge, Hin, Tokens

MASK = "[MASK]"
SEP = "[SEP]"
CONNECTIVE = "It"
PERIOD = "."
RELATES_TO: Tokens = ("relates", "to")

# tokens the infill/context templates can introduce beyond graph names
TEMPLATE_LITERALS: Tokens = (CONNECTIVE, PERIOD, SEP)


@dataclass(frozen=True)
class Mask:
    kind: str      # "edge" | "node"
    index: int     # 1-based, per the template's own numbering
    position: int  # token offset in the template

    def __post_init__(self) -> None:
        if self.kind not in ("edge", "node"):
            raise ValueError(f"mask kind must be 'edge' or 'node', got {self.kind!r}")


@dataclass(frozen=True)
class MaskedTemplate:
    """A token sequence with mask slots, optionally paired with target tokens."""

    tokens: Tokens
    masks: tuple[Mask, ...]
    target: Optional[Tokens] = None

    def __post_init__(self) -> None:
        positions = [m.position for m in self.masks]
        if positions != sorted(positions) or len(set(positions)) != len(positions):
            raise ValueError("mask positions must be strictly increasing")
        for m in self.masks:
            if not (0 <= m.position < len(self.tokens)) or self.tokens[m.position] != MASK:
                raise ValueError(f"mask at position {m.position} does not sit on a {MASK} token")

    def prefix_before(self, mask_position: int) -> Tokens:
        """Tokens strictly left of the given mask (by index into ``masks``)."""
        mask = self.masks[mask_position]
        return self.tokens[: mask.position]

    def substitute(self, mask_position: int, fill: Tokens) -> "MaskedTemplate":
        """Replace one mask with concrete tokens, shifting later mask offsets."""
        if not fill:
            raise ValueError("cannot substitute an empty fill")
        mask = self.masks[mask_position]
        tokens = self.tokens[: mask.position] + tuple(fill) + self.tokens[mask.position + 1 :]
        shift = len(fill) - 1
        masks = tuple(
            m if m.position < mask.position else replace(m, position=m.position + shift)
            for m in self.masks
            if m.position != mask.position
        )
        return MaskedTemplate(tokens=tokens, masks=masks, target=self.target)

    def filled(self) -> Tokens:
        """The sentence once no masks remain."""
        if self.masks:
            raise ValueError("template still has unfilled masks")
        return self.tokens

    def to_json(self) -> dict:
        return {
            "tokens": list(self.tokens),
            "masks": [{"kind": m.kind, "index": m.index, "position": m.position} for m in self.masks],
            "target": list(self.target) if self.target is not None else None,
        }

    @staticmethod
    def from_json(obj: dict) -> "MaskedTemplate":
        return MaskedTemplate(
            tokens=tuple(obj["tokens"]),
            masks=tuple(Mask(m["kind"], m["index"], m["position"]) for m in obj["masks"]),
            target=tuple(obj["target"]) if obj.get("target") is not None else None,
        )


def verbalize_edge(hin: Hin, edge: Edge, template_id: int) -> MaskedTemplate:
    """One of the four training templates for an edge, with its target tokens.

    1: ``v_h relates to [MASK]`` -> v_t     2: ``[MASK] relates to v_t`` -> v_h
    3: ``v_h r [MASK]`` -> v_t              4: ``[MASK] r v_t`` -> v_h
    """
    v_h = hin.node_name(edge.src)
    v_t = hin.node_name(edge.dst)
    r = hin.edge_type_names[edge.etype]
    if template_id == 1:
        tokens = v_h + RELATES_TO + (MASK,)
        mask_pos, target = len(tokens) - 1, v_t
    elif template_id == 2:
        tokens = (MASK,) + RELATES_TO + v_t
        mask_pos, target = 0, v_h
    elif template_id == 3:
        tokens = v_h + r + (MASK,)
        mask_pos, target = len(tokens) - 1, v_t
    elif template_id == 4:
        tokens = (MASK,) + r + v_t
        mask_pos, target = 0, v_h
    else:
        raise ValueError(f"template id must be 1..4, got {template_id}")
    return MaskedTemplate(tokens=tokens, masks=(Mask("node", 1, mask_pos),), target=target)


def build_infill_template(v_h: Sequence[str], v_t: Sequence[str], l: int) -> MaskedTemplate:
    """The l-hop infilling prompt between two endpoint names.

    ``v_h [E1] [V1]. It [E2] [V2]. It ... [El] v_t`` with l edge masks and
    l-1 node masks. 1-hop paths never reach the infiller, so l must be >= 2.
    """
    if l < 2:
        raise ValueError(f"infill templates need l >= 2, got {l}")
    if not v_h or not v_t:
        raise ValueError("endpoint names must be non-empty")
    tokens: list[str] = list(v_h)
    masks: list[Mask] = []
    for i in range(1, l):
        if i > 1:
            tokens.append(CONNECTIVE)
        masks.append(Mask("edge", i, len(tokens)))
        tokens.append(MASK)
        masks.append(Mask("node", i, len(tokens)))
        tokens.append(MASK)
        tokens.append(PERIOD)
    tokens.append(CONNECTIVE)
    masks.append(Mask("edge", l, len(tokens)))
    tokens.append(MASK)
    tokens.extend(v_t)
    return MaskedTemplate(tokens=tuple(tokens), masks=tuple(masks))


def verbalize_context(v_j: Sequence[str], edge_type_name: Sequence[str], v_i: Sequence[str]) -> Tokens:
    """Context feature sentence ``v_j [SEP] a [SEP] v_i``."""
    if not v_j or not v_i:
        raise ValueError("node names must be non-empty")
    if not edge_type_name:
        raise ValueError("edge type name must be non-empty")
    return tuple(v_j) + (SEP,) + tuple(edge_type_name) + (SEP,) + tuple(v_i)

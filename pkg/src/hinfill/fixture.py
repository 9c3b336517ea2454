"""Synthetic graphs for tests and demos.

build_planted_fixture: ~36-node disease/drug/gene graph in which two 1-hop
patterns (disease treated-by drug, drug targets gene) dominate all other
patterns by an order of magnitude, with three rare decoy edge types. Shipped
in data/synthetic/ as TSV; `python -m hinfill.fixture <dir>` regenerates it.

build_lp_fixture: block-structured bipartite disease/drug graph for link
prediction separation experiments.

build_hypothesis_fixture: two path populations with opposite endpoint
connectivity, one funneled through tight chains, one fanned out, so sentence
likelihood tracks connectivity.
"""

from __future__ import annotations

import os
import sys

from .graph import Hin, load_hin_from_strings

DISEASES = [
    "iron fatigue", "marrow languor", "crimson ague", "glass fever", "silver pox",
    "hollow chill", "ember gout", "velvet palsy", "stone cough", "mist grippe",
]
TB_DRUGS = ["zorvexil", "quandrol", "percitan", "molvurin"]
TG_DRUGS = ["xaladine", "rubetol", "senovir", "tralupax"]
GENES = ["krxa", "bmob", "tavlc", "werpd", "lishe", "dentrof", "covalg", "murexh", "pilari", "quonj"]
SIM_DISEASES = ["ashen drift", "pallid drift"]
CAUSED_DISEASES = ["night tremor", "day tremor"]
ASSOC_DISEASES = ["umber blight", "sable blight"]
ASSOC_GENES = ["zeta marker", "theta marker"]


def planted_fixture_rows() -> tuple[list[tuple[int, str, str]], list[tuple[int, int, str]], dict[int, int]]:
    """(nodes, edges, labels) for the bundled planted-pattern graph."""
    nodes: list[tuple[int, str, str]] = []
    nid = 0

    def add(name: str, type_name: str) -> int:
        nonlocal nid
        nodes.append((nid, name, type_name))
        nid += 1
        return nid - 1

    d_ids = [add(n, "disease") for n in DISEASES]
    tb_ids = [add(n, "drug") for n in TB_DRUGS]
    tg_ids = [add(n, "drug") for n in TG_DRUGS]
    g_ids = [add(n, "gene") for n in GENES]
    sim_ids = [add(n, "disease") for n in SIM_DISEASES]
    caused_ids = [add(n, "disease") for n in CAUSED_DISEASES]
    assoc_d_ids = [add(n, "disease") for n in ASSOC_DISEASES]
    assoc_g_ids = [add(n, "gene") for n in ASSOC_GENES]

    edges: list[tuple[int, int, str]] = []
    # planted pattern 1: every core disease is treated by two community drugs
    for i, d in enumerate(d_ids):
        drugs = tb_ids[:2] if i < 5 else tb_ids[2:]
        for r in drugs:
            edges.append((d, r, "treated by"))
    # planted pattern 2: the other drug family targets community genes
    for j, r in enumerate(tg_ids):
        genes = g_ids[:5] if j < 2 else g_ids[5:]
        for g in genes:
            edges.append((r, g, "targets"))
    # rare decoys, each confined to dedicated nodes
    edges.append((sim_ids[0], sim_ids[1], "similar to"))
    edges.append((sim_ids[1], sim_ids[0], "similar to"))
    edges.append((caused_ids[0], caused_ids[1], "caused by"))
    edges.append((caused_ids[1], caused_ids[0], "caused by"))
    edges.append((assoc_d_ids[0], assoc_g_ids[0], "associated with"))
    edges.append((assoc_d_ids[1], assoc_g_ids[1], "associated with"))

    labels = {d: (0 if i < 5 else 1) for i, d in enumerate(d_ids)}
    labels.update({g: (0 if i < 5 else 1) for i, g in enumerate(g_ids)})
    return nodes, edges, labels


def rows_to_tsv(nodes, edges, labels=None) -> tuple[str, str, str]:
    nodes_tsv = "# id\tname\ttype_name\n" + "".join(
        f"{i}\t{name}\t{t}\n" for i, name, t in nodes
    )
    edges_tsv = "# src_id\tdst_id\tedge_type_name\n" + "".join(
        f"{s}\t{d}\t{t}\n" for s, d, t in edges
    )
    labels_tsv = ""
    if labels is not None:
        labels_tsv = "# node_id\tclass_id\n" + "".join(
            f"{n}\t{c}\n" for n, c in sorted(labels.items())
        )
    return nodes_tsv, edges_tsv, labels_tsv


def build_planted_fixture() -> tuple[Hin, dict[int, int]]:
    nodes, edges, labels = planted_fixture_rows()
    nodes_tsv, edges_tsv, _ = rows_to_tsv(nodes, edges)
    return load_hin_from_strings(nodes_tsv, edges_tsv), labels


def write_planted_fixture(out_dir: str) -> None:
    nodes, edges, labels = planted_fixture_rows()
    nodes_tsv, edges_tsv, labels_tsv = rows_to_tsv(nodes, edges, labels)
    os.makedirs(out_dir, exist_ok=True)
    for fname, text in (("nodes.tsv", nodes_tsv), ("edges.tsv", edges_tsv), ("labels.tsv", labels_tsv)):
        with open(os.path.join(out_dir, fname), "w", encoding="utf-8") as f:
            f.write(text)


def build_lp_fixture(blocks: int = 12, diseases_per_block: int = 6,
                     drugs_per_block: int = 6) -> Hin:
    """Complete bipartite treated-by blocks; the planted target relation."""
    nodes: list[tuple[int, str, str]] = []
    edges: list[tuple[int, int, str]] = []
    nid = 0
    disease_ids: list[list[int]] = []
    drug_ids: list[list[int]] = []
    for b in range(blocks):
        ds = []
        for i in range(diseases_per_block):
            nodes.append((nid, f"malady{b}x{i}", "disease"))
            ds.append(nid)
            nid += 1
        disease_ids.append(ds)
    for b in range(blocks):
        rs = []
        for i in range(drugs_per_block):
            nodes.append((nid, f"remedy{b}x{i}", "drug"))
            rs.append(nid)
            nid += 1
        drug_ids.append(rs)
    for b in range(blocks):
        for d in disease_ids[b]:
            for r in drug_ids[b]:
                edges.append((d, r, "treated by"))
    nodes_tsv, edges_tsv, _ = rows_to_tsv(nodes, edges)
    return load_hin_from_strings(nodes_tsv, edges_tsv)


def build_hypothesis_fixture(units: int = 8, decoy_heads: int = 8,
                             precursors: int = 4, spores: int = 8,
                             emits_per_precursor: int = 6) -> Hin:
    """Two 2-hop path populations with opposite endpoint connectivity.

    Tight chains: dawnroot -treats-> elixir -hits-> one of two shared genes,
    with a marks edge closing the triangle (connectivity 1). Fanned decoys:
    duskroot -stems-> precursors -emits-> many spores, no closure
    (connectivity 0). The funneling concentrates sentence probability on the
    connected population.
    """
    nodes: list[tuple[int, str, str]] = []
    edges: list[tuple[int, int, str]] = []
    nid = 0

    def add(name: str, type_name: str) -> int:
        nonlocal nid
        nodes.append((nid, name, type_name))
        nid += 1
        return nid - 1

    dw = [add(f"dawnroot{i}", "disease") for i in range(units)]
    rx = [add(f"elixir{i}", "drug") for i in range(units)]
    genes = [add("genalpha", "gene"), add("genbeta", "gene")]
    dl = [add(f"duskroot{i}", "disease") for i in range(decoy_heads)]
    pre = [add(f"seedling{j}", "drug") for j in range(precursors)]
    ends = [add(f"spore{j}", "gene") for j in range(spores)]

    for i in range(units):
        g = genes[i % 2]
        edges.append((dw[i], rx[i], "treats"))
        edges.append((rx[i], g, "hits"))
        edges.append((dw[i], g, "marks"))
    for i in range(decoy_heads):
        edges.append((dl[i], pre[i % precursors], "stems"))
        edges.append((dl[i], pre[(i + 1) % precursors], "stems"))
    for j, p in enumerate(pre):
        for t in range(emits_per_precursor):
            edges.append((p, ends[(j + t) % spores], "emits"))

    nodes_tsv, edges_tsv, _ = rows_to_tsv(nodes, edges)
    return load_hin_from_strings(nodes_tsv, edges_tsv)


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "data/synthetic"
    write_planted_fixture(target)
    print(f"wrote nodes.tsv, edges.tsv, labels.tsv to {target}")

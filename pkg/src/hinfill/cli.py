"""Command-line orchestration of the pipeline.

Subcommands write their artifact plus a JSON run-manifest into the output
directory. Exit codes: 0 success, 1 usage error, 2 data error, 3 backend or
transport error; every failure prints one line `ERROR <code>: <message>`.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from typing import Optional

from . import __version__
from .classifier import ClassifierParams, train_classifier
from .config import ConfigError, PipelineConfig, apply_overrides, config_hash, load_config
from .embedding import EmbeddingTable, metapath_walks, train_skipgram
from .graph import Hin, LoadError, derive_schema, load_hin, tokenize, without_edges
from .induction import RankedMetaPaths, induce
from .lm import BackendError, BuiltinLm, ScorerBackend, TransportError, train_builtin_lm
from .remote import RemoteScorer
from .sampler import SamplerConfig, TaskData, read_paths_jsonl, run_sampling, write_paths_jsonl
from .tasks import (
    build_link_prediction_data,
    build_node_classification_data,
    eval_link_prediction,
    eval_node_classification,
    hypothesis_study,
    lp_roc_points,
    lp_scores_and_labels,
    train_nc_head,
    zero_shot_pairs,
)

REMOTE_URL_ENV = "HINFILL_REMOTE_URL"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract is exit 1
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="hinfill", description="Meta-path generation via text infilling")
    parser.add_argument("--version", action="version", version=f"hinfill {__version__}")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help="TOML config file (flags override its keys)")
        p.add_argument("--nodes-file", dest="nodes_file")
        p.add_argument("--edges-file", dest="edges_file")
        p.add_argument("--labels-file", dest="labels_file")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--backend", choices=["builtin", "remote"])
        p.add_argument("--remote-url", dest="remote_url")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--deterministic", action="store_const", const=True, default=None)
        return p

    for name, help_text in [
        ("train-lm", "train the built-in LM on the graph's verbalized edges"),
        ("train-classifier", "train the context-aware node type classifier"),
        ("sample-paths", "sample typed paths by text infilling"),
        ("induce", "aggregate sampled paths into ranked meta-paths"),
        ("embed", "meta-path-guided walks and skip-gram embeddings"),
        ("eval-lp", "link prediction evaluation (AUC / AP)"),
        ("eval-nc", "node classification evaluation (micro / macro F1)"),
        ("zero-shot", "zero-shot edge classification via pseudo pairs"),
        ("hypothesis", "path-likelihood vs similarity/connectivity study"),
        ("pipeline", "run every stage in order"),
    ]:
        common(sub.add_parser(name, help=help_text))

    subcommand_keys = {
        "train-lm": ["lm_order", "lm_smoothing", "lm_dim", "lm_epochs", "lm_lr"],
        "train-classifier": ["clf_lambda", "clf_lr", "clf_epochs", "clf_batch"],
        "sample-paths": ["hop_min", "hop_max", "repeats_per_pair", "temperature",
                         "top_k_fill", "subset_policy", "n_pairs", "max_retries",
                         "lp_target_edge_type", "lp_test_fraction"],
        "induce": ["q"],
        "embed": ["emb_dim", "walk_length", "walks_per_node", "emb_window",
                  "emb_negatives", "emb_lr", "emb_epochs",
                  "lp_target_edge_type", "lp_test_fraction"],
        "eval-lp": ["lp_target_edge_type", "lp_test_fraction"],
        "eval-nc": ["nc_test_fraction", "nc_lr", "nc_epochs"],
        "zero-shot": ["zero_shot_edge_type", "zero_shot_n", "zero_shot_temperature",
                      "q", "emb_dim", "walk_length", "walks_per_node", "emb_lr",
                      "emb_epochs", "hop_min", "hop_max", "repeats_per_pair",
                      "temperature", "n_pairs"],
        "hypothesis": ["hypothesis_paths"],
        "pipeline": ["lm_order", "lm_smoothing", "lm_dim", "lm_epochs", "lm_lr",
                     "clf_lambda", "clf_lr", "clf_epochs",
                     "hop_min", "hop_max", "repeats_per_pair", "temperature",
                     "top_k_fill", "subset_policy", "n_pairs", "max_retries", "q",
                     "emb_dim", "walk_length", "walks_per_node", "emb_window",
                     "emb_negatives", "emb_lr", "emb_epochs",
                     "lp_target_edge_type", "lp_test_fraction",
                     "nc_test_fraction", "nc_lr", "nc_epochs"],
    }
    for cmd, keys in subcommand_keys.items():
        p = sub.choices[cmd]
        for key in keys:
            flag = "--" + key.replace("_", "-")
            if key in ("subset_policy", "lp_target_edge_type", "zero_shot_edge_type"):
                p.add_argument(flag, dest=key)
            elif key in ("lm_smoothing", "lm_lr", "clf_lambda", "clf_lr", "temperature",
                         "emb_lr", "nc_lr", "lp_test_fraction", "nc_test_fraction",
                         "zero_shot_temperature"):
                p.add_argument(flag, dest=key, type=float)
            else:
                p.add_argument(flag, dest=key, type=int)
    return parser


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    overrides = {
        k: v for k, v in vars(args).items()
        if k not in ("command", "config") and v is not None
    }
    apply_overrides(cfg, overrides)
    if not cfg.remote_url and os.environ.get(REMOTE_URL_ENV):
        cfg.remote_url = os.environ[REMOTE_URL_ENV]
    if cfg.deterministic:
        cfg.workers = 1
    cfg.validate()
    return cfg


# -- artifact paths -----------------------------------------------------------

def _p(cfg: PipelineConfig, name: str) -> str:
    return os.path.join(cfg.out_dir, name)


def _require(path: str, hint: str) -> str:
    if not os.path.exists(path):
        raise DataError(f"missing {hint}: {path}")
    return path


def _load_graph(cfg: PipelineConfig) -> Hin:
    if not cfg.nodes_file or not cfg.edges_file:
        raise DataError("nodes_file and edges_file must be configured")
    _require(cfg.nodes_file, "nodes file")
    _require(cfg.edges_file, "edges file")
    return load_hin(cfg.nodes_file, cfg.edges_file)


def _load_labels(cfg: PipelineConfig) -> dict[int, int]:
    _require(cfg.labels_file, "labels file")
    labels: dict[int, int] = {}
    with open(cfg.labels_file, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise DataError(f"labels line {lineno}: expected node_id<TAB>class_id")
            labels[int(cols[0])] = int(cols[1])
    if not labels:
        raise DataError(f"labels file {cfg.labels_file} is empty")
    return labels


def _backend(cfg: PipelineConfig) -> ScorerBackend:
    if cfg.backend == "remote":
        return RemoteScorer(cfg.remote_url)
    return BuiltinLm.load(_require(_p(cfg, "lm.json"), "trained LM (run train-lm first)"))


def _etype_id(hin: Hin, name: str, what: str) -> int:
    if not name:
        raise DataError(f"{what} is not configured")
    if name in hin.edge_type_raw:
        return hin.edge_type_raw.index(name)
    raise DataError(f"{what} {name!r} not among edge types {list(hin.edge_type_raw)}")


def _manifest(cfg: PipelineConfig, command: str, started: float,
              artifacts: list[str], extra: Optional[dict] = None) -> None:
    payload = {
        "command": command,
        "config": dataclasses.asdict(cfg),
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "inputs": {"nodes_file": cfg.nodes_file, "edges_file": cfg.edges_file,
                   "labels_file": cfg.labels_file},
        "artifacts": artifacts,
        "wall_time_s": time.time() - started,
        "extra": extra or {},
    }
    with open(_p(cfg, f"manifest-{command}.json"), "w", encoding="utf-8") as f:
        json.dump(payload, f, sort_keys=True, indent=1)


# -- stage implementations ----------------------------------------------------

def _lp_split(cfg: PipelineConfig, hin: Hin):
    etype = _etype_id(hin, cfg.lp_target_edge_type, "lp_target_edge_type")
    return etype, build_link_prediction_data(hin, etype, cfg.lp_test_fraction, cfg.seed)


def cmd_train_lm(cfg: PipelineConfig) -> dict:
    hin = _load_graph(cfg)
    lm = train_builtin_lm(hin, order=cfg.lm_order, smoothing=cfg.lm_smoothing,
                          dim=cfg.lm_dim, epochs=cfg.lm_epochs, seed=cfg.seed,
                          window=cfg.lm_window, negatives=cfg.lm_negatives, lr=cfg.lm_lr)
    lm.save(_p(cfg, "lm.json"))
    return {"artifacts": [_p(cfg, "lm.json")],
            "extra": {"vocab": lm.vocab_size, "corpus_sentences": lm.meta.get("corpus_sentences")}}


def cmd_train_classifier(cfg: PipelineConfig) -> dict:
    hin = _load_graph(cfg)
    backend = _backend(cfg)
    params = train_classifier(hin, backend, lam=cfg.clf_lambda, lr=cfg.clf_lr,
                              epochs=cfg.clf_epochs, seed=cfg.seed,
                              batch_size=cfg.clf_batch,
                              joint_finetune=cfg.clf_joint_finetune)
    params.save(_p(cfg, "classifier.bin"))
    return {"artifacts": [_p(cfg, "classifier.bin")],
            "extra": {"best_epoch": params.history.get("best_epoch"),
                      "val_loss": min(params.history.get("val_loss", [float('nan')]))}}


def _task_data(cfg: PipelineConfig, hin: Hin) -> Optional[TaskData]:
    if cfg.subset_policy == "lp-training-edges":
        _, data = _lp_split(cfg, hin)
        return TaskData(training_edges=data.train_pos)
    if cfg.subset_policy == "nc-label-similar":
        labels = _load_labels(cfg)
        return TaskData(labels={n: (c,) for n, c in labels.items()})
    return None


def cmd_sample_paths(cfg: PipelineConfig) -> dict:
    hin = _load_graph(cfg)
    backend = _backend(cfg)
    classifier = ClassifierParams.load(
        _require(_p(cfg, "classifier.bin"), "trained classifier (run train-classifier first)"))
    sampler_cfg = SamplerConfig(
        hop_range=(cfg.hop_min, cfg.hop_max), repeats_per_pair=cfg.repeats_per_pair,
        temperature=cfg.temperature, top_k_fill=cfg.top_k_fill,
        subset_policy=cfg.subset_policy, rescore_full=cfg.rescore_full,
        max_retries=cfg.max_retries, seed=cfg.seed)
    paths, stats = run_sampling(hin, backend, classifier, sampler_cfg, cfg.n_pairs,
                                task_data=_task_data(cfg, hin), workers=cfg.workers)
    write_paths_jsonl(paths, hin, _p(cfg, "paths.jsonl"))
    return {"artifacts": [_p(cfg, "paths.jsonl")], "extra": stats.to_json()}


def cmd_induce(cfg: PipelineConfig) -> dict:
    hin = _load_graph(cfg)
    paths = read_paths_jsonl(_require(_p(cfg, "paths.jsonl"), "sampled paths (run sample-paths first)"))
    ranked = induce(paths, cfg.q, schema=derive_schema(hin))
    ranked.save(hin, _p(cfg, "metapaths.json"))
    return {"artifacts": [_p(cfg, "metapaths.json")],
            "extra": {"paths": len(paths), "metapaths": len(ranked.entries)}}


def _walk_graph(cfg: PipelineConfig, hin: Hin) -> Hin:
    """Hold test-split target edges out of walk generation when LP is configured."""
    if not cfg.lp_target_edge_type:
        return hin
    etype, data = _lp_split(cfg, hin)
    return without_edges(hin, {(u, v, etype) for u, v in data.test_pos})


def cmd_embed(cfg: PipelineConfig) -> dict:
    hin = _load_graph(cfg)
    ranked = RankedMetaPaths.load(_require(_p(cfg, "metapaths.json"), "meta-paths (run induce first)"))
    walk_graph = _walk_graph(cfg, hin)
    walks = metapath_walks(walk_graph, ranked, cfg.walk_length, cfg.walks_per_node, cfg.seed)
    emb = train_skipgram(walks, dim=cfg.emb_dim, window=cfg.emb_window,
                         negatives=cfg.emb_negatives, lr=cfg.emb_lr,
                         epochs=cfg.emb_epochs, seed=cfg.seed,
                         node_ids=[n.node_id for n in hin.nodes])
    emb.save_text(_p(cfg, "embeddings.txt"))
    emb.save_binary(_p(cfg, "embeddings.bin"))
    return {"artifacts": [_p(cfg, "embeddings.txt"), _p(cfg, "embeddings.bin")],
            "extra": {"walks": len(walks), "unvisited": len(emb.training_meta.get("unvisited", []))}}


def cmd_eval_lp(cfg: PipelineConfig) -> dict:
    hin = _load_graph(cfg)
    emb = EmbeddingTable.load_text(_require(_p(cfg, "embeddings.txt"), "embeddings (run embed first)"))
    _, data = _lp_split(cfg, hin)
    report = eval_link_prediction(emb, data, config={"config_hash": config_hash(cfg)})
    try:
        report.metapaths = [
            {"node_types": m["node_types"], "edge_types": m["edge_types"]}
            for m in RankedMetaPaths.load(_p(cfg, "metapaths.json")).to_json(hin)["metapaths"]
        ]
    except FileNotFoundError:
        pass
    report.save(_p(cfg, "eval-lp.json"))
    with open(_p(cfg, "lp-scores.csv"), "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["u", "v", "score", "label"])
        w.writerows(lp_scores_and_labels(emb, data))
    with open(_p(cfg, "lp-roc.csv"), "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["fpr", "tpr"])
        w.writerows(lp_roc_points(emb, data))
    return {"artifacts": [_p(cfg, "eval-lp.json"), _p(cfg, "lp-scores.csv"), _p(cfg, "lp-roc.csv")],
            "extra": report.metrics}


def cmd_eval_nc(cfg: PipelineConfig) -> dict:
    hin = _load_graph(cfg)
    emb = EmbeddingTable.load_text(_require(_p(cfg, "embeddings.txt"), "embeddings (run embed first)"))
    labels = _load_labels(cfg)
    unknown = set(labels) - set(emb.ids)
    if unknown:
        raise DataError(f"labeled nodes missing from embeddings: {sorted(unknown)[:5]}")
    data = build_node_classification_data(labels, num_classes=max(labels.values()) + 1,
                                          test_fraction=cfg.nc_test_fraction, seed=cfg.seed)
    head = train_nc_head(emb, data, lr=cfg.nc_lr, epochs=cfg.nc_epochs, seed=cfg.seed)
    report = eval_node_classification(head, emb, data, config={"config_hash": config_hash(cfg)})
    report.save(_p(cfg, "eval-nc.json"))
    return {"artifacts": [_p(cfg, "eval-nc.json")], "extra": report.metrics}


def cmd_zero_shot(cfg: PipelineConfig) -> dict:
    """Hold out every edge of the target type, generate pseudo pairs from the
    masked relation template, regenerate meta-paths from them, re-embed and
    evaluate on the held-out edges."""
    hin = _load_graph(cfg)
    backend = _backend(cfg)
    classifier = ClassifierParams.load(
        _require(_p(cfg, "classifier.bin"), "trained classifier (run train-classifier first)"))
    etype = _etype_id(hin, cfg.zero_shot_edge_type, "zero_shot_edge_type")
    held_out = sorted({(e.src, e.dst) for e in hin.edges if e.etype == etype})
    if not held_out:
        raise DataError(f"no edges of type {cfg.zero_shot_edge_type!r} to hold out")
    graph_wo = without_edges(hin, {(u, v, etype) for u, v in held_out})
    pairs = zero_shot_pairs(hin, backend, tokenize(cfg.zero_shot_edge_type),
                            cfg.zero_shot_n, seed=cfg.seed,
                            temperature=cfg.zero_shot_temperature)
    sampler_cfg = SamplerConfig(
        hop_range=(cfg.hop_min, cfg.hop_max), repeats_per_pair=cfg.repeats_per_pair,
        temperature=cfg.temperature, top_k_fill=cfg.top_k_fill,
        subset_policy="lp-training-edges", rescore_full=cfg.rescore_full,
        max_retries=cfg.max_retries, seed=cfg.seed)
    paths, stats = run_sampling(graph_wo, backend, classifier, sampler_cfg, cfg.n_pairs,
                                task_data=TaskData(training_edges=pairs), workers=cfg.workers)
    if not paths:
        raise DataError("zero-shot sampling produced no paths; pseudo pairs may be disconnected")
    ranked = induce(paths, cfg.q, schema=derive_schema(graph_wo))
    walks = metapath_walks(graph_wo, ranked, cfg.walk_length, cfg.walks_per_node, cfg.seed)
    emb = train_skipgram(walks, dim=cfg.emb_dim, window=cfg.emb_window,
                         negatives=cfg.emb_negatives, lr=cfg.emb_lr,
                         epochs=cfg.emb_epochs, seed=cfg.seed,
                         node_ids=[n.node_id for n in hin.nodes])
    data = build_link_prediction_data(hin, etype, test_fraction=0.999, seed=cfg.seed)
    report = eval_link_prediction(emb, data, config={"config_hash": config_hash(cfg)})
    out = {
        "edge_type": cfg.zero_shot_edge_type,
        "pseudo_pairs": [[u, v] for u, v in pairs],
        "metrics": report.metrics,
        "metapaths": ranked.to_json(hin)["metapaths"],
        "sampling": stats.to_json(),
    }
    with open(_p(cfg, "zero-shot.json"), "w", encoding="utf-8") as f:
        json.dump(out, f, sort_keys=True, separators=(",", ":"))
    return {"artifacts": [_p(cfg, "zero-shot.json")], "extra": report.metrics}


def cmd_hypothesis(cfg: PipelineConfig) -> dict:
    hin = _load_graph(cfg)
    backend = _backend(cfg)
    report = hypothesis_study(hin, backend, n_paths=cfg.hypothesis_paths, seed=cfg.seed)
    with open(_p(cfg, "hypothesis.json"), "w", encoding="utf-8") as f:
        json.dump(report.to_json(), f, sort_keys=True, separators=(",", ":"))
    with open(_p(cfg, "hypothesis-scores.csv"), "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["plm_score", "name_score", "connectivity"])
        w.writerows(zip(report.plm_scores, report.name_scores, report.connectivity))
    return {"artifacts": [_p(cfg, "hypothesis.json"), _p(cfg, "hypothesis-scores.csv")],
            "extra": {"spearman_plm_name": report.spearman_plm_name,
                      "spearman_plm_connectivity": report.spearman_plm_connectivity}}


def cmd_pipeline(cfg: PipelineConfig) -> dict:
    artifacts: list[str] = []
    extra: dict = {}
    for name, fn in [("train-lm", cmd_train_lm), ("train-classifier", cmd_train_classifier),
                     ("sample-paths", cmd_sample_paths), ("induce", cmd_induce),
                     ("embed", cmd_embed)]:
        result = fn(cfg)
        artifacts.extend(result["artifacts"])
        extra[name] = result["extra"]
    if cfg.lp_target_edge_type:
        result = cmd_eval_lp(cfg)
        artifacts.extend(result["artifacts"])
        extra["eval-lp"] = result["extra"]
    if cfg.labels_file:
        result = cmd_eval_nc(cfg)
        artifacts.extend(result["artifacts"])
        extra["eval-nc"] = result["extra"]
    return {"artifacts": artifacts, "extra": extra}


COMMANDS = {
    "train-lm": cmd_train_lm,
    "train-classifier": cmd_train_classifier,
    "sample-paths": cmd_sample_paths,
    "induce": cmd_induce,
    "embed": cmd_embed,
    "eval-lp": cmd_eval_lp,
    "eval-nc": cmd_eval_nc,
    "zero-shot": cmd_zero_shot,
    "hypothesis": cmd_hypothesis,
    "pipeline": cmd_pipeline,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required (see --help)")
        cfg = _resolve_config(args)
        os.makedirs(cfg.out_dir, exist_ok=True)
        started = time.time()
        result = COMMANDS[args.command](cfg)
        _manifest(cfg, args.command, started, result["artifacts"], result["extra"])
        for path in result["artifacts"]:
            print(path)
        return 0
    except UsageError as exc:
        print(f"ERROR 1: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (ConfigError, DataError, LoadError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"ERROR 2: {exc}", file=sys.stderr)
        return 2
    except TransportError as exc:
        print(f"ERROR 3: {exc}", file=sys.stderr)
        return 3
    except BackendError as exc:
        print(f"ERROR 3: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Pipeline configuration: TOML file, flag overrides, canonical hashing."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - py310 path
    import tomli as tomllib


class ConfigError(ValueError):
    """A config file or value is invalid."""


@dataclass
class PipelineConfig:
    # data files
    nodes_file: str = ""
    edges_file: str = ""
    labels_file: str = ""
    out_dir: str = "out"
    # backend
    backend: str = "builtin"          # builtin | remote
    remote_url: str = ""
    # global
    seed: int = 0
    workers: int = 1
    deterministic: bool = False
    # built-in LM
    lm_order: int = 3
    lm_smoothing: float = 0.1
    lm_dim: int = 64
    lm_epochs: int = 5
    lm_window: int = 2
    lm_negatives: int = 5
    lm_lr: float = 0.05
    # type classifier
    clf_lambda: float = 1.0
    clf_lr: float = 0.5
    clf_epochs: int = 60
    clf_batch: int = 32
    clf_joint_finetune: bool = False
    # path sampler
    hop_min: int = 1
    hop_max: int = 4
    repeats_per_pair: int = 10
    temperature: float = 1.0
    top_k_fill: int = 0
    subset_policy: str = "all"
    n_pairs: int = 100
    max_retries: int = 3
    rescore_full: bool = False
    # induction
    q: int = 8
    # embedding
    emb_dim: int = 128
    walk_length: int = 1
    walks_per_node: int = 10
    emb_window: int = 2
    emb_negatives: int = 5
    emb_lr: float = 0.001
    emb_epochs: int = 5
    # tasks
    lp_target_edge_type: str = ""
    lp_test_fraction: float = 0.3
    nc_test_fraction: float = 0.3
    nc_lr: float = 0.5
    nc_epochs: int = 200
    zero_shot_edge_type: str = ""
    zero_shot_n: int = 20
    zero_shot_temperature: float = 1.0
    hypothesis_paths: int = 200

    def validate(self) -> None:
        if self.backend not in ("builtin", "remote"):
            raise ConfigError(f"backend must be builtin or remote, got {self.backend!r}")
        if self.backend == "remote" and not self.remote_url:
            raise ConfigError("remote backend selected but remote_url is empty")
        if not (1 <= self.hop_min <= self.hop_max <= 8):
            raise ConfigError(f"hop range {self.hop_min}..{self.hop_max} must sit within 1..8")
        for name in ("repeats_per_pair", "n_pairs", "q", "emb_dim", "lm_dim",
                     "walk_length", "walks_per_node", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("lp_test_fraction", "nc_test_fraction"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ConfigError(f"{name} must be in (0, 1), got {v}")
        if self.temperature < 0 or self.zero_shot_temperature < 0:
            raise ConfigError("temperatures must be >= 0")
        if self.lm_order < 2:
            raise ConfigError("lm_order must be >= 2")
        if self.lm_smoothing <= 0:
            raise ConfigError("lm_smoothing must be positive")


_FIELDS = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}


def load_config(path: str) -> PipelineConfig:
    """Read a flat key = value TOML file; unknown keys are errors."""
    with open(path, "rb") as f:
        try:
            raw = tomllib.load(f)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    cfg = PipelineConfig()
    apply_overrides(cfg, raw, source=path)
    return cfg


def apply_overrides(cfg: PipelineConfig, values: dict, source: str = "flags") -> PipelineConfig:
    for key, value in values.items():
        if value is None:
            continue
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r} (from {source})")
        current = getattr(cfg, key)
        if isinstance(current, bool):
            value = bool(value)
        elif isinstance(current, int):
            if isinstance(value, float) and not value.is_integer():
                raise ConfigError(f"config key {key!r} expects an integer, got {value}")
            value = int(value)
        elif isinstance(current, float):
            value = float(value)
        else:
            value = str(value)
        setattr(cfg, key, value)
    return cfg


def config_hash(cfg: PipelineConfig) -> str:
    """sha256 of the canonical JSON form; changes iff any field changes."""
    canonical = json.dumps(dataclasses.asdict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

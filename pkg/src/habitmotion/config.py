"""Declarative run configuration.

One document (YAML or JSON) drives every command: a `profile` key selects
paper-scale or desk-scale defaults, explicit keys override the profile,
and CLI flags override the file. Unknown keys are rejected with their
path. All hyperparameter defaults are the paper-scale values; `desk` is
the bundled override profile sized for the synthetic corpus.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

import yaml

from habitmotion.errors import ConfigError
from habitmotion.extractor import ExtractorConfig
from habitmotion.habit import HabitConfig
from habitmotion.vqvae import TrainConfig, VqvaeConfig

PROFILE_ENV = "HABITMOTION_PROFILE"

# Overrides applied on top of the paper-scale dataclass defaults.
_PROFILES = {
    "paper": {},
    "desk": {
        "vqvae": {
            "codebook_size": 64,
            "code_dim": 64,
            "width": 64,
            "habit_dim": 16,
            "iterations": 4000,
        },
        "habit": {
            "latent_dim": 16,
            "post_layers": 2,
            "post_hidden": 64,
            "post_heads": 4,
            "iterations": 600,
            "batch_size": 16,
            "crop_frames": 24,
        },
    },
}


@dataclass
class MetricsConfig:
    diversity_pairs: int = 300
    min_samples: int = 5


@dataclass
class PathsConfig:
    corpus: str = ""
    embeddings: str = ""  # defaults to <corpus>/embeddings.json
    out: str = "runs"


@dataclass
class RunConfig:
    profile: str
    seed: int
    paths: PathsConfig
    vqvae_model: VqvaeConfig
    vqvae_train: TrainConfig
    habit: HabitConfig
    extractor: ExtractorConfig
    metrics: MetricsConfig

    def embeddings_path(self) -> str:
        if self.paths.embeddings:
            return self.paths.embeddings
        if self.paths.corpus:
            return os.path.join(self.paths.corpus, "embeddings.json")
        raise ConfigError("no corpus or embeddings path configured")


def _field_names(cls):
    return {f.name for f in dataclasses.fields(cls)}


# The `vqvae` section covers both the model and the training dataclasses.
_SECTIONS = {
    "vqvae": (_field_names(VqvaeConfig) | _field_names(TrainConfig)) - {"seed"},
    "habit": _field_names(HabitConfig),
    "extractor": _field_names(ExtractorConfig),
    "metrics": _field_names(MetricsConfig),
    "paths": _field_names(PathsConfig),
}


def _reject_unknown(section: str, doc: dict, allowed) -> None:
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"unknown config key {section}.{key}" if section else
                              f"unknown config key {key}")


def _build(cls, *dicts):
    merged = {}
    for d in dicts:
        merged.update({k: v for k, v in d.items() if k in _field_names(cls)})
    try:
        return cls(**merged)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid {cls.__name__}: {e}") from e


def default_profile() -> str:
    return os.environ.get(PROFILE_ENV, "paper")


def make_config(doc: dict | None = None, profile: str | None = None,
                seed: int | None = None) -> RunConfig:
    """Resolve built-ins <- profile <- config document <- explicit args."""
    doc = dict(doc or {})
    top_allowed = {"profile", "seed"} | set(_SECTIONS)
    _reject_unknown("", doc, top_allowed)
    profile = profile or doc.get("profile") or default_profile()
    if profile not in _PROFILES:
        raise ConfigError(f"unknown profile {profile!r} (have {sorted(_PROFILES)})")
    prof = _PROFILES[profile]
    sections = {}
    for name, allowed in _SECTIONS.items():
        given = doc.get(name) or {}
        if not isinstance(given, dict):
            raise ConfigError(f"config section {name} must be a mapping")
        _reject_unknown(name, given, allowed)
        sections[name] = {**prof.get(name, {}), **given}
    if seed is None:
        seed = int(doc.get("seed", 0))
    vq = sections["vqvae"]
    cfg = RunConfig(
        profile=profile,
        seed=int(seed),
        paths=_build(PathsConfig, sections["paths"]),
        vqvae_model=_build(VqvaeConfig, vq),
        vqvae_train=_build(TrainConfig, vq, {"seed": int(seed)}),
        habit=_build(HabitConfig, sections["habit"]),
        extractor=_build(ExtractorConfig, sections["extractor"]),
        metrics=_build(MetricsConfig, sections["metrics"]),
    )
    if cfg.vqvae_model.habit_dim != cfg.habit.latent_dim:
        raise ConfigError(
            f"vqvae.habit_dim ({cfg.vqvae_model.habit_dim}) must equal "
            f"habit.latent_dim ({cfg.habit.latent_dim})"
        )
    return cfg


def load_config(path, profile: str | None = None, seed: int | None = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: invalid config syntax: {e}") from e
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return make_config(doc, profile=profile, seed=seed)


def dump_config(cfg: RunConfig) -> str:
    doc = {
        "profile": cfg.profile,
        "seed": cfg.seed,
        "paths": dataclasses.asdict(cfg.paths),
        "vqvae": {**dataclasses.asdict(cfg.vqvae_model),
                  **{k: v for k, v in dataclasses.asdict(cfg.vqvae_train).items()
                     if k != "seed"}},
        "habit": dataclasses.asdict(cfg.habit),
        "extractor": dataclasses.asdict(cfg.extractor),
        "metrics": dataclasses.asdict(cfg.metrics),
    }
    return json.dumps(doc, indent=1, sort_keys=True)

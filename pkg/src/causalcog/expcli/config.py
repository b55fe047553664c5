"""Experiment configuration read from a sectioned INI file.

Sections and keys (defaults in parentheses)::

    [task]          name (trap_tube | dispenser), length (5), trap_effective (true),
                    flip_prob (0.5), confound_weight (false), discount (0.9)
    [agent]         representation (raw), episodes (2000), batch_episodes (1),
                    step_size (0.05), eval_block (100), horizon (50),
                    baseline_window (100)
    [integration]   mode (EgoOnly), social_per_batch (1), demonstrations (20),
                    natural_transitions (20000), clip (10; "none" disables)
    [experiment]    seeds (0), structure_samples (50000)
    [vae]           latent_dim (4), beta (4), steps (2000), step_size (0.01),
                    dataset_size (2000), obs_scale (8), code_bins (4), seed (0)
    [thresholds]    cmi (0.01)
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from ..agents.actor_critic import RepresentationKind, TrainConfig
from ..agents.vae import VaeConfig
from ..errors import ConfigError
from ..replay.importance import Mode

TASKS = ("trap_tube", "dispenser")


@dataclass(frozen=True)
class TaskSpec:
    name: str = "trap_tube"
    length: int = 5
    trap_effective: bool = True
    flip_prob: float = 0.5
    confound_weight: bool = False
    discount: float = 0.9


@dataclass(frozen=True)
class ExperimentConfig:
    task: TaskSpec = TaskSpec()
    representation: RepresentationKind = RepresentationKind.RAW
    train: TrainConfig = TrainConfig(episodes=2000)
    mode: Mode = Mode.EGO_ONLY
    social_per_batch: int = 1
    demonstrations: int = 20
    natural_transitions: int = 20000
    clip: float | None = 10.0
    seeds: tuple = (0,)
    structure_samples: int = 50000
    vae: VaeConfig = field(default_factory=lambda: VaeConfig(step_size=0.01))
    vae_dataset_size: int = 2000
    cmi_threshold: float = 0.01


def _get(parser, section, key, kind, default):
    name = f"{section}.{key}"
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key).strip()
    try:
        if kind is bool:
            return parser.getboolean(section, key)
        if kind == "seeds":
            return tuple(int(v) for v in raw.replace(",", " ").split())
        if kind == "clip":
            return None if raw.lower() == "none" else float(raw)
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(name, f"cannot parse {raw!r}: {exc}") from None


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("file", str(exc).splitlines()[0]) from None
    d = ExperimentConfig()
    task = TaskSpec(
        name=_get(parser, "task", "name", str, d.task.name),
        length=_get(parser, "task", "length", int, d.task.length),
        trap_effective=_get(parser, "task", "trap_effective", bool, d.task.trap_effective),
        flip_prob=_get(parser, "task", "flip_prob", float, d.task.flip_prob),
        confound_weight=_get(parser, "task", "confound_weight", bool, d.task.confound_weight),
        discount=_get(parser, "task", "discount", float, d.task.discount),
    )
    t = d.train
    train = TrainConfig(
        episodes=_get(parser, "agent", "episodes", int, t.episodes),
        batch_episodes=_get(parser, "agent", "batch_episodes", int, t.batch_episodes),
        step_size=_get(parser, "agent", "step_size", float, t.step_size),
        eval_block=_get(parser, "agent", "eval_block", int, t.eval_block),
        horizon=_get(parser, "agent", "horizon", int, t.horizon),
        baseline_window=_get(parser, "agent", "baseline_window", int, t.baseline_window),
        obs_scale=_get(parser, "vae", "obs_scale", float, t.obs_scale),
        code_bins=_get(parser, "vae", "code_bins", int, t.code_bins),
    )
    v = d.vae
    vae = VaeConfig(
        latent_dim=_get(parser, "vae", "latent_dim", int, v.latent_dim),
        beta=_get(parser, "vae", "beta", float, v.beta),
        steps=_get(parser, "vae", "steps", int, v.steps),
        step_size=_get(parser, "vae", "step_size", float, v.step_size),
        seed=_get(parser, "vae", "seed", int, v.seed),
    )
    rep_name = _get(parser, "agent", "representation", str, d.representation.value)
    mode_name = _get(parser, "integration", "mode", str, d.mode.value)
    try:
        representation = RepresentationKind(rep_name)
    except ValueError:
        raise ConfigError("agent.representation", f"unknown representation {rep_name!r}") from None
    try:
        mode = Mode(mode_name)
    except ValueError:
        raise ConfigError("integration.mode", f"unknown mode {mode_name!r}") from None
    cfg = ExperimentConfig(
        task=task,
        representation=representation,
        train=train,
        mode=mode,
        social_per_batch=_get(parser, "integration", "social_per_batch", int, d.social_per_batch),
        demonstrations=_get(parser, "integration", "demonstrations", int, d.demonstrations),
        natural_transitions=_get(parser, "integration", "natural_transitions", int, d.natural_transitions),
        clip=_get(parser, "integration", "clip", "clip", d.clip),
        seeds=_get(parser, "experiment", "seeds", "seeds", d.seeds),
        structure_samples=_get(parser, "experiment", "structure_samples", int, d.structure_samples),
        vae=vae,
        vae_dataset_size=_get(parser, "vae", "dataset_size", int, d.vae_dataset_size),
        cmi_threshold=_get(parser, "thresholds", "cmi", float, d.cmi_threshold),
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig):
    if cfg.task.name not in TASKS:
        raise ConfigError("task.name", f"unknown task {cfg.task.name!r}; expected one of {TASKS}")
    if cfg.task.name == "trap_tube" and cfg.task.length < 4:
        raise ConfigError("task.length", "must be at least 4")
    if not 0.0 <= cfg.task.flip_prob <= 1.0:
        raise ConfigError("task.flip_prob", "must lie in [0, 1]")
    if not 0.0 <= cfg.task.discount < 1.0:
        raise ConfigError("task.discount", "must lie in [0, 1)")
    if not cfg.seeds:
        raise ConfigError("experiment.seeds", "at least one seed required")
    if cfg.train.episodes % cfg.train.eval_block:
        raise ConfigError("agent.episodes", "must be a multiple of agent.eval_block")
    if cfg.clip is not None and cfg.clip < 1.0:
        raise ConfigError("integration.clip", "cap must be at least 1")
    if cfg.structure_samples < 1:
        raise ConfigError("experiment.structure_samples", "must be positive")
    if cfg.vae.latent_dim < 1:
        raise ConfigError("vae.latent_dim", "must be at least 1")
    if cfg.vae.beta < 1.0:
        raise ConfigError("vae.beta", "must be at least 1")
    for name in ("social_per_batch", "demonstrations", "natural_transitions"):
        if getattr(cfg, name) < 0:
            raise ConfigError(f"integration.{name}", "must be non-negative")
    try:
        cfg.train.validate()
    except ConfigError as exc:
        section = "vae" if exc.field in ("obs_scale", "code_bins") else "agent"
        raise ConfigError(f"{section}.{exc.field}", str(exc).split(": ", 1)[1]) from None


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())

"""Run configuration: one YAML document, validated before any work starts.

Example::

    master_seed: 7
    synth: {preset: table1, null_identity: false}
    mfcc: {n_coeffs: 128}
    tcn: {channels: 64}
    train: {steps: 300}
    classifiers:
      - {kind: svm, params: {C: 1.0}}
      - {kind: rf}
    evaluate: {n_reps: 500, split: 0.75}
    compare: {train_grid: [5, 10, 20], per_bin: 500}
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml

from .classifiers import DEFAULT_SPECS, ClassifierSpec
from .embedder import TcnConfig, TrainConfig
from .eval.experiments import DEFAULT_C_BINS, DEFAULT_TRAIN_GRID
from .mfcc import MfccConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSettings:
    preset: str = "table1"  # table1 | uniform
    n_individuals: int = 10
    per_cell: int = 4
    null_identity: bool = False
    cue_scatter: float = 0.08
    sample_rate_hz: int = 44100
    name_prefix: str = "spk"

    def __post_init__(self):
        if self.preset not in ("table1", "uniform"):
            raise ConfigError(f"synth.preset must be 'table1' or 'uniform', got {self.preset!r}")


@dataclass(frozen=True)
class EvaluateSettings:
    n_reps: int = 500
    split: float = 0.75
    stratified: bool = True
    confusion_classifier: str = "svm"


@dataclass(frozen=True)
class CompareSettings:
    train_grid: tuple[int, ...] = DEFAULT_TRAIN_GRID
    c_bins: tuple[tuple[float, float], ...] = DEFAULT_C_BINS
    per_bin: int = 500

    def __post_init__(self):
        object.__setattr__(self, "train_grid", tuple(int(n) for n in self.train_grid))
        object.__setattr__(self, "c_bins", tuple((float(a), float(b)) for a, b in self.c_bins))
        for lo, hi in self.c_bins:
            if not 0 < lo < hi:
                raise ConfigError(f"bad C bin ({lo}, {hi})")


@dataclass(frozen=True)
class RunConfig:
    master_seed: int | None = None
    jobs: int | None = None
    synth: SynthSettings = field(default_factory=SynthSettings)
    mfcc: MfccConfig = field(default_factory=MfccConfig)
    tcn: TcnConfig = field(default_factory=TcnConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    classifiers: tuple[ClassifierSpec, ...] = DEFAULT_SPECS
    evaluate: EvaluateSettings = field(default_factory=EvaluateSettings)
    compare: CompareSettings = field(default_factory=CompareSettings)

    def require_seed(self) -> int:
        if self.master_seed is None:
            raise ConfigError("master_seed required (set it in the config or pass --seed)")
        return int(self.master_seed)

    def with_overrides(self, seed: int | None = None, jobs: int | None = None) -> "RunConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, master_seed=int(seed))
        if jobs is not None:
            cfg = replace(cfg, jobs=int(jobs))
        return cfg


def _build(cls, data: Any, section: str):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section!r}: {', '.join(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {section!r} section: {exc}") from exc


def parse_config(doc: dict | None) -> RunConfig:
    doc = dict(doc or {})
    sections = {"synth": SynthSettings, "mfcc": MfccConfig, "tcn": TcnConfig, "train": TrainConfig,
                "evaluate": EvaluateSettings, "compare": CompareSettings}
    allowed = set(sections) | {"master_seed", "jobs", "classifiers"}
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    kwargs: dict[str, Any] = {name: _build(cls, doc.get(name), name) for name, cls in sections.items()}
    if "classifiers" in doc:
        specs = []
        for item in doc["classifiers"] or []:
            if not isinstance(item, dict) or "kind" not in item:
                raise ConfigError("each classifier entry needs a 'kind'")
            extra = sorted(set(item) - {"kind", "params", "name", "standardize"})
            if extra:
                raise ConfigError(f"unknown classifier key(s): {', '.join(extra)}")
            try:
                specs.append(ClassifierSpec(item["kind"], dict(item.get("params") or {}), item.get("name"),
                                            bool(item.get("standardize", False))))
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if not specs:
            raise ConfigError("classifiers list is empty")
        kwargs["classifiers"] = tuple(specs)
    seed = doc.get("master_seed")
    if seed is not None and not isinstance(seed, int):
        raise ConfigError("master_seed must be an integer")
    return RunConfig(master_seed=seed, jobs=doc.get("jobs"), **kwargs)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if doc is not None and not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return parse_config(doc)

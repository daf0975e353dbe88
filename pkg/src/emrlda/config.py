"""JSON run configuration shared by the CLI subcommands.

Relative paths inside a config file resolve against the file's directory.
Command-line flags are applied on top and always win.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .sampler import Hyperparameters
from .synth import GeneratorConfig

_TOP_KEYS = {"events", "labels", "coverage", "sampler", "eval", "synth", "output"}


@dataclass(frozen=True)
class EvalSettings:
    threshold: float = 0.01
    top_n: int = 10


@dataclass(frozen=True)
class OutputSettings:
    dir: Path = Path(".")
    format: str = "table"
    include_theta: bool = False
    chains: int = 1


@dataclass(frozen=True)
class RunConfig:
    events: Optional[Path] = None
    labels: Optional[Path] = None
    coverage: float = 0.8
    sampler: dict = field(default_factory=dict)
    eval: EvalSettings = EvalSettings()
    synth: GeneratorConfig = GeneratorConfig()
    output: OutputSettings = OutputSettings()

    def hyperparameters(self, **overrides) -> Hyperparameters:
        params = {**self.sampler, **{k: v for k, v in overrides.items() if v is not None}}
        if "K" not in params:
            raise ConfigError("sampler.K is required")
        try:
            return Hyperparameters.from_dict(params)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def _path(value, base: Path) -> Optional[Path]:
    if value is None:
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def load_config(path: str | os.PathLike | None) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    base = path.parent
    try:
        out = raw.get("output", {})
        sampler = dict(raw.get("sampler", {}))
        unknown = set(sampler) - set(Hyperparameters.__dataclass_fields__) - {"rng"}
        if unknown:
            raise ConfigError(f"{path}: unknown sampler keys {sorted(unknown)}")
        sampler.pop("rng", None)
        return RunConfig(
            events=_path(raw.get("events"), base),
            labels=_path(raw.get("labels"), base),
            coverage=float(raw.get("coverage", 0.8)),
            sampler=sampler,
            eval=EvalSettings(**raw.get("eval", {})),
            synth=GeneratorConfig(**raw.get("synth", {})),
            output=replace(OutputSettings(**{k: v for k, v in out.items() if k != "dir"}),
                           dir=_path(out["dir"], base) if "dir" in out else Path(".")),
        )
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None

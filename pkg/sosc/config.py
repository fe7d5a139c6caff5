# User value: This file merges the run's JSON config, command-line flags and environment into one checked settings object.
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List

from sosc.contract import CLI_VERBS, MODEL_KIND_PLAIN, MODEL_KINDS
from sosc.error_catalog import ConfigError
from sosc.gaussmath import Hyperparams
from sosc.startup_env import env_float, env_int

DEFAULT_HORIZON = 500
DEFAULT_WORKERS = 4

_HP_FLAG_KEYS = ("lambda", "lambda1", "lambda2", "lambda3", "sigma2", "b_m", "kappa2", "s_max", "weight_mode")


@dataclass(frozen=True)
class RunConfig:
    command: str
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    input: Path | None = None
    output: Path | None = None
    model: Path | None = None
    log: Path | None = None
    frames: Path | None = None
    resume: bool = False
    kind: str = MODEL_KIND_PLAIN
    seed: int = 0
    seeds: int = 1
    generator: dict = field(default_factory=dict)
    horizon: int = DEFAULT_HORIZON
    s_max: int = 150
    x0: tuple[float, ...] | None = None
    in_idx: tuple[int, ...] | None = None
    out_idx: tuple[int, ...] | None = None
    dt: float = 0.01
    r_scale: float = 1e-2
    lambda_sweep: tuple[float, ...] = ()
    silhouette_sample: int | None = None
    workers: int = DEFAULT_WORKERS


def _read_document(path: str | Path | None) -> dict:
    if path is None:
        return {}
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return doc


def _path(value: Any) -> Path | None:
    return None if value in (None, "") else Path(value)


def _index_tuple(value: Any, key: str, errors: List[str]) -> tuple[int, ...] | None:
    if value is None:
        return None
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    try:
        out = tuple(int(v) for v in value)
    except (TypeError, ValueError):
        errors.append(f"{key} must be a list of integers")
        return None
    if any(i < 0 for i in out) or len(set(out)) != len(out):
        errors.append(f"{key} must hold distinct non-negative indices")
    return out


def _float_tuple(value: Any, key: str, errors: List[str]) -> tuple[float, ...] | None:
    if value is None:
        return None
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    try:
        out = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        errors.append(f"{key} must be a list of numbers")
        return None
    if not all(math.isfinite(v) for v in out):
        errors.append(f"{key} must be finite")
    return out


def _hyperparams(doc: dict, overrides: dict) -> Hyperparams:
    raw = dict(doc.get("hyperparams") or {})
    if doc.get("preset") == "teleop" or overrides.get("preset") == "teleop":
        base = Hyperparams.teleop().to_dict()
        base.update(raw)
        raw = base
    for key in _HP_FLAG_KEYS:
        if overrides.get(key) is not None:
            raw[key] = overrides[key]
    return Hyperparams.from_dict(raw)


def _require_existing(cfg: dict, key: str, errors: List[str]) -> None:
    value = cfg.get(key)
    if value is None:
        errors.append(f"{key} is required for {cfg['command']}")
    elif not Path(value).is_file():
        errors.append(f"{key} file not found: {value}")


def _require_set(cfg: dict, key: str, errors: List[str]) -> None:
    if cfg.get(key) in (None, "", {}):
        errors.append(f"{key} is required for {cfg['command']}")


def _validate_command(cfg: dict, errors: List[str]) -> None:
    command = cfg["command"]
    if command == "generate":
        _require_set(cfg, "output", errors)
        _require_set(cfg, "generator", errors)
    elif command == "fit":
        _require_existing(cfg, "input", errors)
        _require_set(cfg, "model", errors)
        if cfg["resume"]:
            _require_existing(cfg, "model", errors)
        if cfg.get("frames") is not None:
            _require_existing(cfg, "frames", errors)
    elif command == "eval":
        _require_existing(cfg, "input", errors)
        if not cfg["lambda_sweep"]:
            _require_existing(cfg, "model", errors)
        _require_set(cfg, "output", errors)
    elif command == "plan":
        _require_existing(cfg, "model", errors)
        _require_set(cfg, "x0", errors)
        _require_set(cfg, "output", errors)
    elif command == "shared":
        _require_existing(cfg, "model", errors)
        _require_existing(cfg, "input", errors)
        _require_set(cfg, "output", errors)
    elif command == "combine-frames":
        _require_existing(cfg, "model", errors)
        _require_existing(cfg, "frames", errors)
        _require_set(cfg, "output", errors)
    if command in ("plan", "shared") and cfg.get("frames") is not None:
        _require_existing(cfg, "frames", errors)


# User value: collects every config mistake in one error so a run never starts half-configured.
def load_run_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    doc = _read_document(path)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    merged = {**doc, **overrides}
    if isinstance(doc.get("generator"), dict) and "generator" in overrides:
        merged["generator"] = {**doc["generator"], **overrides["generator"]}
    errors: List[str] = []

    command = merged.get("command")
    if command not in CLI_VERBS:
        raise ConfigError(f"command must be one of {list(CLI_VERBS)}")
    try:
        hp = _hyperparams(doc, overrides)
    except ConfigError as exc:
        errors.append(str(exc))
        hp = Hyperparams()

    cfg: dict[str, Any] = {
        "command": command,
        "input": _path(merged.get("input")),
        "output": _path(merged.get("output")),
        "model": _path(merged.get("model")),
        "log": _path(merged.get("log")),
        "frames": _path(merged.get("frames")),
        "resume": bool(merged.get("resume", False)),
        "kind": str(merged.get("kind", MODEL_KIND_PLAIN)),
        "generator": dict(merged.get("generator") or {}),
        "x0": _float_tuple(merged.get("x0"), "x0", errors),
        "in_idx": _index_tuple(merged.get("in_idx"), "in_idx", errors),
        "out_idx": _index_tuple(merged.get("out_idx"), "out_idx", errors),
        "lambda_sweep": _float_tuple(merged.get("lambda_sweep"), "lambda_sweep", errors) or (),
    }
    numeric = {
        "seed": (merged.get("seed", 0), int),
        "seeds": (merged.get("seeds", 1), int),
        "horizon": (merged.get("horizon", DEFAULT_HORIZON), int),
        "s_max": (merged.get("s_max", env_int("SOSC_S_MAX", hp.s_max)), int),
        "dt": (merged.get("dt", env_float("SOSC_CONTROL_DT", 0.01)), float),
        "r_scale": (merged.get("r_scale", env_float("SOSC_CONTROL_R", 1e-2)), float),
        "workers": (merged.get("workers", env_int("SOSC_WORKERS", DEFAULT_WORKERS)), int),
    }
    for key, (value, kind) in numeric.items():
        try:
            cfg[key] = kind(value)
        except (TypeError, ValueError):
            errors.append(f"{key} must be {'an integer' if kind is int else 'a number'}")
            cfg[key] = kind(0)
    sample = merged.get("silhouette_sample")
    try:
        cfg["silhouette_sample"] = None if sample is None else int(sample)
    except (TypeError, ValueError):
        errors.append("silhouette_sample must be an integer")
        cfg["silhouette_sample"] = None

    if cfg["kind"] not in MODEL_KINDS:
        errors.append(f"kind must be one of {list(MODEL_KINDS)}")
    if cfg["seeds"] < 1:
        errors.append("seeds must be >= 1")
    if cfg["horizon"] < 1:
        errors.append("horizon must be >= 1")
    if cfg["s_max"] < 1:
        errors.append("s_max must be >= 1")
    if not (0.0 < cfg["dt"] <= 1.0):
        errors.append("dt must be in (0, 1]")
    if not cfg["r_scale"] > 0.0:
        errors.append("r_scale must be > 0")
    if cfg["workers"] < 1:
        errors.append("workers must be >= 1")
    if any(v <= 0.0 for v in cfg["lambda_sweep"]):
        errors.append("lambda_sweep values must be > 0")
    if cfg["silhouette_sample"] is not None and cfg["silhouette_sample"] < 2:
        errors.append("silhouette_sample must be >= 2")
    if (cfg["in_idx"] is None) != (cfg["out_idx"] is None) and command == "shared":
        errors.append("in_idx and out_idx must be given together")
    _validate_command(cfg, errors)

    if errors:
        raise ConfigError("; ".join(errors))
    return RunConfig(hyperparams=hp, **cfg)

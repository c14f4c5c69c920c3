"""Run configuration dataclasses shared by the CLI.

Each command has one flat config; values come from built-in defaults, then
an optional flat JSON config file, then command-line flags (flags win).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Any

from .errors import ValidationError


@dataclass
class GenDataConfig:
    out: str = ""
    n: int = 10
    seed: int = 0


@dataclass
class TrainConfig:
    data: str = ""
    out: str = ""
    log: str = ""
    model: str = "vtcnn2"
    epochs: int = 10
    lr: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    split_seed: int = 0
    eval_limit: int = 1000
    eval_min_snr: int | None = None
    target_accuracy: float | None = None


@dataclass
class AttackConfig:
    weights: str = ""
    data: str = ""
    out: str = ""
    alg: str = "bisection"
    snr: int | None = None
    pnr_db: float | None = None
    psr_db: float | None = None
    n_examples: int = 100
    uap_n: int = 50
    eps_acc_rel: float = 1.0 / 64.0
    max_epochs: int = 3
    target_fool_rate: float = 0.8
    seed: int = 0
    split_seed: int = 0


@dataclass
class SweepConfig:
    weights: str = ""
    data: str = ""
    out_csv: str = ""
    out_svg: str = ""
    mode: str = "pnr"
    grid: str = ""
    snr: int | None = 10
    n_examples: int = 100
    uap_n: int = 50
    eps_acc_rel: float = 1.0 / 64.0
    max_epochs: int = 3
    target_fool_rate: float = 0.8
    shift_seed: int | None = None
    source_weights: str | None = None
    seed: int = 0
    split_seed: int = 0


@dataclass
class BenchConfig:
    weights: str = ""
    data: str = ""
    out: str = ""
    psr_grid: str = "-20:-10:2"
    n: int = 50
    repeats: int = 1
    snr: int | None = 10
    max_epochs: int = 2
    target_fool_rate: float = 0.8
    seed: int = 0
    split_seed: int = 0


def load_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValidationError(f"config {path} must hold a flat JSON object")
    return data


def merge_config(cls, file_values: dict[str, Any], flag_values: dict[str, Any]):
    """defaults <- config file <- flags; unknown file keys are rejected."""
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = set(file_values) - fields
    if unknown:
        raise ValidationError(
            f"unknown config keys for {cls.__name__}: {sorted(unknown)}"
        )
    values = dict(file_values)
    for key, val in flag_values.items():
        if key in fields and val is not None:
            values[key] = val
    return cls(**values)


def parse_grid(text: str) -> list[float]:
    """Grid spec: 'a,b,c' or 'start:stop:step' (inclusive stop)."""
    text = text.strip()
    if not text:
        raise ValidationError("empty grid specification")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"grid range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValidationError(f"grid step must be positive, got {step}")
        values = []
        v = start
        while v <= stop + 1e-9:
            values.append(round(v, 9))
            v += step
        return values
    try:
        return [float(p) for p in text.split(",")]
    except ValueError:
        raise ValidationError(f"cannot parse grid {text!r}") from None


def require(cfg, *names):
    for name in names:
        if not getattr(cfg, name):
            raise ValidationError(f"missing required option --{name.replace('_', '-')}")


def check_positive(cfg, *names):
    for name in names:
        value = getattr(cfg, name)
        if value is not None and value <= 0:
            raise ValidationError(f"--{name.replace('_', '-')} must be positive, got {value}")


def check_seeds(cfg):
    for name in ("seed", "split_seed", "shift_seed"):
        value = getattr(cfg, name, None)
        if value is not None and value < 0:
            raise ValidationError(f"--{name.replace('_', '-')} must be >= 0, got {value}")

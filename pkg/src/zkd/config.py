"""Strict JSON run-configuration parsing.

Unknown keys are rejected everywhere: a typo in a config should fail loudly
rather than silently fall back to a default.
"""

import json
from dataclasses import dataclass

from .data import DataSpec
from .errors import ConfigError
from .experiments import LrSchedule, TrainConfig
from .losses import KDConfig
from .nn import MlpSpec


def _require_mapping(obj, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object, got {type(obj).__name__}")
    return obj


def _check_keys(obj, allowed, where):
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}; allowed: {sorted(allowed)}")


def _build(cls, obj, where, key_map=None):
    kwargs = dict(obj)
    if key_map:
        for src, dst in key_map.items():
            if src in kwargs:
                kwargs[dst] = kwargs.pop(src)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_data_spec(obj, where="data"):
    obj = _require_mapping(obj, where)
    allowed = ("generator", "num_classes", "dim", "num_samples", "class_separation", "noise_std", "seed")
    _check_keys(obj, allowed, where)
    return _build(DataSpec, obj, where)


def parse_mlp_spec(obj, where="mlp"):
    obj = _require_mapping(obj, where)
    _check_keys(obj, ("layer_sizes", "activation", "seed"), where)
    if "layer_sizes" not in obj:
        raise ConfigError(f"{where}: layer_sizes is required")
    obj = dict(obj)
    obj["layer_sizes"] = tuple(obj["layer_sizes"])
    return _build(MlpSpec, obj, where)


def parse_lr_schedule(obj, where="lr_schedule"):
    obj = _require_mapping(obj, where)
    _check_keys(obj, ("kind", "factor", "every"), where)
    return _build(LrSchedule, obj, where)


def parse_train_config(obj, where="train"):
    obj = _require_mapping(obj, where)
    _check_keys(obj, ("epochs", "batch_size", "lr", "lr_schedule", "seed", "eps_guard"), where)
    obj = dict(obj)
    if "lr_schedule" in obj:
        obj["lr_schedule"] = parse_lr_schedule(obj["lr_schedule"], f"{where}.lr_schedule")
    return _build(TrainConfig, obj, where)


def parse_kd_config(obj, where="kd"):
    obj = _require_mapping(obj, where)
    _check_keys(obj, ("lambda_ce", "lambda_kd", "tau", "scheme", "shared_temperature"), where)
    return _build(KDConfig, obj, where)


@dataclass(frozen=True)
class RunConfig:
    data: DataSpec
    teacher: MlpSpec
    student: MlpSpec
    teacher_train: TrainConfig
    distill_train: TrainConfig
    kd: KDConfig
    seeds: tuple = ()  # optional fan-out of distill_train.seed
    out_dir: str = ""


def parse_run_config(obj, where="config"):
    obj = _require_mapping(obj, where)
    allowed = (
        "data", "teacher", "student", "teacher_train", "distill_train", "kd", "seeds", "out_dir",
    )
    _check_keys(obj, allowed, where)
    required = ("data", "teacher", "student", "teacher_train", "distill_train", "kd")
    for key in required:
        if key not in obj:
            raise ConfigError(f"{where}: missing required section {key!r}")
    seeds = obj.get("seeds", ())
    if seeds and (
        not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds)
    ):
        raise ConfigError(f"{where}: seeds must be a list of integers")
    out_dir = obj.get("out_dir", "")
    if not isinstance(out_dir, str):
        raise ConfigError(f"{where}: out_dir must be a string")
    return RunConfig(
        data=parse_data_spec(obj["data"], "data"),
        teacher=parse_mlp_spec(obj["teacher"], "teacher"),
        student=parse_mlp_spec(obj["student"], "student"),
        teacher_train=parse_train_config(obj["teacher_train"], "teacher_train"),
        distill_train=parse_train_config(obj["distill_train"], "distill_train"),
        kd=parse_kd_config(obj["kd"], "kd"),
        seeds=tuple(seeds),
        out_dir=out_dir,
    )


def load_run_config(path):
    return parse_run_config(_load_json(path))


@dataclass(frozen=True)
class ShackleConfig:
    teacher: tuple
    temperature: float
    init: tuple
    lr: float = 0.0  # 0 means the solver default 0.5 * T^2
    max_iters: int = 1_000_000
    tol: float = 1e-8


def parse_shackle_config(obj, where="config"):
    obj = _require_mapping(obj, where)
    _check_keys(obj, ("teacher", "temperature", "init", "lr", "max_iters", "tol"), where)
    for key in ("teacher", "temperature", "init"):
        if key not in obj:
            raise ConfigError(f"{where}: missing required key {key!r}")
    obj = dict(obj)
    obj["teacher"] = tuple(float(v) for v in obj["teacher"])
    obj["init"] = tuple(float(v) for v in obj["init"])
    return _build(ShackleConfig, obj, where)


def load_shackle_config(path):
    return parse_shackle_config(_load_json(path))


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc

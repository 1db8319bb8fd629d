"""Experiment configuration: one strict JSON file per experiment.

Unknown keys are rejected at every level so hyperparameter typos fail
loudly instead of silently falling back to defaults. The resolved
configuration (defaults filled in) is embedded verbatim in every
artifact the experiment writes, and round-trips losslessly through
JSON.

Schema (defaults in parentheses):

    {
      "name": str,
      "seed": int,
      "model": {
        "block_len": int, "list_size": int, "iterations": int,
        "variant": "ir_ae" | "turbo_ae" ("ir_ae"),
        "channels": int (100), "kernel": int (5), "layers": int (5)
      },
      "crc": ascending-power bit string | null (null),
      "train": {                      # optional section
        "t_enc": int, "t_dec": int,
        "encoder_snr_db": float,
        "decoder_snr_db": [low, high],
        "schedule": [[lr, batch], ...],
        "max_epochs": int,
        "patience": int (10),
        "clamp_eps": float (1e-12),
        "calib_words": int (10000)
      },
      "eval": {                       # optional section
        "snr_db": [floats],
        "mode": "GA" | "CA" ("GA"),
        "prefix_sizes": [ints] | null (null = full list),
        "min_block_errors": int (100),
        "max_trials": int (10000000),
        "batch": int (500),
        "rate": float | null (null = computed),
        "trace_trials": int (0)
      }
    }
"""

import json
from dataclasses import dataclass

from .channel import SNRRange
from .codec import CodecConfig
from .crc import CRCSpec
from .errors import ConfigError
from .evaluation import EvalConfig
from .training import TrainConfig


def _check_keys(section: dict, allowed: set, required: set, where: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be an object, got {type(section).__name__}")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    missing = required - set(section)
    if missing:
        raise ConfigError(f"missing required key(s) in {where}: {', '.join(sorted(missing))}")


def _typed(section: dict, key: str, types, where: str, default=None):
    if key not in section or section[key] is None:
        return default
    value = section[key]
    if types is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, types) or isinstance(value, bool) and types is not bool:
        raise ConfigError(f"{where}.{key} has wrong type {type(value).__name__}")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    seed: int
    model: CodecConfig
    crc: CRCSpec | None
    train: TrainConfig | None
    eval: EvalConfig | None
    resolved: dict  # defaults filled in; embedded in artifacts


def _parse_model(section: dict) -> CodecConfig:
    allowed = {
        "block_len", "list_size", "iterations", "variant", "channels",
        "kernel", "layers", "branches",
    }
    _check_keys(section, allowed, {"block_len", "list_size", "iterations"}, "model")
    try:
        return CodecConfig(
            block_len=_typed(section, "block_len", int, "model"),
            list_size=_typed(section, "list_size", int, "model"),
            iterations=_typed(section, "iterations", int, "model"),
            variant=_typed(section, "variant", str, "model", "ir_ae"),
            channels=_typed(section, "channels", int, "model", 100),
            kernel=_typed(section, "kernel", int, "model", 5),
            layers=_typed(section, "layers", int, "model", 5),
            branches=_typed(section, "branches", int, "model", 3),
        )
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc


def _parse_train(section: dict, model: CodecConfig, seed: int) -> TrainConfig:
    allowed = {
        "t_enc", "t_dec", "encoder_snr_db", "decoder_snr_db", "schedule",
        "max_epochs", "patience", "clamp_eps", "calib_words",
    }
    required = {"t_enc", "t_dec", "encoder_snr_db", "decoder_snr_db", "schedule", "max_epochs"}
    _check_keys(section, allowed, required, "train")
    dec_range = section["decoder_snr_db"]
    if not isinstance(dec_range, list) or len(dec_range) != 2:
        raise ConfigError("train.decoder_snr_db must be a [low, high] pair")
    schedule = section["schedule"]
    if not isinstance(schedule, list) or not schedule or not all(
        isinstance(s, list) and len(s) == 2 for s in schedule
    ):
        raise ConfigError("train.schedule must be a non-empty list of [lr, batch] pairs")
    try:
        return TrainConfig(
            codec=model,
            t_enc=_typed(section, "t_enc", int, "train"),
            t_dec=_typed(section, "t_dec", int, "train"),
            enc_snr_db=_typed(section, "encoder_snr_db", (int, float), "train"),
            dec_snr=SNRRange(float(dec_range[0]), float(dec_range[1])),
            schedule=tuple((float(lr), int(b)) for lr, b in schedule),
            max_epochs=_typed(section, "max_epochs", int, "train"),
            seed=seed,
            patience=_typed(section, "patience", int, "train", 10),
            clamp_eps=_typed(section, "clamp_eps", float, "train", 1e-12),
            calib_words=_typed(section, "calib_words", int, "train", 10_000),
        )
    except ValueError as exc:
        raise ConfigError(f"train: {exc}") from exc


def _parse_eval(section: dict, crc: CRCSpec | None, seed: int) -> EvalConfig:
    allowed = {
        "snr_db", "mode", "prefix_sizes", "min_block_errors", "max_trials",
        "batch", "rate", "trace_trials",
    }
    _check_keys(section, allowed, {"snr_db"}, "eval")
    grid = section["snr_db"]
    if not isinstance(grid, list) or not grid:
        raise ConfigError("eval.snr_db must be a non-empty list")
    prefixes = section.get("prefix_sizes")
    if prefixes is not None and not isinstance(prefixes, list):
        raise ConfigError("eval.prefix_sizes must be a list or null")
    try:
        return EvalConfig(
            snr_db=tuple(float(s) for s in grid),
            mode=_typed(section, "mode", str, "eval", "GA"),
            prefix_sizes=tuple(int(p) for p in prefixes) if prefixes is not None else None,
            min_block_errors=_typed(section, "min_block_errors", int, "eval", 100),
            max_trials=_typed(section, "max_trials", int, "eval", 10_000_000),
            batch=_typed(section, "batch", int, "eval", 500),
            seed=seed,
            crc=crc,
            rate=_typed(section, "rate", float, "eval"),
            trace_trials=_typed(section, "trace_trials", int, "eval", 0),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"eval: {exc}") from exc


def parse_experiment(raw: dict, seed_override: int | None = None) -> ExperimentConfig:
    """Validate a config dict and fill in defaults."""
    _check_keys(raw, {"name", "seed", "model", "crc", "train", "eval"}, {"name", "seed", "model"}, "config")
    name = _typed(raw, "name", str, "config")
    seed = _typed(raw, "seed", int, "config")
    if seed_override is not None:
        seed = int(seed_override)
    if not name:
        raise ConfigError("config.name must be a non-empty string")
    if seed < 0 or seed >= 2**64:
        raise ConfigError("config.seed must be an unsigned 64-bit integer")
    model = _parse_model(raw["model"])
    crc = None
    if raw.get("crc") is not None:
        crc_str = _typed(raw, "crc", str, "config")
        try:
            crc = CRCSpec.from_string(crc_str)
        except ValueError as exc:
            raise ConfigError(f"crc: {exc}") from exc
        if crc.degree >= model.block_len:
            raise ConfigError(
                f"CRC degree {crc.degree} must be smaller than block length {model.block_len}"
            )
    train = _parse_train(raw["train"], model, seed) if raw.get("train") is not None else None
    eval_cfg = _parse_eval(raw["eval"], crc, seed) if raw.get("eval") is not None else None

    resolved = {
        "name": name,
        "seed": seed,
        "model": model.to_dict(),
        "crc": crc.to_string() if crc else None,
    }
    if train:
        resolved["train"] = {
            "t_enc": train.t_enc,
            "t_dec": train.t_dec,
            "encoder_snr_db": train.enc_snr_db,
            "decoder_snr_db": [train.dec_snr.low_db, train.dec_snr.high_db],
            "schedule": [[lr, b] for lr, b in train.schedule],
            "max_epochs": train.max_epochs,
            "patience": train.patience,
            "clamp_eps": train.clamp_eps,
            "calib_words": train.calib_words,
        }
    if eval_cfg:
        resolved["eval"] = {
            "snr_db": list(eval_cfg.snr_db),
            "mode": eval_cfg.mode,
            "prefix_sizes": list(eval_cfg.prefix_sizes) if eval_cfg.prefix_sizes else None,
            "min_block_errors": eval_cfg.min_block_errors,
            "max_trials": eval_cfg.max_trials,
            "batch": eval_cfg.batch,
            "rate": eval_cfg.rate,
            "trace_trials": eval_cfg.trace_trials,
        }
    return ExperimentConfig(
        name=name, seed=seed, model=model, crc=crc, train=train, eval=eval_cfg, resolved=resolved
    )


def load_experiment(path, seed_override: int | None = None) -> ExperimentConfig:
    """Load and validate an experiment config file."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_experiment(raw, seed_override)

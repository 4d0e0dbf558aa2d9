"""Experiment configuration: a strict JSON document with `model`, `mc`,
`output`, and `selftest` blocks.  Unknown keys are rejected rather than
ignored, so a typo cannot silently misconfigure a run.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .model import FRAME_MODES, SpectralModel, make_model_from_table, make_powerlaw_model

FORMATS = ("csv", "json", "svg")
FAULT_MODES = ("none", "grid_band", "sampler_scale")


class ConfigError(ValueError):
    """Invalid or unparsable experiment configuration."""


@dataclass(frozen=True)
class ModelConfig:
    L_max: int = 64
    d: int = 6
    A: float = 1.0
    alpha: float = 3.0
    beta: float = 2.0
    frame_mode: str = "canonical"
    frame_seed: int = 0
    lambda_table: tuple[tuple[float, ...], ...] | None = None


@dataclass(frozen=True)
class McConfig:
    replicates: int = 20000
    master_seed: int = 20260810
    ells: tuple[int, ...] = (4, 16, 64)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "spherefield_out"
    formats: tuple[str, ...] = ("csv", "json", "svg")


@dataclass(frozen=True)
class SelftestConfig:
    inject_fault: str = "none"


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    mc: McConfig = field(default_factory=McConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    selftest: SelftestConfig = field(default_factory=SelftestConfig)


def _require_keys(block: dict, allowed: set[str], where: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _parse_model(block: dict) -> ModelConfig:
    _require_keys(
        block,
        {"L_max", "d", "A", "alpha", "beta", "frame_mode", "frame_seed", "lambda_table"},
        "model",
    )
    defaults = ModelConfig()
    if "lambda_table" in block:
        for key in ("A", "alpha", "beta"):
            if key in block:
                raise ConfigError("model.lambda_table excludes the power-law keys A/alpha/beta")
        table = tuple(tuple(float(v) for v in row) for row in block["lambda_table"])
        if not table or any(len(row) != len(table[0]) for row in table):
            raise ConfigError("model.lambda_table must be a non-empty rectangular array")
        return ModelConfig(
            L_max=len(table) - 1,
            d=len(table[0]),
            frame_mode=str(block.get("frame_mode", defaults.frame_mode)),
            frame_seed=int(block.get("frame_seed", defaults.frame_seed)),
            lambda_table=table,
        )
    cfg = ModelConfig(
        L_max=int(block.get("L_max", defaults.L_max)),
        d=int(block.get("d", defaults.d)),
        A=float(block.get("A", defaults.A)),
        alpha=float(block.get("alpha", defaults.alpha)),
        beta=float(block.get("beta", defaults.beta)),
        frame_mode=str(block.get("frame_mode", defaults.frame_mode)),
        frame_seed=int(block.get("frame_seed", defaults.frame_seed)),
    )
    if cfg.L_max < 0 or cfg.d < 1:
        raise ConfigError(f"invalid model dimensions: L_max={cfg.L_max}, d={cfg.d}")
    return cfg


def _parse_config(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration document must be a JSON object")
    _require_keys(doc, {"model", "mc", "output", "selftest"}, "config")
    model = _parse_model(doc.get("model", {}))

    mc_block = doc.get("mc", {})
    _require_keys(mc_block, {"replicates", "master_seed", "ells"}, "mc")
    mc_defaults = McConfig()
    if "ells" in mc_block:
        ells = tuple(int(e) for e in mc_block["ells"])
    else:
        # Default degrees, clipped to the model band limit.
        ells = tuple(e for e in mc_defaults.ells if e <= model.L_max) or (model.L_max,)
    mc = McConfig(
        replicates=int(mc_block.get("replicates", mc_defaults.replicates)),
        master_seed=int(mc_block.get("master_seed", mc_defaults.master_seed)),
        ells=ells,
    )
    if mc.replicates < 1:
        raise ConfigError(f"mc.replicates must be positive, got {mc.replicates}")
    if any(e < 0 or e > model.L_max for e in mc.ells):
        raise ConfigError(f"mc.ells {list(mc.ells)} must lie within [0, {model.L_max}]")
    if not 0 <= mc.master_seed < 2**64:
        raise ConfigError("mc.master_seed must be a 64-bit unsigned integer")

    out_block = doc.get("output", {})
    _require_keys(out_block, {"directory", "formats"}, "output")
    out_defaults = OutputConfig()
    output = OutputConfig(
        directory=str(out_block.get("directory", out_defaults.directory)),
        formats=tuple(str(f) for f in out_block.get("formats", out_defaults.formats)),
    )
    bad = [f for f in output.formats if f not in FORMATS]
    if bad:
        raise ConfigError(f"unsupported output format(s): {', '.join(bad)}")

    st_block = doc.get("selftest", {})
    _require_keys(st_block, {"inject_fault"}, "selftest")
    selftest = SelftestConfig(inject_fault=str(st_block.get("inject_fault", "none")))
    if selftest.inject_fault not in FAULT_MODES:
        raise ConfigError(
            f"selftest.inject_fault must be one of {FAULT_MODES}, got {selftest.inject_fault!r}"
        )
    if model.frame_mode not in FRAME_MODES:
        raise ConfigError(f"model.frame_mode must be one of {FRAME_MODES}")
    return ExperimentConfig(model=model, mc=mc, output=output, selftest=selftest)


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a configuration document; unknown keys are errors."""
    return _parse_config(doc)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
    return _parse_config(doc)


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


def config_to_dict(cfg: ExperimentConfig) -> dict:
    model: dict = {"frame_mode": cfg.model.frame_mode, "frame_seed": cfg.model.frame_seed}
    if cfg.model.lambda_table is not None:
        model["lambda_table"] = [list(row) for row in cfg.model.lambda_table]
    else:
        model.update(
            L_max=cfg.model.L_max,
            d=cfg.model.d,
            A=cfg.model.A,
            alpha=cfg.model.alpha,
            beta=cfg.model.beta,
        )
    return {
        "model": model,
        "mc": {
            "replicates": cfg.mc.replicates,
            "master_seed": cfg.mc.master_seed,
            "ells": list(cfg.mc.ells),
        },
        "output": {"directory": cfg.output.directory, "formats": list(cfg.output.formats)},
        "selftest": {"inject_fault": cfg.selftest.inject_fault},
    }


def config_hash(cfg: ExperimentConfig) -> str:
    """SHA-256 of the canonicalized scientific payload.

    Stable under key reordering, and independent of the output block:
    where results are written must not change what they are.
    """
    doc = config_to_dict(cfg)
    doc.pop("output", None)
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_model(cfg: ModelConfig) -> SpectralModel:
    if cfg.lambda_table is not None:
        return make_model_from_table(
            np.asarray(cfg.lambda_table, dtype=float),
            frame_mode=cfg.frame_mode,
            frame_seed=cfg.frame_seed,
        )
    return make_powerlaw_model(
        cfg.L_max,
        cfg.d,
        cfg.A,
        cfg.alpha,
        cfg.beta,
        frame_mode=cfg.frame_mode,
        frame_seed=cfg.frame_seed,
    )

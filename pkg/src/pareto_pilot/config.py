"""JSON configuration for sessions, batches and the HTTP service.

A config file has sections ``normalization``, ``oracle``, ``user_model``,
``acquisition``, ``priors`` and ``loop``; every field has a default, so an
empty object is a valid config.  Validation errors name the offending
``section.field``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .acquisition import AcquisitionConfig
from .front import CurveKind, FrontPrior, GompertzPrior, SigmoidPrior
from .oracles import (
    ClosedFormLogisticOracle,
    ExternalOracle,
    OracleSpec,
    TabulatedOracle,
)
from .preference import UserModelConfig
from .scaling import NormalizationSpec

__all__ = [
    "ConfigError",
    "LoopConfig",
    "SessionConfig",
    "parse_config",
    "load_config",
    "config_to_dict",
    "default_config_dict",
]

CURVE_STRATEGIES = ("kg", "random", "pair_kg", "random_pair")
PRIVACY_STRATEGIES = ("kg", "random")


class ConfigError(ValueError):
    """Invalid configuration; the message names the section and field."""


@dataclass(frozen=True)
class LoopConfig:
    num_steps: int = 20
    front_particles: int = 4000
    pref_particles: int = 2000
    curve_strategy: str = "kg"
    privacy_strategy: str = "kg"
    adaptive_interleaving: bool = False
    resample_fraction: float = 0.0
    dirichlet: tuple[float, float] = (2.0, 2.0)

    def __post_init__(self):
        if self.num_steps < 1:
            raise ConfigError("loop.num_steps must be >= 1")
        if self.front_particles < 1 or self.pref_particles < 1:
            raise ConfigError("loop particle counts must be >= 1")
        if self.curve_strategy not in CURVE_STRATEGIES:
            raise ConfigError(
                f"loop.curve_strategy must be one of {CURVE_STRATEGIES}, got {self.curve_strategy!r}"
            )
        if self.privacy_strategy not in PRIVACY_STRATEGIES:
            raise ConfigError(
                f"loop.privacy_strategy must be one of {PRIVACY_STRATEGIES}, "
                f"got {self.privacy_strategy!r}"
            )
        if not (0.0 <= self.resample_fraction < 1.0):
            raise ConfigError("loop.resample_fraction must lie in [0, 1)")
        if any(a <= 0 for a in self.dirichlet):
            raise ConfigError("loop.dirichlet parameters must be > 0")
        if self.adaptive_interleaving and (
            self.curve_strategy != "kg" or self.privacy_strategy != "kg"
        ):
            raise ConfigError(
                "loop.adaptive_interleaving arbitrates between KG values and so "
                "requires curve_strategy and privacy_strategy both 'kg'"
            )


@dataclass(frozen=True)
class SessionConfig:
    normalization: NormalizationSpec
    oracle: OracleSpec
    user_model: UserModelConfig
    simulator_T: float
    acquisition: AcquisitionConfig
    kind: CurveKind
    prior: FrontPrior
    loop: LoopConfig


def _section(raw: dict, name: str) -> dict:
    value = raw.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: expected an object, got {type(value).__name__}")
    return dict(value)


def _take(section: dict, section_name: str, key: str, default, kind=float):
    value = section.pop(key, default)
    try:
        if kind is float:
            value = float(value)
        elif kind is int:
            coerced = int(value)
            if coerced != value:
                raise ValueError
            value = coerced
        elif kind is str:
            if not isinstance(value, str):
                raise ValueError
    except (TypeError, ValueError):
        raise ConfigError(f"{section_name}.{key}: expected {kind.__name__}, got {value!r}")
    return value


def _reject_unknown(section: dict, name: str):
    if section:
        raise ConfigError(f"{name}: unknown field(s) {sorted(section)}")


def _parse_normalization(raw: dict, oracle: OracleSpec) -> NormalizationSpec:
    sec = _section(raw, "normalization")
    # Tabulated data carries its own natural bounds.
    if isinstance(oracle, TabulatedOracle):
        eps_default = (float(oracle.epsilons[0]), float(oracle.epsilons[-1]))
        alpha_default = (float(oracle.accuracies.min()), float(oracle.accuracies.max()))
    else:
        eps_default = (0.01, 0.5)
        alpha_default = (0.5, 1.0)
    spec_kwargs = dict(
        eps_min=_take(sec, "normalization", "eps_min", eps_default[0]),
        eps_max=_take(sec, "normalization", "eps_max", eps_default[1]),
        alpha_min=_take(sec, "normalization", "alpha_min", alpha_default[0]),
        alpha_max=_take(sec, "normalization", "alpha_max", alpha_default[1]),
    )
    _reject_unknown(sec, "normalization")
    try:
        return NormalizationSpec(**spec_kwargs)
    except ValueError as exc:
        raise ConfigError(f"normalization: {exc}") from exc


def _parse_oracle(raw: dict, base_dir: Path) -> OracleSpec:
    sec = _section(raw, "oracle")
    kind = _take(sec, "oracle", "kind", "closed_form_logistic", str)
    noise_sigma = _take(sec, "oracle", "noise_sigma", 0.01)
    delta = _take(sec, "oracle", "delta", 1e-5)
    try:
        if kind == "closed_form_logistic":
            spec = ClosedFormLogisticOracle(
                C=_take(sec, "oracle", "C", 5.0), noise_sigma=noise_sigma, delta=delta
            )
        elif kind == "tabulated":
            if "epsilons" in sec or "accuracies" in sec:
                # Inline table, as written by config snapshots.
                eps = np.asarray(sec.pop("epsilons", []), dtype=float)
                acc = np.asarray(sec.pop("accuracies", []), dtype=float)
                if len(eps) < 2 or len(eps) != len(acc):
                    raise ConfigError("oracle.epsilons/accuracies must be equal-length, >= 2")
                spec = TabulatedOracle(
                    epsilons=eps, accuracies=acc, noise_sigma=noise_sigma, delta=delta
                )
            else:
                path = _take(sec, "oracle", "path", None, str)
                if path is None:
                    raise ConfigError("oracle.path is required for a tabulated oracle")
                resolved = Path(path)
                if not resolved.is_absolute():
                    resolved = base_dir / resolved
                if not resolved.exists():
                    raise ConfigError(f"oracle.path: file not found: {resolved}")
                spec = TabulatedOracle.from_csv(resolved, noise_sigma=noise_sigma, delta=delta)
        elif kind == "external":
            command = _take(sec, "oracle", "command", None, str)
            if command is None:
                raise ConfigError("oracle.command is required for an external oracle")
            if "{epsilon}" not in command:
                raise ConfigError("oracle.command must contain the {epsilon} placeholder")
            spec = ExternalOracle(command_template=command, noise_sigma=noise_sigma, delta=delta)
        else:
            raise ConfigError(f"oracle.kind: unknown oracle kind {kind!r}")
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"oracle: {exc}") from exc
    _reject_unknown(sec, "oracle")
    return spec


def _pair(section: dict, section_name: str, key: str, default: tuple[float, float]):
    value = section.pop(key, list(default))
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ConfigError(f"{section_name}.{key}: expected a pair of numbers, got {value!r}")
    try:
        return (float(value[0]), float(value[1]))
    except (TypeError, ValueError):
        raise ConfigError(f"{section_name}.{key}: expected a pair of numbers, got {value!r}")


def _parse_priors(raw: dict) -> tuple[CurveKind, FrontPrior]:
    sec = _section(raw, "priors")
    kind_name = _take(sec, "priors", "kind", "sigmoid", str)
    try:
        kind = CurveKind(kind_name)
    except ValueError:
        raise ConfigError(f"priors.kind: unknown curve kind {kind_name!r}")
    if kind == CurveKind.SIGMOID:
        prior = SigmoidPrior(
            L_beta=_pair(sec, "priors", "L", (40.0, 2.0)),
            k_lognormal=_pair(sec, "priors", "k", (math.log(10.0), 0.2)),
            c_beta=_pair(sec, "priors", "c", (2.0, 2.0)),
            b_normal=_pair(sec, "priors", "b", (0.0, 0.1)),
            sigma_gamma=_pair(sec, "priors", "sigma", (0.5, 0.1)),
        )
    else:
        scale = _take(sec, "priors", "gompertz_scale", "normalized", str)
        if scale not in ("normalized", "raw"):
            raise ConfigError("priors.gompertz_scale must be 'normalized' or 'raw'")
        c_default = (math.log(100.0), 10.0) if scale == "normalized" else (1.0, 10.0)
        prior = GompertzPrior(
            L_uniform=_pair(sec, "priors", "L", (0.8, 4.0)),
            k_uniform=_pair(sec, "priors", "k", (10.0, 100.0)),
            c_uniform=_pair(sec, "priors", "c", c_default),
            b_uniform=_pair(sec, "priors", "b", (0.8, 1.1)),
            sigma_gamma=_pair(sec, "priors", "sigma", (0.5, 0.1)),
        )
    _reject_unknown(sec, "priors")
    return kind, prior


def parse_config(raw: dict, base_dir: str | Path = ".") -> SessionConfig:
    """Build a validated SessionConfig from a parsed JSON object."""
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be an object, got {type(raw).__name__}")
    known = {"normalization", "oracle", "user_model", "acquisition", "priors", "loop"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config section(s) {sorted(unknown)}")
    base_dir = Path(base_dir)

    oracle = _parse_oracle(raw, base_dir)
    normalization = _parse_normalization(raw, oracle)

    um = _section(raw, "user_model")
    T = _take(um, "user_model", "T", 0.2)
    q = _take(um, "user_model", "q", 101, int)
    simulator_T = _take(um, "user_model", "simulator_T", T)
    _reject_unknown(um, "user_model")
    try:
        user_model = UserModelConfig(T=T, q=q)
    except ValueError as exc:
        raise ConfigError(f"user_model: {exc}") from exc
    if simulator_T <= 0:
        raise ConfigError("user_model.simulator_T must be > 0")

    acq = _section(raw, "acquisition")
    try:
        acquisition = AcquisitionConfig(
            p_grid_size=_take(acq, "acquisition", "p_grid_size", 201, int),
            num_sims=_take(acq, "acquisition", "num_sims", 64, int),
            num_curve_candidates=_take(acq, "acquisition", "num_curve_candidates", 16, int),
            num_p_candidates=_take(acq, "acquisition", "num_p_candidates", 33, int),
            num_pair_candidates=_take(acq, "acquisition", "num_pair_candidates", 16, int),
            exact_enumeration_max_q=_take(acq, "acquisition", "exact_enumeration_max_q", 4, int),
            T=T,
        )
    except ValueError as exc:
        raise ConfigError(f"acquisition: {exc}") from exc
    _reject_unknown(acq, "acquisition")

    kind, prior = _parse_priors(raw)

    loop = _section(raw, "loop")
    adaptive = loop.pop("adaptive_interleaving", False)
    if not isinstance(adaptive, bool):
        raise ConfigError("loop.adaptive_interleaving must be a boolean")
    loop_cfg = LoopConfig(
        num_steps=_take(loop, "loop", "num_steps", 20, int),
        front_particles=_take(loop, "loop", "front_particles", 4000, int),
        pref_particles=_take(loop, "loop", "pref_particles", 2000, int),
        curve_strategy=_take(loop, "loop", "curve_strategy", "kg", str),
        privacy_strategy=_take(loop, "loop", "privacy_strategy", "kg", str),
        adaptive_interleaving=adaptive,
        resample_fraction=_take(loop, "loop", "resample_fraction", 0.0),
        dirichlet=_pair(loop, "loop", "dirichlet", (2.0, 2.0)),
    )
    _reject_unknown(loop, "loop")

    return SessionConfig(
        normalization=normalization,
        oracle=oracle,
        user_model=user_model,
        simulator_T=simulator_T,
        acquisition=acquisition,
        kind=kind,
        prior=prior,
        loop=loop_cfg,
    )


def load_config(path: str | Path) -> SessionConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_config(raw, base_dir=path.parent)


def config_to_dict(cfg: SessionConfig) -> dict[str, Any]:
    """Canonical JSON-ready snapshot of a session configuration."""
    if isinstance(cfg.oracle, ClosedFormLogisticOracle):
        oracle: dict[str, Any] = {"kind": "closed_form_logistic", "C": cfg.oracle.C}
    elif isinstance(cfg.oracle, TabulatedOracle):
        oracle = {
            "kind": "tabulated",
            "epsilons": [float(e) for e in cfg.oracle.epsilons],
            "accuracies": [float(a) for a in cfg.oracle.accuracies],
        }
    else:
        oracle = {"kind": "external", "command": cfg.oracle.command_template}
    oracle["noise_sigma"] = cfg.oracle.noise_sigma
    oracle["delta"] = cfg.oracle.delta

    if isinstance(cfg.prior, SigmoidPrior):
        priors = {
            "kind": "sigmoid",
            "L": list(cfg.prior.L_beta),
            "k": list(cfg.prior.k_lognormal),
            "c": list(cfg.prior.c_beta),
            "b": list(cfg.prior.b_normal),
            "sigma": list(cfg.prior.sigma_gamma),
        }
    else:
        priors = {
            "kind": "gompertz",
            "L": list(cfg.prior.L_uniform),
            "k": list(cfg.prior.k_uniform),
            "c": list(cfg.prior.c_uniform),
            "b": list(cfg.prior.b_uniform),
            "sigma": list(cfg.prior.sigma_gamma),
        }

    return {
        "normalization": {
            "eps_min": cfg.normalization.eps_min,
            "eps_max": cfg.normalization.eps_max,
            "alpha_min": cfg.normalization.alpha_min,
            "alpha_max": cfg.normalization.alpha_max,
        },
        "oracle": oracle,
        "user_model": {
            "T": cfg.user_model.T,
            "q": cfg.user_model.q,
            "simulator_T": cfg.simulator_T,
        },
        "acquisition": {
            "p_grid_size": cfg.acquisition.p_grid_size,
            "num_sims": cfg.acquisition.num_sims,
            "num_curve_candidates": cfg.acquisition.num_curve_candidates,
            "num_p_candidates": cfg.acquisition.num_p_candidates,
            "num_pair_candidates": cfg.acquisition.num_pair_candidates,
            "exact_enumeration_max_q": cfg.acquisition.exact_enumeration_max_q,
        },
        "priors": priors,
        "loop": {
            "num_steps": cfg.loop.num_steps,
            "front_particles": cfg.loop.front_particles,
            "pref_particles": cfg.loop.pref_particles,
            "curve_strategy": cfg.loop.curve_strategy,
            "privacy_strategy": cfg.loop.privacy_strategy,
            "adaptive_interleaving": cfg.loop.adaptive_interleaving,
            "resample_fraction": cfg.loop.resample_fraction,
            "dirichlet": list(cfg.loop.dirichlet),
        },
    }


def default_config_dict() -> dict[str, Any]:
    return config_to_dict(parse_config({}))


def merge_overrides(base: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """Section-wise merge of config overrides onto a base config dict."""
    merged = {sec: dict(fields) for sec, fields in base.items()}
    for sec, fields in (overrides or {}).items():
        if not isinstance(fields, dict):
            raise ConfigError(f"{sec}: expected an object of field overrides")
        merged.setdefault(sec, {}).update(fields)
    return merged

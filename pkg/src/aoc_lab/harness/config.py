"""TOML experiment configuration: parsing, validation, canonical hashing."""

from __future__ import annotations

import hashlib
import json
import sys

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from ..dists import parse_dist
from ..errors import ConfigError
from ..slotted import SlottedConfig
from ..tandem import TandemConfig

EXPERIMENT_KINDS = ("fig6_soft_sweep", "fig7_hard_sweep", "fig8_tradeoff",
                    "fig9_slotted", "custom")


def load_config(path) -> dict:
    """Parse and validate a TOML experiment file into a plain dict."""
    try:
        with open(path, "rb") as fh:
            raw = _toml.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML syntax error: {exc}") from exc
    validate_config(raw, where=str(path))
    return raw


def validate_config(cfg: dict, where: str = "config") -> None:
    exp = cfg.get("experiment", {})
    kind = exp.get("kind")
    if kind is not None and kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"{where}: experiment.kind must be one of {EXPERIMENT_KINDS}, "
                          f"got {kind!r}")
    for key in ("seed", "replications"):
        if key in exp and (not isinstance(exp[key], int) or exp[key] < 0):
            raise ConfigError(f"{where}: experiment.{key} must be a nonnegative integer")
    if "tandem" in cfg:
        tandem_config_from(cfg["tandem"], where=f"{where}:tandem")
    if "slotted" in cfg:
        slotted_config_from(cfg["slotted"], where=f"{where}:slotted")


def tandem_config_from(sec: dict, where: str = "tandem", **overrides) -> TandemConfig:
    """Build a TandemConfig from a config section with tagged distribution records."""
    try:
        kwargs = dict(
            arrival=parse_dist(_need(sec, "arrival", where)),
            transmit=parse_dist(_need(sec, "transmit", where)),
            compute=parse_dist(_need(sec, "compute", where)),
            task_count=int(_need(sec, "task_count", where)),
            w=float(sec.get("w", float("inf"))),
            deadline_kind=sec.get("deadline", sec.get("deadline_kind", "soft")),
            seed=int(sec.get("seed", 0)),
        )
        if "warmup" in sec:
            kwargs["warmup"] = int(sec["warmup"])
        kwargs.update(overrides)
        return TandemConfig(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def slotted_config_from(sec: dict, where: str = "slotted", **overrides) -> SlottedConfig:
    try:
        n = int(_need(sec, "n_sources", where))
        kwargs = dict(
            n_sources=n,
            lam=_broadcast(sec.get("lambda", sec.get("lam")), n, f"{where}.lambda"),
            mu_t=_broadcast(_need(sec, "mu_t", where), n, f"{where}.mu_t"),
            horizon=int(_need(sec, "horizon", where)),
            w=float(sec.get("w", float("inf"))),
            deadline_kind=sec.get("deadline", sec.get("deadline_kind", "soft")),
            policy=sec.get("policy", "maxweight"),
            seed=int(sec.get("seed", 0)),
            replications=int(sec.get("replications", 1)),
        )
        if "beta" in sec:
            kwargs["beta"] = _broadcast(sec["beta"], n, f"{where}.beta")
        if "q" in sec:
            kwargs["q"] = tuple(float(v) for v in sec["q"])
        if "warmup" in sec:
            kwargs["warmup"] = int(sec["warmup"])
        if "preempt_in_service" in sec:
            kwargs["preempt_in_service"] = bool(sec["preempt_in_service"])
        kwargs.update(overrides)
        return SlottedConfig(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _need(sec: dict, key: str, where: str):
    if key not in sec:
        raise ConfigError(f"{where}.{key} is required")
    return sec[key]


def _broadcast(value, n: int, where: str) -> tuple:
    if value is None:
        raise ConfigError(f"{where} is required")
    if isinstance(value, (int, float)):
        return tuple(float(value) for _ in range(n))
    out = tuple(float(v) for v in value)
    if len(out) != n:
        raise ConfigError(f"{where} must have {n} entries, got {len(out)}")
    return out


def config_hash(cfg: dict) -> str:
    """Stable hash of the canonical JSON form."""
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()

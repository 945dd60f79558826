"""Deterministic random variate streams and parametric service/inter-arrival laws.

Streams are counter-based (numpy Philox keyed by ``(seed, stream_id)``), so
distinct stream ids give statistically independent sequences and replications
can be parallelized without sequence overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ConfigError, NumericError
from .grids import DensityGrid

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class RngStream:
    """A reproducible variate stream identified by (seed, stream_id)."""

    seed: int
    stream_id: int
    gen: np.random.Generator = field(repr=False, compare=False)

    def spawn(self, offset: int) -> "RngStream":
        """Derive an independent stream with a shifted stream_id."""
        return make_stream(self.seed, self.stream_id + offset)


def make_stream(seed: int, stream_id: int) -> RngStream:
    """Create a stream; identical arguments give bit-identical sequences."""
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, stream_id], dtype=np.uint64)))
    return RngStream(seed=seed, stream_id=stream_id, gen=gen)


@dataclass(frozen=True)
class DistributionSpec:
    """A parametric nonnegative law: exponential, deterministic, gamma, uniform,
    or hyperexponential.

    Parameter meaning by kind:
      exponential       rate
      deterministic     value
      gamma             shape, rate
      uniform           lo, hi
      hyperexponential  weights, rates (parallel lists)
    """

    kind: str
    rate: float = 0.0
    value: float = 0.0
    shape: float = 0.0
    lo: float = 0.0
    hi: float = 0.0
    weights: tuple = ()
    rates: tuple = ()

    def __post_init__(self):
        k = self.kind
        if k == "exponential":
            _require(self.rate > 0, "exponential rate must be > 0")
        elif k == "deterministic":
            _require(self.value > 0, "deterministic value must be > 0")
        elif k == "gamma":
            _require(self.shape > 0 and self.rate > 0, "gamma shape and rate must be > 0")
        elif k == "uniform":
            _require(0 <= self.lo < self.hi, "uniform requires 0 <= lo < hi")
        elif k == "hyperexponential":
            w = np.asarray(self.weights, dtype=float)
            r = np.asarray(self.rates, dtype=float)
            _require(len(w) == len(r) > 0, "hyperexponential weights/rates must be parallel, non-empty")
            _require(np.all((w >= 0) & (w <= 1)), "hyperexponential weights must lie in [0, 1]")
            _require(abs(w.sum() - 1.0) <= _WEIGHT_TOL, "hyperexponential weights must sum to 1")
            _require(np.all(r > 0), "hyperexponential rates must be > 0")
        else:
            raise ConfigError(f"unknown distribution kind {k!r}")

    def mean(self) -> float:
        if self.kind == "exponential":
            return 1.0 / self.rate
        if self.kind == "deterministic":
            return self.value
        if self.kind == "gamma":
            return self.shape / self.rate
        if self.kind == "uniform":
            return 0.5 * (self.lo + self.hi)
        w = np.asarray(self.weights, float)
        r = np.asarray(self.rates, float)
        return float(np.sum(w / r))

    def variance(self) -> float:
        if self.kind == "exponential":
            return 1.0 / self.rate**2
        if self.kind == "deterministic":
            return 0.0
        if self.kind == "gamma":
            return self.shape / self.rate**2
        if self.kind == "uniform":
            return (self.hi - self.lo) ** 2 / 12.0
        w = np.asarray(self.weights, float)
        r = np.asarray(self.rates, float)
        second = float(np.sum(2.0 * w / r**2))
        return second - self.mean() ** 2

    def has_density(self) -> bool:
        return self.kind != "deterministic"

    def pdf(self, x) -> np.ndarray:
        """Density evaluated pointwise; zero outside the support."""
        x = np.asarray(x, dtype=float)
        if self.kind == "exponential":
            out = np.where(x >= 0, self.rate * np.exp(-self.rate * x), 0.0)
        elif self.kind == "gamma":
            lg = special.gammaln(self.shape)
            with np.errstate(divide="ignore", invalid="ignore"):
                logpdf = (
                    self.shape * math.log(self.rate)
                    + (self.shape - 1.0) * np.log(x)
                    - self.rate * x
                    - lg
                )
            out = np.where(x > 0, np.exp(logpdf), 0.0)
            if self.shape == 1.0:
                out = np.where(x == 0, self.rate, out)
        elif self.kind == "uniform":
            out = np.where((x >= self.lo) & (x <= self.hi), 1.0 / (self.hi - self.lo), 0.0)
        elif self.kind == "hyperexponential":
            w = np.asarray(self.weights, float)[:, None]
            r = np.asarray(self.rates, float)[:, None]
            flat = np.atleast_1d(x)[None, :]
            vals = np.sum(w * r * np.exp(-r * flat), axis=0)
            out = np.where(np.atleast_1d(x) >= 0, vals, 0.0).reshape(x.shape)
        else:
            raise ConfigError("deterministic laws have no density")
        return out


def sample(spec: DistributionSpec, stream: RngStream, size: int | None = None):
    """Draw from spec's law, advancing the stream. Scalar when size is None."""
    n = 1 if size is None else int(size)
    g = stream.gen
    if spec.kind == "exponential":
        out = g.exponential(1.0 / spec.rate, size=n)
    elif spec.kind == "deterministic":
        out = np.full(n, spec.value)
    elif spec.kind == "gamma":
        out = g.gamma(spec.shape, 1.0 / spec.rate, size=n)
    elif spec.kind == "uniform":
        out = g.uniform(spec.lo, spec.hi, size=n)
    elif spec.kind == "hyperexponential":
        w = np.asarray(spec.weights, float)
        r = np.asarray(spec.rates, float)
        branch = g.choice(len(w), size=n, p=w / w.sum())
        out = g.exponential(1.0, size=n) / r[branch]
    else:  # pragma: no cover - rejected in __post_init__
        raise ConfigError(f"unknown distribution kind {spec.kind!r}")
    return float(out[0]) if size is None else out


def density_grid(spec: DistributionSpec, lo: float, hi: float, n: int) -> DensityGrid:
    """Tabulate spec's density on a uniform grid; trapezoidal mass travels with it."""
    if not spec.has_density():
        raise ConfigError("deterministic laws have no density to tabulate")
    if not (lo >= 0 and hi > lo and n >= 2):
        raise ConfigError("density_grid requires lo >= 0, hi > lo, n >= 2")
    x = np.linspace(lo, hi, n)
    values = spec.pdf(x)
    if not np.all(np.isfinite(values)):
        raise NumericError("non-finite density at a grid point")
    return DensityGrid(x=x, values=values)


def parse_dist(record: dict) -> DistributionSpec:
    """Parse a tagged record, e.g. {kind = "exp", rate = 3.0}, into a spec."""
    if not isinstance(record, dict) or "kind" not in record:
        raise ConfigError(f"distribution record must carry a 'kind': {record!r}")
    aliases = {
        "exp": "exponential",
        "exponential": "exponential",
        "det": "deterministic",
        "deterministic": "deterministic",
        "gamma": "gamma",
        "uniform": "uniform",
        "hyperexp": "hyperexponential",
        "hyperexponential": "hyperexponential",
    }
    kind = aliases.get(str(record["kind"]).lower())
    if kind is None:
        raise ConfigError(f"unknown distribution kind {record['kind']!r}")
    fields = {k: v for k, v in record.items() if k != "kind"}
    try:
        if kind == "hyperexponential":
            fields["weights"] = tuple(fields.get("weights", ()))
            fields["rates"] = tuple(fields.get("rates", ()))
        return DistributionSpec(kind=kind, **fields)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind}: {exc}") from exc


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)

"""Freshness-throughput trade-off exploration under the hard deadline.

For a throughput floor u, minimize the approximated average age over the
arrival rate subject to the approximated throughput exceeding u. The
objective is empirically unimodal in the arrival rate; a coarse scan brackets
the global grid minimum before golden-section refinement, guarding against
surprises. Each solution is a weakly Pareto-optimal point: no rate can
strictly improve freshness while still clearing the floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .mm1 import MM1Params, theta_hard_mm1_approx, throughput_mm1_approx

STRICT_MARGIN = 1e-12       # \Xi > u implemented as \Xi >= u + margin
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ParetoQuery:
    mu_t: float
    mu_c: float
    w: float
    u: float = 0.0
    lambda_range: tuple | None = None
    resolution: int = 96

    def __post_init__(self):
        if min(self.mu_t, self.mu_c) <= 0 or self.w < 0 or self.u < 0:
            raise ConfigError("rates must be positive, w and u nonnegative")
        if self.resolution < 16:
            raise ConfigError("resolution must be >= 16")
        top = min(self.mu_t, self.mu_c)
        rng = self.lambda_range
        if rng is None:
            rng = (1e-6 * top, (1.0 - 1e-9) * top)
        if not 0.0 < rng[0] < rng[1] <= top * (1.0 - 1e-12):
            raise ConfigError("lambda_range must be an interval inside (0, min mu)")
        object.__setattr__(self, "lambda_range", (float(rng[0]), float(rng[1])))


@dataclass(frozen=True)
class ParetoPoint:
    u: float
    lambda_star: float
    theta: float
    xi: float
    feasible: bool


def _evaluate(q: ParetoQuery, lam: float) -> tuple[float, float]:
    p = MM1Params(lam, q.mu_t, q.mu_c, q.w)
    return theta_hard_mm1_approx(p), throughput_mm1_approx(p)


def minimize_theta(q: ParetoQuery) -> ParetoPoint:
    """Coarse scan + golden-section refinement of the constrained minimum."""
    lo, hi = q.lambda_range
    grid = np.linspace(lo, hi, q.resolution)
    theta = np.empty_like(grid)
    xi = np.empty_like(grid)
    for j, lam in enumerate(grid):
        theta[j], xi[j] = _evaluate(q, float(lam))
    feas = xi >= q.u + STRICT_MARGIN
    if not feas.any():
        return ParetoPoint(q.u, math.nan, math.nan, math.nan, False)
    masked = np.where(feas, theta, math.inf)
    j = int(np.argmin(masked))
    a = float(grid[max(j - 1, 0)])
    b = float(grid[min(j + 1, len(grid) - 1)])
    lam_star = _golden_section(q, a, b)
    th, x = _evaluate(q, lam_star)
    if x < q.u + STRICT_MARGIN:      # refinement drifted out; keep the grid point
        lam_star = float(grid[j])
        th, x = theta[j], xi[j]
    return ParetoPoint(q.u, lam_star, float(th), float(x), True)


def _penalized(q: ParetoQuery, lam: float) -> float:
    th, x = _evaluate(q, lam)
    return th if x >= q.u + STRICT_MARGIN else math.inf


def _golden_section(q: ParetoQuery, a: float, b: float) -> float:
    tol = 1e-10 * (q.lambda_range[1] - q.lambda_range[0])
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = _penalized(q, c), _penalized(q, d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = _penalized(q, c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = _penalized(q, d)
    return 0.5 * (a + b)


def frontier(q_base: ParetoQuery, u_grid) -> list[ParetoPoint]:
    """One constrained minimum per ascending throughput floor."""
    us = [float(u) for u in u_grid]
    if any(b < a for a, b in zip(us, us[1:])):
        raise ConfigError("u_grid must be ascending")
    points = []
    for u in us:
        q = ParetoQuery(q_base.mu_t, q_base.mu_c, q_base.w, u,
                        q_base.lambda_range, q_base.resolution)
        points.append(minimize_theta(q))
    return points


def weak_pareto_check(point: ParetoPoint, q: ParetoQuery, probe_lambdas,
                      slack: float = 1e-9) -> bool:
    """True iff no probe rate strictly beats the point's freshness while
    clearing the floor. `slack` absorbs quadrature-level rounding."""
    if not point.feasible:
        raise ConfigError("weak_pareto_check applies to feasible points")
    cut = point.theta * (1.0 - slack)
    for lam in np.asarray(probe_lambdas, dtype=float):
        th, x = _evaluate(q, float(lam))
        if th < cut and x > point.u:
            return False
    return True

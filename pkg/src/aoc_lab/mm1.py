"""Closed forms and accurate approximations for the exponential tandem.

All quantities are for a stable two-stage FCFS line (Poisson arrivals at rate
lambda, exponential transmission/computation services at rates mu_t/mu_c) with
deadline w. Functions are pure; two-branch formulas switch to their equal-rate
form inside a relative tie tolerance because the generic branch cancels
catastrophically as mu_c -> mu_t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, StabilityError

EQUAL_RATE_RTOL = 1e-9


@dataclass(frozen=True)
class MM1Params:
    """Stable exponential-tandem parameters with the derived load quantities."""

    lam: float
    mu_t: float
    mu_c: float
    w: float

    def __post_init__(self):
        if not (self.lam > 0 and self.mu_t > 0 and self.mu_c > 0):
            raise ConfigError("rates must be strictly positive")
        if not self.lam < min(self.mu_t, self.mu_c):
            raise StabilityError(
                f"lambda={self.lam} must be < min(mu_t, mu_c)={min(self.mu_t, self.mu_c)}")
        if not self.w >= 0:
            raise ConfigError("deadline w must be >= 0 (math.inf allowed)")

    @property
    def rho_t(self) -> float:
        return self.lam / self.mu_t

    @property
    def rho_c(self) -> float:
        return self.lam / self.mu_c

    @property
    def delta_t(self) -> float:
        return 1.0 - self.rho_t

    @property
    def delta_c(self) -> float:
        return 1.0 - self.rho_c

    @property
    def zeta_t(self) -> float:
        return _zeta(self.mu_t * self.delta_t, self.w)

    @property
    def zeta_c(self) -> float:
        return _zeta(self.mu_c * self.delta_c, self.w)

    @property
    def equal_rates(self) -> bool:
        return abs(self.mu_t - self.mu_c) < EQUAL_RATE_RTOL * max(self.mu_t, self.mu_c)

    def swapped(self) -> "MM1Params":
        return MM1Params(self.lam, self.mu_c, self.mu_t, self.w)


def _zeta(a: float, w: float) -> float:
    return 0.0 if math.isinf(w) else math.exp(-a * w)


def _zeta1(a: float, w: float, zeta: float) -> float:
    """zeta * (1 + a*w) with the w=inf limit taken as 0."""
    return 0.0 if zeta == 0.0 else zeta * (1.0 + a * w)


def epsilon_w(p: MM1Params) -> float:
    """Stationary probability that a task's total delay exceeds w."""
    at, ac = p.mu_t * p.delta_t, p.mu_c * p.delta_c
    zt, zc = p.zeta_t, p.zeta_c
    if zt == 0.0 and zc == 0.0:
        return 0.0
    if p.equal_rates:
        return _zeta1(at, p.w, zt)
    return (ac * zt - at * zc) / (p.mu_c - p.mu_t)


def aoi_mm1_tandem(p: MM1Params) -> float:
    """Average age of information of the tandem (the no-deadline benchmark)."""
    lam, mt, mc = p.lam, p.mu_t, p.mu_c
    return (1.0 / lam + 1.0 / mt + 1.0 / mc
            + lam**2 / (mt**2 * (mt - lam))
            + lam**2 / (mc**2 * (mc - lam))
            + lam**2 / (mt * mc * (mt + mc - lam)))


def theta_soft_mm1(p: MM1Params) -> float:
    """Average age of computing under the soft deadline (exact closed form)."""
    lam, w = p.lam, p.w
    at, ac = p.mu_t * p.delta_t, p.mu_c * p.delta_c
    zt, zc = p.zeta_t, p.zeta_c
    if p.equal_rates:
        mt, dt, rt = p.mu_t, p.delta_t, p.rho_t
        base = (1.0 / lam + 2.0 / mt + 2.0 * rt**2 / (mt * dt)
                + rt**2 / (mt + mt * dt))
        if zt == 0.0:
            return base
        return base + lam * zt**2 * (1.0 + at * w) * (2.0 / (mt**2 * dt) + w / mt)
    base = aoi_mm1_tandem(p)
    if zt == 0.0 and zc == 0.0:
        return base
    extra = (lam * p.mu_c * (p.delta_c * at) ** 2 / (p.mu_c - p.mu_t) ** 2
             * (zt / at - zc / ac)
             * (zt / at**2 - zc / ac**2))
    return base + extra


@dataclass(frozen=True)
class MomentInputs:
    """Moment bundle for the general average-age expressions.

    Hinge moments are E[((T-w)^+)^2] and E[((T-S_c-w)^+)^2]; cycle moments
    describe M, the number of arrivals from one valid task to the next.
    """

    mean_x: float
    mean_x2: float
    mean_xt: float = 0.0
    hinge_t: float = 0.0
    hinge_t_minus_sc: float = 0.0
    eps_w: float = 0.0
    mean_tm: float = 0.0
    mean_m: float = 1.0
    mean_m2: float = 1.0

    def __post_init__(self):
        if self.mean_x2 < self.mean_x**2:
            raise ConfigError("E[X^2] must be >= E[X]^2")
        if not (self.mean_m2 >= self.mean_m**2 >= 1.0):
            raise ConfigError("M moments must satisfy E[M^2] >= E[M]^2 >= 1")
        if not 0.0 <= self.eps_w <= 1.0:
            raise ConfigError("eps_w must be a probability")


def theta_soft_from_moments(m: MomentInputs) -> float:
    """Average age of computing (soft deadline) from raw moments."""
    if m.mean_x <= 0:
        raise ConfigError("E[X] must be positive")
    return ((m.mean_xt + 0.5 * m.mean_x2) / m.mean_x
            + m.eps_w * (m.hinge_t - m.hinge_t_minus_sc) / (2.0 * m.mean_x))


def theta_hard_from_moments(m: MomentInputs) -> float:
    """Average age of computing (hard deadline) from decoupled cycle moments."""
    if m.mean_x <= 0 or m.mean_m <= 0:
        raise ConfigError("E[X] and E[M] must be positive")
    return (m.mean_tm + m.mean_x2 / (2.0 * m.mean_x)
            + (m.mean_m2 / (2.0 * m.mean_m) - 0.5) * m.mean_x)


def mean_delay_given_valid(p: MM1Params) -> float:
    """E[T | T <= w]: mean delay of a deadline-meeting task."""
    at, ac = p.mu_t * p.delta_t, p.mu_c * p.delta_c
    zt, zc = p.zeta_t, p.zeta_c
    if p.w == 0:
        return 0.0
    if p.equal_rates:
        num = 2.0 / at - (2.0 / at + 2.0 * p.w + at * p.w**2) * zt if zt > 0 else 2.0 / at
        den = 1.0 - _zeta1(at, p.w, zt)
        return num / den
    num = (1.0 - _zeta1(at, p.w, zt)) / at**2 - (1.0 - _zeta1(ac, p.w, zc)) / ac**2
    den = (1.0 - zt) / at - (1.0 - zc) / ac
    return num / den


def theta_hard_mm1_approx(p: MM1Params) -> float:
    """Lower-bounding approximation of the hard-deadline average age.

    Tight when both service rates dominate lambda; returns inf at w=0 where
    no task ever validates.
    """
    if p.w == 0:
        return math.inf
    at, ac = p.mu_t * p.delta_t, p.mu_c * p.delta_c
    zt, zc = p.zeta_t, p.zeta_c
    first = mean_delay_given_valid(p)
    if p.equal_rates:
        return first + 1.0 / (p.lam * (1.0 - _zeta1(at, p.w, zt)))
    return first + (p.mu_c - p.mu_t) / (p.lam * (ac * (1.0 - zt) - at * (1.0 - zc)))


def throughput_mm1_approx(p: MM1Params) -> float:
    """Upper-bounding approximation of the valid-completion rate.

    Algebraically equals lam * (1 - epsilon_w(p)).
    """
    at, ac = p.mu_t * p.delta_t, p.mu_c * p.delta_c
    zt, zc = p.zeta_t, p.zeta_c
    if p.equal_rates:
        return p.lam * (1.0 - _zeta1(at, p.w, zt))
    return p.lam * (ac * (1.0 - zt) - at * (1.0 - zc)) / (p.mu_c - p.mu_t)


def geometric_cycle_moments(p: MM1Params) -> MomentInputs:
    """Moment bundle under the decoupling approximation: M geometric with
    success probability 1 - epsilon_w, X exponential(lambda)."""
    succ = 1.0 - epsilon_w(p)
    if succ <= 0:
        raise ConfigError("w=0 leaves no valid tasks; cycle moments diverge")
    return MomentInputs(
        mean_x=1.0 / p.lam,
        mean_x2=2.0 / p.lam**2,
        eps_w=epsilon_w(p),
        mean_tm=mean_delay_given_valid(p),
        mean_m=1.0 / succ,
        mean_m2=(2.0 - succ) / succ**2,
    )

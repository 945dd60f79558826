"""Trapezoidal quadrature evaluation of the general-tandem age expressions.

Inputs are tabulated densities (the joint system-time laws are given
directly; no deconvolution is attempted). The joint grids are square with
axis starting at 0, so the delay density eta1 and its companion eta2 are
plain anti-diagonal convolutions that stay on-grid.

The computation-queue waiting time is exactly zero with positive probability
whenever that queue can be idle, so the second joint carries that point mass
as an explicit atom line (DensityGrid2D.atom_second); eta2 then keeps its
jump at the origin and its mass exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dists import DistributionSpec
from .errors import ConfigError, NumericError
from .grids import (DensityGrid, DensityGrid2D, reverse_cumtrapz, trapz_head,
                    trapz_weights)
from .mm1 import MM1Params

RATE_CROSS_CHECK_RTOL = 1e-2


@dataclass
class GGInputs:
    """Density grids for one general tandem plus the deadline.

    fUtUc is the joint law of the two stage system times; fUtUcmSc the joint
    of the first system time with (second system time minus its service).
    Declared rates, when given, are cross-checked against grid-implied means.
    """

    fX: DensityGrid
    fSt: DensityGrid
    fSc: DensityGrid
    fUtUc: DensityGrid2D
    fUtUcmSc: DensityGrid2D
    w: float
    lam: float | None = None
    mu_t: float | None = None
    mu_c: float | None = None

    def __post_init__(self):
        if self.w < 0:
            raise ConfigError("deadline w must be >= 0")
        if abs(self.fUtUc.lo) > 0 or abs(self.fUtUcmSc.lo) > 0:
            raise ConfigError("joint grids must start at 0")
        self.fX.check_mass("fX")
        self.fSt.check_mass("fSt")
        self.fSc.check_mass("fSc")
        self.fUtUc.check_mass("fUtUc")
        self.fUtUc.marginal_first().check_mass("fUtUc first marginal")
        self.fUtUc.marginal_second().check_mass("fUtUc second marginal")
        self.fUtUcmSc.check_mass("fUtUcmSc")
        for name, declared, grid in (("lam", self.lam, self.fX),
                                     ("mu_t", self.mu_t, self.fSt),
                                     ("mu_c", self.mu_c, self.fSc)):
            implied = 1.0 / grid.mean()
            if declared is None:
                setattr(self, name, implied)
            elif abs(declared - implied) > RATE_CROSS_CHECK_RTOL * declared:
                raise ConfigError(f"declared {name}={declared:.6g} disagrees with the "
                                  f"grid-implied value {implied:.6g} beyond 1%")
        # cached derived grids
        self._fUt = self.fUtUc.marginal_first()
        self._fUc = self.fUtUc.marginal_second()
        self._eta1 = self.fUtUc.sum_density()
        self._eta2 = self.fUtUcmSc.sum_density()

    @property
    def eta1_grid(self) -> DensityGrid:
        return self._eta1

    @property
    def eta2_grid(self) -> DensityGrid:
        return self._eta2

    @property
    def fUt(self) -> DensityGrid:
        return self._fUt

    @property
    def fUc(self) -> DensityGrid:
        return self._fUc


def eta1(inputs: GGInputs, tau) -> np.ndarray:
    """Delay density f_T(tau): diagonal convolution of the joint system times."""
    return inputs.eta1_grid.interp(tau)


def eta2(inputs: GGInputs, tau) -> np.ndarray:
    """Density of (delay minus computation service) by the same diagonal rule."""
    return inputs.eta2_grid.interp(tau)


def g1_quadrature(inputs: GGInputs) -> float:
    """E[X * W_t]: mean inter-arrival-weighted transmission-queue waiting.

    Waiting is (previous first-stage system time - gap)^+, so the inner
    integral is a reverse partial first moment of the first-stage marginal.
    """
    fut = inputs.fUt
    r1 = reverse_cumtrapz(fut.x, fut.values)
    r2 = reverse_cumtrapz(fut.x, fut.x * fut.values)
    x = inputs.fX.x
    inner = np.interp(x, fut.x, r2, right=0.0) - x * np.interp(x, fut.x, r1, right=0.0)
    inner = np.maximum(inner, 0.0)
    return float(np.trapezoid(x * inner * inputs.fX.values, x))


def g2_quadrature(inputs: GGInputs) -> float:
    """E[X * W_c]: mean inter-arrival-weighted computation-queue waiting.

    Conditioned on the gap, the first-stage inter-departure density splits
    into a busy part (service only) and an idle part (service convolved with
    the residual of the previous first-stage system time); the waiting mean
    against the second-stage marginal closes the integral.
    """
    ax = inputs.fUtUc.x
    n, h = len(ax), float(ax[1] - ax[0])
    fut = inputs.fUt.values
    fuc = inputs.fUc.values
    fst = np.interp(ax, inputs.fSt.x, inputs.fSt.values, right=0.0)

    # J(y) = E[(second-stage system time - y)^+]
    r1 = reverse_cumtrapz(ax, fuc)
    r2 = reverse_cumtrapz(ax, ax * fuc)
    j = np.maximum(r2 - ax * r1, 0.0)

    # busy branch: xi(x) * integral fSt(y) J(y) dy
    xi = reverse_cumtrapz(ax, fut)
    a1 = float(np.trapezoid(fst * j, ax))
    x = inputs.fX.x
    xi_x = np.interp(x, ax, xi, right=0.0)
    busy = float(np.trapezoid(x * xi_x * inputs.fX.values, x))

    # idle branch: H(x) = int_0^x fUt(x-b) * JS(b) db with JS(b) = int J(b+s) fSt(s) ds
    wts = trapz_weights(n, h)
    js = np.convolve(j, (fst * wts)[::-1])[n - 1:][:n]
    s = np.convolve(fut, js)[:n]
    hvals = h * (s - 0.5 * (fut[0] * js + fut * js[0]))
    hvals[0] = 0.0
    h_x = np.interp(x, ax, hvals, right=0.0)
    idle = float(np.trapezoid(x * h_x * inputs.fX.values, x))
    return busy * a1 + idle


def ft_cdf(inputs: GGInputs, w: float) -> float:
    """CDF of the total delay at w, by the eta1 quadrature; clamped to [0, 1]."""
    if w <= 0:
        return 0.0
    g = inputs.eta1_grid
    return float(np.clip(trapz_head(g.x, g.values, w), 0.0, 1.0))


def theta_soft_gg1(inputs: GGInputs) -> float:
    """Soft-deadline average age of computing from the tabulated densities."""
    lam = 1.0 / inputs.fX.mean()
    ex2 = inputs.fX.moment(2)
    base = (inputs.fSt.mean() + inputs.fSc.mean()
            + lam * (0.5 * ex2 + g1_quadrature(inputs) + g2_quadrature(inputs)))
    w = inputs.w
    e1, e2 = inputs.eta1_grid, inputs.eta2_grid
    if math.isinf(w) or w >= e1.hi:
        return float(base)
    eps = e1.tail_at(w)
    hinge = _hinge_second_moment(e1, w) - _hinge_second_moment(e2, w)
    return float(base + lam * 0.5 * eps * hinge)


def _hinge_second_moment(grid: DensityGrid, w: float) -> float:
    """integral over [w, hi] of (tau - w)^2 * density."""
    y = (grid.x - w) ** 2 * grid.values
    return trapz_head(grid.x, np.where(grid.x >= w, y, 0.0), grid.hi) - trapz_head(
        grid.x, np.where(grid.x >= w, y, 0.0), w)


def theta_hard_gg1_approx(inputs: GGInputs) -> float:
    """Hard-deadline average-age approximation; inf when no delay mass is below w."""
    ft = ft_cdf(inputs, inputs.w)
    if ft <= 0.0:
        return math.inf
    g = inputs.eta1_grid
    mean_valid = trapz_head(g.x, g.x * g.values, inputs.w) / ft
    ex = inputs.fX.mean()
    ex2 = inputs.fX.moment(2)
    return float(mean_valid + ex2 / (2.0 * ex) + (1.0 - ft) / ft * ex)


def throughput_gg1_approx(inputs: GGInputs) -> float:
    """Valid-completion-rate approximation: F_T(w) / E[X]."""
    return ft_cdf(inputs, inputs.w) / inputs.fX.mean()


def exponential_inputs(lam: float, mu_t: float, mu_c: float, w: float,
                       n: int = 2001, span: float = 40.0) -> GGInputs:
    """Tabulate the stable exponential tandem's densities on uniform grids.

    The joint grids use independence of the stage system times; the waiting
    time's point mass at 0 goes into the boundary column per the grid
    convention. Supports extend span/rate so the truncated tail is ~e^-span.
    """
    p = MM1Params(lam, mu_t, mu_c, w)
    at, ac = mu_t * p.delta_t, mu_c * p.delta_c

    fx = _exp_grid(lam, n, span)
    fst = _exp_grid(mu_t, n, span)
    fsc = _exp_grid(mu_c, n, span)

    top = span / min(at, ac)
    ax = np.linspace(0.0, top, n)
    fut = at * np.exp(-at * ax)
    fuc = ac * np.exp(-ac * ax)
    joint = np.outer(fut, fuc)

    # waiting time of the second queue: density rho_c * ac * exp(-ac x)
    # plus a point mass delta_c at zero (idle queue on arrival)
    fw_cont = p.rho_c * ac * np.exp(-ac * ax)
    joint_w = np.outer(fut, fw_cont)
    atom = fut * p.delta_c

    return GGInputs(fX=fx, fSt=fst, fSc=fsc,
                    fUtUc=DensityGrid2D(ax, joint),
                    fUtUcmSc=DensityGrid2D(ax, joint_w, atom_second=atom),
                    w=w, lam=lam, mu_t=mu_t, mu_c=mu_c)


def _exp_grid(rate: float, n: int, span: float) -> DensityGrid:
    x = np.linspace(0.0, span / rate, n)
    return DensityGrid(x, rate * np.exp(-rate * x))


def estimate_joint_grids(arrival: DistributionSpec, transmit: DistributionSpec,
                         compute: DistributionSpec, task_count: int = 2_000_000,
                         n: int = 401, top: float | None = None,
                         seed: int = 0) -> tuple[DensityGrid2D, DensityGrid2D]:
    """Estimate the two joint grids from a calibration simulation run.

    Returns 2-D histograms with node-centered bins: the boundary bins have
    width h/2, matching the trapezoid end weights, so tabulated mass equals
    the in-range sample fraction exactly. Tasks whose computation started the
    instant they reached the receiver have an exactly-zero waiting time; they
    are counted into the explicit atom line rather than the first column.
    """
    from .tandem import TandemConfig, simulate_path

    cfg = TandemConfig(arrival=arrival, transmit=transmit, compute=compute,
                       task_count=task_count, deadline_kind="soft", seed=seed)
    path = simulate_path(cfg)
    first = task_count // 10
    ut = path.d1[first:] - path.tau[first:]
    uc = path.tau1[first:] - path.d1[first:]
    wc = path.tau2[first:] - path.d1[first:]

    if top is None:
        top = float(max(np.quantile(ut, 0.99995), np.quantile(uc, 0.99995)) * 1.5)
    ax = np.linspace(0.0, top, n)
    h = ax[1] - ax[0]
    edges = np.concatenate([[0.0], (np.arange(n - 1) + 0.5) * h])
    edges = np.append(edges, top)

    joint = _node_hist2d(ut, uc, edges)
    zero_wait = wc <= 0.0
    joint_w = _node_hist2d(ut[~zero_wait], wc[~zero_wait], edges, total=len(ut))
    counts, _ = np.histogram(ut[zero_wait], bins=edges)
    atom = counts / (len(ut) * np.diff(edges))
    return DensityGrid2D(ax, joint), DensityGrid2D(ax, joint_w, atom_second=atom)


def _node_hist2d(a: np.ndarray, b: np.ndarray, edges: np.ndarray,
                 total: int | None = None) -> np.ndarray:
    counts, _, _ = np.histogram2d(a, b, bins=(edges, edges))
    widths = np.diff(edges)
    dens = counts / ((total or len(a)) * np.outer(widths, widths))
    if not np.all(np.isfinite(dens)):
        raise NumericError("histogram produced non-finite densities")
    return dens

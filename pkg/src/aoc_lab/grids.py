"""Uniform density grids and the trapezoidal quadrature helpers built on them.

One quadrature convention is used everywhere: uniform spacing, trapezoid
weights (h/2 at the ends). A 2-D grid is square (same axis on both dims) so
that diagonal convolutions stay on-grid. A point mass of the second
coordinate at zero (a waiting time can be exactly zero with positive
probability) is carried explicitly as a line density over the first
coordinate rather than smeared into the boundary column.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericError

TAIL_BUDGET_WARN = 1e-4   # tail mass above this triggers a warning
TAIL_BUDGET_ERROR = 0.1   # tail mass above this is a numeric error


class TruncationWarning(UserWarning):
    """Grid support truncates more tail mass than the default budget."""


def _check_mass(mass: float, what: str) -> None:
    if not np.isfinite(mass) or mass <= 1.0 - TAIL_BUDGET_ERROR:
        raise NumericError(f"{what}: trapezoidal mass {mass:.6g} outside (0.9, 1]; "
                           "support truncates too much probability")
    if mass < 1.0 - TAIL_BUDGET_WARN:
        warnings.warn(f"{what}: tail mass {1.0 - mass:.3g} exceeds budget {TAIL_BUDGET_WARN:g}",
                      TruncationWarning, stacklevel=3)


def _validate_density(v: np.ndarray, what: str) -> None:
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise NumericError(f"{what}: density values must be finite and nonnegative")


@dataclass(frozen=True)
class DensityGrid:
    """Univariate density tabulated on a uniform grid."""

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, float)
        v = np.asarray(self.values, float)
        if x.ndim != 1 or v.shape != x.shape or len(x) < 2:
            raise NumericError("DensityGrid needs matching 1-D axis/values of length >= 2")
        _validate_density(v, "DensityGrid")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    @property
    def lo(self) -> float:
        return float(self.x[0])

    @property
    def hi(self) -> float:
        return float(self.x[-1])

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def total_mass(self) -> float:
        return float(np.trapezoid(self.values, self.x))

    def check_mass(self, what: str = "density grid") -> "DensityGrid":
        _check_mass(self.total_mass, what)
        return self

    def moment(self, k: int = 1) -> float:
        """Raw k-th moment by the grid's own trapezoid rule."""
        return float(np.trapezoid(self.x**k * self.values, self.x))

    def mean(self) -> float:
        return self.moment(1)

    def interp(self, x) -> np.ndarray:
        """Linear interpolation; zero outside the tabulated support."""
        return np.interp(x, self.x, self.values, left=0.0, right=0.0)

    def cdf_at(self, w: float) -> float:
        """Trapezoidal integral over [lo, w], clamped to the support."""
        return trapz_head(self.x, self.values, w)

    def tail_at(self, w: float) -> float:
        """Trapezoidal integral over [w, hi]."""
        return trapz_tail(self.x, self.values, w)


@dataclass(frozen=True)
class DensityGrid2D:
    """Bivariate density on a square uniform grid: values[i, j] = f(x[i], x[j]).

    atom_second, when present, is the line density (over the first
    coordinate) of a point mass of the second coordinate at zero; it carries
    the exactly-zero waiting-time probability without smearing it into the
    first matrix column.
    """

    x: np.ndarray
    values: np.ndarray
    atom_second: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, float)
        v = np.asarray(self.values, float)
        if x.ndim != 1 or len(x) < 2 or v.shape != (len(x), len(x)):
            raise NumericError("DensityGrid2D needs a square values matrix over one shared axis")
        _validate_density(v, "DensityGrid2D")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)
        if self.atom_second is not None:
            a = np.asarray(self.atom_second, float)
            if a.shape != x.shape:
                raise NumericError("atom_second must match the grid axis")
            _validate_density(a, "DensityGrid2D atom")
            object.__setattr__(self, "atom_second", a)

    @property
    def lo(self) -> float:
        return float(self.x[0])

    @property
    def hi(self) -> float:
        return float(self.x[-1])

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def total_mass(self) -> float:
        inner = np.trapezoid(self.values, self.x, axis=1)
        mass = float(np.trapezoid(inner, self.x))
        if self.atom_second is not None:
            mass += float(np.trapezoid(self.atom_second, self.x))
        return mass

    def check_mass(self, what: str = "joint grid") -> "DensityGrid2D":
        _check_mass(self.total_mass, what)
        return self

    def marginal_first(self) -> DensityGrid:
        """Integrate out the second coordinate (atom mass included)."""
        vals = np.trapezoid(self.values, self.x, axis=1)
        if self.atom_second is not None:
            vals = vals + self.atom_second
        return DensityGrid(self.x, vals)

    def marginal_second(self) -> DensityGrid:
        """Integrate out the first coordinate; undefined with an atom."""
        if self.atom_second is not None:
            raise NumericError("second marginal carries a point mass; not a density")
        return DensityGrid(self.x, np.trapezoid(self.values, self.x, axis=0))

    def sum_density(self) -> DensityGrid:
        """Density of the coordinate sum on [0, 2*hi].

        The continuous part is the anti-diagonal trapezoid of the matrix
        (exactly zero at the origin); a second-coordinate atom at zero adds
        its line density evaluated at the sum value, which keeps the jump at
        the origin and the total mass exact.
        """
        if abs(self.lo) > 0:
            raise NumericError("sum_density requires the axis to start at 0")
        n, h, v = self.n, self.h, self.values
        flipped = v[::-1, :]
        sums = np.array([np.trace(flipped, offset=m - (n - 1)) for m in range(2 * n - 1)])
        ends = np.empty(2 * n - 1)
        ms = np.arange(2 * n - 1)
        low = ms <= n - 1
        ends[low] = v[0, ms[low]] + v[ms[low], 0]
        k = ms[~low] - (n - 1)
        ends[~low] = v[k, n - 1] + v[n - 1, k]
        out = h * (sums - 0.5 * ends)
        out[0] = 0.0  # zero-width diagonal
        out = np.maximum(out, 0.0)
        if self.atom_second is not None:
            out[: n] += self.atom_second
        return DensityGrid(np.linspace(0.0, 2 * self.hi, 2 * n - 1), out)


def trapz_head(x: np.ndarray, y: np.ndarray, w: float) -> float:
    """Trapezoidal integral of y over [x[0], w]; w is clamped to the support."""
    if w <= x[0]:
        return 0.0
    if w >= x[-1]:
        return float(np.trapezoid(y, x))
    j = int(np.searchsorted(x, w, side="right")) - 1
    full = float(np.trapezoid(y[: j + 1], x[: j + 1])) if j >= 1 else 0.0
    yw = float(np.interp(w, x, y))
    return full + 0.5 * (y[j] + yw) * (w - x[j])


def trapz_tail(x: np.ndarray, y: np.ndarray, w: float) -> float:
    """Trapezoidal integral of y over [w, x[-1]]."""
    return float(np.trapezoid(y, x)) - trapz_head(x, y, w)


def reverse_cumtrapz(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """R[j] = trapezoidal integral of y over [x[j], x[-1]]."""
    h = x[1] - x[0]
    seg = 0.5 * (y[1:] + y[:-1]) * h
    forward = np.concatenate([[0.0], np.cumsum(seg)])
    return forward[-1] - forward


def trapz_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def write_grid_csv(grid, path) -> None:
    """Serialize a grid: header line `lo,hi,n`, then values row-major.

    A 2-D grid with a zero-waiting atom appends its n atom values after the
    matrix (the value count n^2 + n is unambiguous)."""
    buf = io.StringIO()
    buf.write(f"{grid.lo!r},{grid.hi!r},{grid.n}\n")
    flat = np.asarray(grid.values).ravel()
    for v in flat:
        buf.write(f"{float(v)!r}\n")
    atom = getattr(grid, "atom_second", None)
    if atom is not None:
        for v in atom:
            buf.write(f"{float(v)!r}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_grid_csv(path):
    """Read a grid written by write_grid_csv; shape inferred from the count."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        lo, hi, n = float(header[0]), float(header[1]), int(header[2])
        flat = np.array([float(line) for line in fh if line.strip()])
    x = np.linspace(lo, hi, n)
    if len(flat) == n:
        return DensityGrid(x, flat)
    if len(flat) == n * n:
        return DensityGrid2D(x, flat.reshape(n, n))
    if len(flat) == n * n + n:
        return DensityGrid2D(x, flat[: n * n].reshape(n, n), atom_second=flat[n * n:])
    raise NumericError(f"grid file {path}: {len(flat)} values fit neither n, n^2, nor n^2+n")

"""Replication statistics: means, t-based confidence intervals, paired gaps."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats as sps


def mean_ci(samples, level: float = 0.95) -> tuple[float, float, float]:
    """Sample mean with a two-sided t interval; degenerate for n < 2."""
    x = np.asarray(samples, dtype=float)
    m = float(x.mean())
    if len(x) < 2:
        return m, m, m
    half = float(sps.t.ppf(0.5 + level / 2.0, len(x) - 1)) * float(
        x.std(ddof=1)) / math.sqrt(len(x))
    return m, m - half, m + half


def ordering_not_contradicted(lower, upper, level: float = 0.95) -> bool:
    """True when mean(lower) <= mean(upper) is consistent with the paired data
    at the given one-sided confidence level.

    Uses per-replication gaps (common random numbers): the observed ordering
    is rejected only if the gap mean is significantly negative.
    """
    lo = np.asarray(lower, dtype=float)
    up = np.asarray(upper, dtype=float)
    gap = up - lo
    n = len(gap)
    if n < 2:
        return float(gap.mean()) >= 0.0
    se = float(gap.std(ddof=1)) / math.sqrt(n)
    tcrit = float(sps.t.ppf(level, n - 1))
    return float(gap.mean()) >= -tcrit * se


def gap_significantly_positive(lower, upper, level: float = 0.95) -> bool:
    """True when mean(upper) - mean(lower) > 0 at the one-sided level (paired)."""
    lo = np.asarray(lower, dtype=float)
    up = np.asarray(upper, dtype=float)
    gap = up - lo
    n = len(gap)
    if n < 2:
        return float(gap.mean()) > 0.0
    se = float(gap.std(ddof=1)) / math.sqrt(n)
    if se == 0.0:
        return float(gap.mean()) > 0.0
    tcrit = float(sps.t.ppf(level, n - 1))
    return float(gap.mean()) > tcrit * se

"""Exact sample-path simulation of the source -> transmitter -> receiver ->
computational-node line under FCFS.

Timestamps come from the departure recurrences (no event list is needed for a
two-stage FCFS line):

    d1_k   = max(tau_k, d1_{k-1}) + St_k        transmitter departure
    tau2_k = max(d1_k, tau1_{k-1})              computation start
    tau1_k = tau2_k + Sc_k                      completion

The age path is integrated exactly: between completions it is piecewise linear
with slope 1, plus (soft deadline) an extra component at slope eps_hat while
the in-service task overshoots w. The per-task area increments below, summed
with one telescoping boundary term, equal the path integral identically.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .dists import DistributionSpec, make_stream, sample
from .errors import ConfigError

TASK_LOG_COLUMNS = ("k", "tau", "d1", "tau2", "tau1", "X", "St", "Sc", "T", "valid")


@njit(cache=False)
def _departure_recurrences(tau, st, sc):
    """Sequential FCFS departure recurrences.

    Kept as an explicit loop (not a cumulative-max rewrite) so timestamps are
    bit-identical to an event-list simulation of the same variates.
    """
    k = tau.shape[0]
    d1 = np.empty(k)
    tau2 = np.empty(k)
    tau1 = np.empty(k)
    prev_d1 = -np.inf
    prev_t1 = -np.inf
    for i in range(k):
        start_t = tau[i] if tau[i] > prev_d1 else prev_d1
        prev_d1 = start_t + st[i]
        d1[i] = prev_d1
        start_c = prev_d1 if prev_d1 > prev_t1 else prev_t1
        tau2[i] = start_c
        prev_t1 = start_c + sc[i]
        tau1[i] = prev_t1
    return d1, tau2, tau1


@dataclass(frozen=True)
class PhysicalParams:
    """Optional task/network sizing; must agree with the service means."""

    data_bits: float        # L
    link_rate: float        # R, bits/time
    cycles: float           # B
    cpu_rate: float         # F, cycles/time


@dataclass(frozen=True)
class TandemConfig:
    arrival: DistributionSpec
    transmit: DistributionSpec
    compute: DistributionSpec
    task_count: int
    w: float = math.inf
    deadline_kind: str = "soft"
    warmup: int | None = None
    seed: int = 0
    physical: PhysicalParams | None = None
    guard_multiple: float = 1e3
    log_tasks: bool = False

    def __post_init__(self):
        if self.deadline_kind not in ("soft", "hard"):
            raise ConfigError("deadline_kind must be 'soft' or 'hard'")
        if self.w < 0:
            raise ConfigError("deadline w must be >= 0")
        wu = self.effective_warmup
        if not (self.task_count > wu >= 0):
            raise ConfigError("need task_count > warmup >= 0")
        if self.physical is not None:
            ph = self.physical
            if not math.isclose(self.transmit.mean(), ph.data_bits / ph.link_rate, rel_tol=1e-9):
                raise ConfigError("transmit mean must equal data_bits / link_rate")
            if not math.isclose(self.compute.mean(), ph.cycles / ph.cpu_rate, rel_tol=1e-9):
                raise ConfigError("compute mean must equal cycles / cpu_rate")

    @property
    def effective_warmup(self) -> int:
        return self.task_count // 10 if self.warmup is None else self.warmup

    def stability_warning(self) -> str | None:
        m = max(self.transmit.mean(), self.compute.mean())
        if self.arrival.mean() <= m:
            return (f"mean inter-arrival {self.arrival.mean():.6g} does not exceed the "
                    f"slowest service mean {m:.6g}; queues are unstable")
        return None


@dataclass(frozen=True)
class TaskRecord:
    """Complete timestamp history of one task."""

    k: int
    tau: float      # arrival at the source
    d1: float       # transmitter departure = receiver arrival
    tau2: float     # computation start
    tau1: float     # completion
    x: float        # inter-arrival gap before this task
    st: float       # transmission service
    sc: float       # computation service
    t: float        # total delay tau1 - tau
    valid: bool


@dataclass
class TaskPath:
    """Vectorized task history for one replication (arrays indexed 0..K-1)."""

    tau: np.ndarray
    d1: np.ndarray
    tau2: np.ndarray
    tau1: np.ndarray
    x: np.ndarray
    st: np.ndarray
    sc: np.ndarray
    t: np.ndarray
    valid: np.ndarray

    def __len__(self) -> int:
        return len(self.tau)

    def record(self, i: int) -> TaskRecord:
        return TaskRecord(i + 1, float(self.tau[i]), float(self.d1[i]), float(self.tau2[i]),
                          float(self.tau1[i]), float(self.x[i]), float(self.st[i]),
                          float(self.sc[i]), float(self.t[i]), bool(self.valid[i]))

    def records(self):
        return [self.record(i) for i in range(len(self))]


@dataclass
class CycleStats:
    """Moments of M (arrivals per valid cycle) and of the cycle arrival span."""

    mean_m: float
    mean_m2: float
    mean_sum_x: float
    mean_sum_x2: float
    mean_tm: float
    cycles: int


@dataclass
class TandemResult:
    theta: float
    throughput: float
    epsilon_hat: float
    cycle_stats: CycleStats | None
    area: float
    horizon: float
    tasks_counted: int
    divergent: bool = False
    warnings: list = field(default_factory=list)
    per_task: TaskPath | None = None


def simulate_path(config: TandemConfig) -> TaskPath:
    """Sample all variates and run the departure recurrences."""
    k = config.task_count
    x = sample(config.arrival, make_stream(config.seed, 0), size=k)
    st = sample(config.transmit, make_stream(config.seed, 1), size=k)
    sc = sample(config.compute, make_stream(config.seed, 2), size=k)

    tau = np.cumsum(x)
    d1, tau2, tau1 = _departure_recurrences(tau, st, sc)
    t = tau1 - tau
    valid = np.ones(k, dtype=bool) if config.deadline_kind == "soft" else (t <= config.w)
    return TaskPath(tau=tau, d1=d1, tau2=tau2, tau1=tau1, x=x, st=st, sc=sc, t=t, valid=valid)


def soft_area_increment(rec: TaskRecord, eps_hat: float, w: float = math.inf) -> float:
    """Area added by one completion under the soft deadline.

    eps_hat is the violation ratio frozen over the task's processing interval
    (it can only change at completions, so it is constant there). The hinge
    terms integrate the extra slope-eps_hat component over the window where
    the task's instantaneous delay exceeds w.
    """
    base = rec.x * rec.t + 0.5 * rec.x**2
    if math.isinf(w) or eps_hat == 0.0:
        return base
    h1 = max(rec.t - w, 0.0)
    h2 = max(rec.t - rec.sc - w, 0.0)
    return base + 0.5 * eps_hat * (h1 * h1 - h2 * h2)


def hard_cycle_area(cycle: list) -> float:
    """Area of one hard-deadline renewal cycle.

    `cycle` is the run of records after the previous valid completion, ending
    in the valid task that closes the cycle. The age ramps over the cycle's
    arrival span plus the closing delay, then drops to that delay.
    """
    if not cycle or not cycle[-1].valid:
        raise ConfigError("a hard cycle must end in a valid task")
    sum_x = sum(r.x for r in cycle)
    return _hard_cycle_area(sum_x, cycle[-1].t)


def _hard_cycle_area(sum_x: float, t_valid: float) -> float:
    return 0.5 * (sum_x + t_valid) ** 2 - 0.5 * t_valid**2


class AoCAccumulator:
    """Streaming exact age accumulator over an observation window.

    Tracks the informative / processing / latest indices (n, p, g), the
    violation counter a, and the integrated age area. Counters count every
    completion from time zero; the area accrues only between begin() (called
    at the completion that opens the window) and the last update().
    """

    def __init__(self, w: float, deadline_kind: str):
        self.w = w
        self.hard = deadline_kind == "hard"
        self.n = 0          # informative (newest valid completed)
        self.p = 0          # processing (newest started)
        self.g = 0          # latest completed
        self.a = 0          # completions whose delay exceeded w
        self.area = 0.0
        self._started = False
        self._anchor_t = math.nan
        self._anchor_tau1 = math.nan
        self._last_valid_tau = math.nan
        self._last_valid_t = math.nan
        self._last_valid_tau1 = math.nan
        self._last_t = math.nan
        self._last_tau1 = math.nan

    @property
    def epsilon_hat(self) -> float:
        return self.a / self.g if self.g else 0.0

    def observe_compute_start(self, k: int) -> None:
        self.p = max(self.p, k)

    def begin(self, rec: TaskRecord) -> None:
        """Open the window at a completion (a valid one for hard deadlines)."""
        if self.hard and not rec.valid:
            raise ConfigError("hard-deadline window must open at a valid completion")
        self._started = True
        self._anchor_t = rec.t
        self._anchor_tau1 = rec.tau1
        self._last_valid_tau = rec.tau
        self._last_valid_t = rec.t
        self._last_valid_tau1 = rec.tau1

    def update(self, rec: TaskRecord) -> None:
        """Account one completion (records must arrive in completion order)."""
        eps_before = self.epsilon_hat
        self.g = rec.k
        self.p = max(self.p, rec.k)
        if rec.t > self.w:
            self.a += 1
        if rec.valid:
            self.n = rec.k
        if not self._started:
            return
        if self.hard:
            if rec.valid:
                self.area += _hard_cycle_area(rec.tau - self._last_valid_tau, rec.t)
                self._last_valid_tau = rec.tau
                self._last_valid_t = rec.t
                self._last_valid_tau1 = rec.tau1
        else:
            self.area += soft_area_increment(rec, eps_before, self.w)
        self._last_t = rec.t
        self._last_tau1 = rec.tau1

    def finalize(self) -> tuple[float, float]:
        """Close the window; returns (exact area, horizon length)."""
        if not self._started:
            return 0.0, 0.0
        if self.hard:
            area = self.area + 0.5 * (self._last_valid_t**2 - self._anchor_t**2)
            return area, self._last_valid_tau1 - self._anchor_tau1
        if math.isnan(self._last_t):
            return 0.0, 0.0
        area = self.area + 0.5 * (self._last_t**2 - self._anchor_t**2)
        return area, self._last_tau1 - self._anchor_tau1


def _soft_stats(path: TaskPath, w: float, first: int) -> tuple[float, float, int]:
    """Exact soft area/horizon over [tau1_first, tau1_last] (0-based first)."""
    t, x, sc, tau1 = path.t, path.x, path.sc, path.tau1
    k = len(path)
    if math.isinf(w):
        inc = x * t + 0.5 * x * x
    else:
        viol = t > w
        a = np.cumsum(viol)
        eps_prev = np.concatenate([[0.0], a[:-1] / np.arange(1.0, k)])
        h1 = np.maximum(t - w, 0.0)
        h2 = np.maximum(t - sc - w, 0.0)
        inc = x * t + 0.5 * x * x + 0.5 * eps_prev * (h1 * h1 - h2 * h2)
    area = float(inc[first + 1:].sum()) + 0.5 * (t[-1] ** 2 - t[first] ** 2)
    horizon = float(tau1[-1] - tau1[first])
    return area, horizon, k - 1 - first


def _hard_stats(path: TaskPath, first: int):
    """Exact hard area/horizon between valid completions from index >= first."""
    anchors = np.flatnonzero(path.valid)
    anchors = anchors[anchors >= first]
    if len(anchors) < 2:
        return None
    a, b = anchors[:-1], anchors[1:]
    sum_x = path.tau[b] - path.tau[a]
    tb = path.t[b]
    areas = 0.5 * (sum_x + tb) ** 2 - 0.5 * tb**2
    area = float(areas.sum()) + 0.5 * (path.t[anchors[-1]] ** 2 - path.t[anchors[0]] ** 2)
    horizon = float(path.tau1[anchors[-1]] - path.tau1[anchors[0]])
    m = (b - a).astype(float)
    stats = CycleStats(
        mean_m=float(m.mean()), mean_m2=float((m * m).mean()),
        mean_sum_x=float(sum_x.mean()), mean_sum_x2=float((sum_x * sum_x).mean()),
        mean_tm=float(tb.mean()), cycles=len(b),
    )
    return area, horizon, len(b), stats


def run_tandem(config: TandemConfig) -> TandemResult:
    """Simulate task_count tasks and integrate the exact time-average age.

    The first `warmup` tasks are discarded from the area/throughput window;
    the validity counters behind eps_hat still count every completion. The
    window opens at a completion, so warmup=0 effectively starts at task 1.
    """
    warnings_list = []
    msg = config.stability_warning()
    if msg:
        warnings_list.append(msg)

    path = simulate_path(config)
    first = max(config.effective_warmup, 1) - 1  # 0-based index of the window-opening task

    guard = _guard_tripped(path.t, config.guard_multiple)
    if guard:
        warnings_list.append(guard)

    k = len(path)
    viol_total = int(np.sum(path.t > config.w)) if not math.isinf(config.w) else 0
    eps_final = viol_total / k
    log = path if config.log_tasks else None

    if config.deadline_kind == "soft":
        area, horizon, counted = _soft_stats(path, config.w, first)
        cyc = CycleStats(1.0, 1.0, float(path.x[first + 1:].mean()),
                         float((path.x[first + 1:] ** 2).mean()),
                         float(path.t[first + 1:].mean()), counted)
        return TandemResult(theta=area / horizon, throughput=counted / horizon,
                            epsilon_hat=eps_final, cycle_stats=cyc, area=area,
                            horizon=horizon, tasks_counted=counted,
                            warnings=warnings_list, per_task=log)

    hard = _hard_stats(path, first)
    if hard is None:
        return TandemResult(theta=math.inf, throughput=0.0, epsilon_hat=eps_final,
                            cycle_stats=None, area=0.0, horizon=0.0, tasks_counted=0,
                            divergent=True, warnings=warnings_list, per_task=log)
    area, horizon, cycles, cyc = hard
    return TandemResult(theta=area / horizon, throughput=cycles / horizon,
                        epsilon_hat=eps_final, cycle_stats=cyc, area=area,
                        horizon=horizon, tasks_counted=cycles,
                        warnings=warnings_list, per_task=log)


def empirical_throughput(result: TandemResult) -> float:
    """Valid completions per unit time over the observation window."""
    return result.throughput


def empirical_epsilon(result: TandemResult) -> float:
    """Final violation ratio A/G over all completions."""
    return result.epsilon_hat


def _guard_tripped(t: np.ndarray, guard_multiple: float) -> str | None:
    if len(t) < 3:
        return None
    running = np.cumsum(t)[:-1] / np.arange(1.0, len(t))
    bad = t[1:] > guard_multiple * running
    if bad.any():
        i = int(np.flatnonzero(bad)[0]) + 1
        return (f"delay of task {i + 1} exceeded {guard_multiple:g}x its running mean; "
                "the configuration is likely unstable")
    return None


def write_task_log(path: TaskPath, dest) -> None:
    """Per-task CSV log with full-precision floats."""
    close = False
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        dest = open(dest, "w", newline="")
        close = True
    try:
        w = csv.writer(dest)
        w.writerow(TASK_LOG_COLUMNS)
        for i in range(len(path)):
            w.writerow([i + 1, repr(float(path.tau[i])), repr(float(path.d1[i])),
                        repr(float(path.tau2[i])), repr(float(path.tau1[i])),
                        repr(float(path.x[i])), repr(float(path.st[i])),
                        repr(float(path.sc[i])), repr(float(path.t[i])),
                        int(path.valid[i])])
    finally:
        if close:
            dest.close()

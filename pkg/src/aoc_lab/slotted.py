"""Discrete-time multi-source network with a shared computational node.

Per slot, in order: Bernoulli arrivals (a fresh task preempts the one held at
its transmitter), a scheduling decision when the node is free, a transmission
attempt succeeding with probability mu_t[i], and the end-of-slot age update.
A task whose transmission succeeds in slot k occupies the computational node
during slot k+1 and departs at its end (the node serves at unit rate), so its
delay at departure is z_i(k) + 1, where z_i(k) is the task's delay at the end
of the success slot.

The age update is driven purely by departures: on a departure the age resets
to the departing task's delay (plus, under the soft deadline, the violation
ratio times the deadline overshoot); otherwise it ages by one. For a task
that succeeds on its first transmission slot this coincides with the
four-branch conditional form used by the scheduling analysis; the pure form
also covers retransmission completions, whose schedule happened earlier.

A scheduling decision is made whenever nothing is in flight. For the
never-idling policies (maxweight, maf) this is exactly "one decision per
departure". The stationary randomized policy may draw "idle", after which the
node simply decides again next slot; a literal once-per-departure gate would
otherwise freeze the network forever after the first idle draw.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .dists import make_stream
from .errors import ConfigError

POLICIES = ("maxweight", "maf", "randomized")
TRACE_COLUMNS = ("k", "i", "c", "z", "a", "d", "valid")
SUMMARY_COLUMNS = ("policy", "lambda", "w", "deadline", "mean",
                   "ci95_lo", "ci95_hi", "replications")


@dataclass(frozen=True)
class SlottedConfig:
    n_sources: int
    lam: tuple
    mu_t: tuple
    horizon: int
    w: float = math.inf
    deadline_kind: str = "soft"
    beta: tuple | None = None
    q: tuple | None = None
    policy: str = "maxweight"
    warmup: int | None = None
    seed: int = 0
    preempt_in_service: bool = True
    replications: int = 1

    def __post_init__(self):
        n = self.n_sources
        if n < 1:
            raise ConfigError("need at least one source")
        object.__setattr__(self, "lam", tuple(float(v) for v in self.lam))
        object.__setattr__(self, "mu_t", tuple(float(v) for v in self.mu_t))
        if len(self.lam) != n or len(self.mu_t) != n:
            raise ConfigError("lam and mu_t must have one entry per source")
        if any(not 0.0 <= v <= 1.0 for v in self.lam + self.mu_t):
            raise ConfigError("per-slot probabilities must lie in [0, 1]")
        beta = tuple(1.0 for _ in range(n)) if self.beta is None else tuple(
            float(v) for v in self.beta)
        if len(beta) != n or any(b <= 0 for b in beta):
            raise ConfigError("beta must be positive, one entry per source")
        object.__setattr__(self, "beta", beta)
        q = tuple(1.0 / (n + 1) for _ in range(n + 1)) if self.q is None else tuple(
            float(v) for v in self.q)
        if len(q) != n + 1 or any(not 0.0 <= v <= 1.0 for v in q) or abs(sum(q) - 1.0) > 1e-9:
            raise ConfigError("q must be a length-(N+1) probability vector (idle first)")
        object.__setattr__(self, "q", q)
        if self.policy not in POLICIES:
            raise ConfigError(f"policy must be one of {POLICIES}")
        if self.deadline_kind not in ("soft", "hard"):
            raise ConfigError("deadline_kind must be 'soft' or 'hard'")
        if self.w < 0:
            raise ConfigError("deadline w must be >= 0")
        if self.horizon < 1 or self.replications < 1:
            raise ConfigError("horizon and replications must be >= 1")
        wu = self.effective_warmup
        if not 0 <= wu < self.horizon:
            raise ConfigError("need 0 <= warmup < horizon")

    @property
    def effective_warmup(self) -> int:
        return self.horizon // 10 if self.warmup is None else self.warmup


@dataclass
class SlottedState:
    """Mutable per-replication state; ages are end-of-previous-slot values."""

    c: np.ndarray            # AoC per source
    age: np.ndarray          # held task's delay, -1 when the transmitter is empty
    g: np.ndarray            # completions per source
    a: np.ndarray            # deadline violations per source
    in_service: int = -1     # transmitter mid-transmission
    comp_src: int = -1       # source whose task sits at the computational node
    comp_delay: int = 0      # that task's delay at departure
    k: int = 0               # slots processed

    @classmethod
    def initial(cls, n: int) -> "SlottedState":
        return cls(c=np.zeros(n), age=np.full(n, -1, dtype=np.int64),
                   g=np.zeros(n, dtype=np.int64), a=np.zeros(n, dtype=np.int64))

    @property
    def z(self) -> np.ndarray:
        """Instantaneous delay; equals the AoC for an empty transmitter."""
        return np.where(self.age >= 0, self.age.astype(float), self.c)

    def ratio(self, i: int) -> float:
        return self.a[i] / self.g[i] if self.g[i] else 0.0


@dataclass
class SlotEvents:
    """What one slot produced (end-of-slot snapshot)."""

    k: int
    a_vec: np.ndarray
    d_vec: np.ndarray
    c: np.ndarray
    z: np.ndarray
    dep_valid: int = -1       # 1/0 when a departure happened, else -1
    chosen: int = -1          # scheduled source, -1 when none/idle


def weight_soft(state: SlottedState, i: int, w: float, c_end=None, z_end=None) -> float:
    """Scheduling weight c - z - l(z) with l(z) = (A/G) * (z + 1 - w)^+.

    c/z are the (deterministic) end-of-decision-slot values.
    """
    c = state.c[i] + 1.0 if c_end is None else c_end
    z = (state.age[i] + 1.0 if state.age[i] >= 0 else c) if z_end is None else z_end
    hinge = max(z + 1.0 - w, 0.0) if not math.isinf(w) else 0.0
    return c - z - state.ratio(i) * hinge


def weight_hard(state: SlottedState, i: int, w: float, c_end=None, z_end=None) -> float:
    """Scheduling weight 1{z+1 <= w} * (c - z): a stale task is worthless."""
    c = state.c[i] + 1.0 if c_end is None else c_end
    z = (state.age[i] + 1.0 if state.age[i] >= 0 else c) if z_end is None else z_end
    return (c - z) if z + 1.0 <= w else 0.0


def _scores(state: SlottedState, config: SlottedConfig) -> np.ndarray:
    wfun = weight_hard if config.deadline_kind == "hard" else weight_soft
    return np.array([config.beta[i] * config.mu_t[i] * wfun(state, i, config.w)
                     for i in range(config.n_sources)])


def choose_action(policy: str, state: SlottedState, config: SlottedConfig, u: float) -> int:
    """Pick the transmitter to schedule (-1 = idle, randomized only).

    maxweight: argmax beta*mu*w_i; maf: argmax AoC; ties break uniformly via u.
    """
    n = config.n_sources
    if policy == "randomized":
        acc = 0.0
        for j, prob in enumerate(config.q):
            acc += prob
            if u < acc:
                return j - 1
        return n - 1
    if policy == "maf":
        scores = state.c + 1.0
    else:
        scores = _scores(state, config)
    best = scores.max()
    ties = np.flatnonzero(scores == best)
    return int(ties[int(u * len(ties))]) if len(ties) > 1 else int(ties[0])


def step(state: SlottedState, config: SlottedConfig, u_arr: np.ndarray,
         u_tx: float, u_choice: float) -> SlotEvents:
    """Advance one slot in place; the uniforms drive arrivals/outcome/choice."""
    n = config.n_sources
    k = state.k + 1
    a_vec = np.zeros(n, dtype=np.int8)
    d_vec = np.zeros(n, dtype=np.int8)

    # 1. arrivals (a fresh task replaces the held one, unless it is mid-service
    #    and preemption of in-service tasks is disabled, in which case it drops)
    for i in range(n):
        if u_arr[i] < config.lam[i]:
            if state.age[i] >= 0 and i == state.in_service and not config.preempt_in_service:
                continue
            state.age[i] = 0

    # 2. scheduling decision whenever nothing is in flight
    chosen = -1
    if state.in_service < 0 and state.comp_src < 0:
        chosen = choose_action(config.policy, state, config, u_choice)
        if chosen >= 0:
            a_vec[chosen] = 1
            state.in_service = chosen
    assert a_vec.sum() <= 1

    # 3. transmission attempt (only a held task can complete)
    departing = -1
    next_comp, next_delay = -1, 0
    i = state.in_service
    if i >= 0 and state.age[i] >= 0 and u_tx < config.mu_t[i]:
        next_comp, next_delay = i, int(state.age[i]) + 2
        departing = i
        state.in_service = -1

    # 4. end-of-slot: departure from the computational node, then aging
    dep_valid = -1
    if state.comp_src >= 0:
        j = state.comp_src
        d_vec[j] = 1
        delay = float(state.comp_delay)
        valid = delay <= config.w
        dep_valid = int(valid)
        if config.deadline_kind == "soft":
            state.c[j] = delay + state.ratio(j) * max(delay - config.w, 0.0)
        else:
            state.c[j] = delay if valid else state.c[j] + 1.0
        state.g[j] += 1
        if delay > config.w:
            state.a[j] += 1
        state.c[[m for m in range(n) if m != j]] += 1.0
        state.comp_src = -1
    else:
        state.c += 1.0
    assert d_vec.sum() <= 1

    held = state.age >= 0
    state.age[held] += 1
    z_snap = np.where(held, state.age.astype(float), state.c)
    if departing >= 0:
        state.age[departing] = -1       # left the transmitter after the snapshot
        state.comp_src, state.comp_delay = next_comp, next_delay
    state.k = k
    return SlotEvents(k=k, a_vec=a_vec, d_vec=d_vec, c=state.c.copy(),
                      z=z_snap, dep_valid=dep_valid, chosen=chosen)


def aoc_soft_next(c_k: float, z_k: float, ratio_k: float, departs_next: bool,
                  w: float) -> float:
    """Soft-deadline age recursion: reset to z+1 plus the weighted overshoot
    on a departure, else age by one."""
    if departs_next:
        hinge = max(z_k + 1.0 - w, 0.0) if not math.isinf(w) else 0.0
        return z_k + 1.0 + ratio_k * hinge
    return c_k + 1.0


def aoc_hard_next(c_k: float, z_k: float, departs_next: bool, w: float) -> float:
    """Hard-deadline age recursion: reset only when the departing task met w."""
    if departs_next:
        if z_k + 1.0 <= w:
            return z_k + 1.0
        return c_k + 1.0
    return c_k + 1.0


@dataclass
class DriftProbe:
    """Exact expected two-slot drift per candidate action at a decision epoch."""

    drifts: np.ndarray
    minimizing: np.ndarray       # indices within tolerance of the minimum

    def minimizes(self, action: int) -> bool:
        return action in self.minimizing


def drift_probe(state: SlottedState, config: SlottedConfig,
                rtol: float = 1e-9) -> DriftProbe:
    """Enumerate the drift of every schedulable action at an eligible slot.

    For candidate i the only randomness is the transmission outcome
    (success probability mu_t[i]); both outcomes are pushed through the age
    recursions literally and averaged, so this is an independent check of the
    scheduling weight algebra.
    """
    if state.in_service >= 0 or state.comp_src >= 0:
        raise ConfigError("drift probe applies at decision epochs only")
    n = config.n_sources
    beta = np.asarray(config.beta)
    c_end = state.c + 1.0                       # end-of-decision-slot ages
    z_end = np.where(state.age >= 0, state.age + 1.0, c_end)
    l_prev = float(np.dot(beta, state.c)) / n   # state.c is the end of slot k-1

    drifts = np.empty(n)
    for i in range(n):
        total = 0.0
        for j in range(n):
            cj, zj = c_end[j], z_end[j]
            if j != i:
                total += beta[j] * (cj + 1.0)
                continue
            if config.deadline_kind == "soft":
                succ = aoc_soft_next(cj, zj, state.ratio(j), True, config.w)
            else:
                succ = aoc_hard_next(cj, zj, True, config.w)
            fail = cj + 1.0
            mu = config.mu_t[i]
            total += beta[j] * (mu * succ + (1.0 - mu) * fail)
        drifts[i] = total / n - l_prev
    best = drifts.min()
    tol = rtol * max(1.0, abs(best))
    return DriftProbe(drifts=drifts, minimizing=np.flatnonzero(drifts <= best + tol))


@dataclass
class SlottedResult:
    mean: float
    ci95: tuple
    per_replication: np.ndarray
    g: np.ndarray
    a: np.ndarray
    traces: dict | None = None     # first replication: c, z, a, d, valid arrays


def _uniforms(seed: int, rep: int, horizon: int, n: int):
    u_arr = make_stream(seed, 8 * rep + 3).gen.random((horizon, n))
    u_tx = make_stream(seed, 8 * rep + 4).gen.random(horizon)
    u_choice = make_stream(seed, 8 * rep + 5).gen.random(horizon)
    return u_arr, u_tx, u_choice


def run_slotted(config: SlottedConfig, record_trace: bool = False,
                use_fast: bool = True) -> SlottedResult:
    """Simulate all replications; returns the average sum AoC per source-slot
    over the post-warmup window, with a t-based 95% interval across
    replications."""
    from . import slotted_fast
    from .stats import mean_ci

    n, horizon, warmup = config.n_sources, config.horizon, config.effective_warmup
    means = np.empty(config.replications)
    g = np.zeros(n, dtype=np.int64)
    a = np.zeros(n, dtype=np.int64)
    traces = None
    for rep in range(config.replications):
        u_arr, u_tx, u_choice = _uniforms(config.seed, rep, horizon, n)
        want_trace = record_trace and rep == 0
        if use_fast:
            out = slotted_fast.run_replication(config, u_arr, u_tx, u_choice, want_trace)
        else:
            out = _run_replication_python(config, u_arr, u_tx, u_choice, want_trace)
        total, g_rep, a_rep, tr = out
        means[rep] = total / ((horizon - warmup) * n)
        g += g_rep
        a += a_rep
        if want_trace:
            traces = tr
    mean, lo, hi = mean_ci(means)
    return SlottedResult(mean=mean, ci95=(lo, hi), per_replication=means,
                         g=g, a=a, traces=traces)


def _run_replication_python(config: SlottedConfig, u_arr, u_tx, u_choice, want_trace):
    """Reference slot loop; semantics identical to the compiled kernel."""
    n, horizon, warmup = config.n_sources, config.horizon, config.effective_warmup
    state = SlottedState.initial(n)
    total = 0.0
    tr = None
    if want_trace:
        tr = {"c": np.empty((horizon, n)), "z": np.empty((horizon, n)),
              "a": np.zeros((horizon, n), dtype=np.int8),
              "d": np.zeros((horizon, n), dtype=np.int8),
              "valid": np.full((horizon, n), -1, dtype=np.int8)}
    for k in range(horizon):
        ev = step(state, config, u_arr[k], u_tx[k], u_choice[k])
        if k >= warmup:
            total += float(state.c.sum())
        if want_trace:
            tr["c"][k] = ev.c
            tr["z"][k] = ev.z
            tr["a"][k] = ev.a_vec
            tr["d"][k] = ev.d_vec
            if ev.dep_valid >= 0:
                tr["valid"][k, np.argmax(ev.d_vec)] = ev.dep_valid
    return total, state.g.copy(), state.a.copy(), tr


def replay_c_sequence(config: SlottedConfig, traces: dict) -> np.ndarray:
    """Rebuild the AoC sequences from logged (z, d) via the pure recursions.

    Returns an array shaped like traces['c']; exact equality with the
    simulator's own sequence is the consistency test. The violation ratios
    are reconstructed from logged departures (delay = z at the slot before
    the departure, plus one).
    """
    z, d = traces["z"], traces["d"]
    horizon, n = z.shape
    c = np.zeros((horizon, n))
    g = np.zeros(n, dtype=np.int64)
    a = np.zeros(n, dtype=np.int64)
    hard = config.deadline_kind == "hard"
    prev_c = np.zeros(n)
    prev_z = np.zeros(n)
    for k in range(horizon):
        for i in range(n):
            departs = d[k, i] == 1
            ratio = a[i] / g[i] if g[i] else 0.0
            if hard:
                c[k, i] = aoc_hard_next(prev_c[i], prev_z[i], departs, config.w)
            else:
                c[k, i] = aoc_soft_next(prev_c[i], prev_z[i], ratio, departs, config.w)
            if departs:
                delay = prev_z[i] + 1.0
                g[i] += 1
                if delay > config.w:
                    a[i] += 1
        prev_c = c[k]
        prev_z = z[k]
    return c


def write_trace_csv(traces: dict, dest) -> None:
    """Flat per-slot-per-source trace: k,i,c,z,a,d,valid."""
    close = False
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        dest = open(dest, "w", newline="")
        close = True
    try:
        wtr = csv.writer(dest)
        wtr.writerow(TRACE_COLUMNS)
        horizon, n = traces["c"].shape
        for k in range(horizon):
            for i in range(n):
                wtr.writerow([k + 1, i + 1, repr(float(traces["c"][k, i])),
                              repr(float(traces["z"][k, i])),
                              int(traces["a"][k, i]), int(traces["d"][k, i]),
                              int(traces["valid"][k, i])])
    finally:
        if close:
            dest.close()

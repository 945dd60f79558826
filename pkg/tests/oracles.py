"""Independent test oracles: an event-list tandem simulator and a brute-force
age-path integrator working straight from the definitions."""

from __future__ import annotations

import heapq
import math

import numpy as np

ARRIVAL, TX_DONE, COMPUTE_DONE = 0, 1, 2


def event_tandem(tau: np.ndarray, st: np.ndarray, sc: np.ndarray):
    """Simulate the two-station FCFS line with an event list.

    Consumes the same variate arrays as the recurrence-based simulator and
    returns (d1, tau2, tau1); the float operations per task are the same
    max/add pair, so results must agree bit for bit.
    """
    k = len(tau)
    d1 = np.full(k, math.nan)
    tau2 = np.full(k, math.nan)
    tau1 = np.full(k, math.nan)

    events = [(tau[0], 0, ARRIVAL, 0)]
    seq = 1
    tx_queue: list[int] = []
    tx_busy_task = -1
    cp_queue: list[int] = []
    cp_busy_task = -1
    next_arrival = 1

    def start_tx(task, now):
        nonlocal tx_busy_task, seq
        tx_busy_task = task
        done = now + st[task]
        d1[task] = done
        heapq.heappush(events, (done, seq, TX_DONE, task))

    def start_cp(task, now):
        nonlocal cp_busy_task, seq
        cp_busy_task = task
        tau2[task] = now
        done = now + sc[task]
        tau1[task] = done
        heapq.heappush(events, (done, seq, COMPUTE_DONE, task))

    while events:
        now, _, kind, task = heapq.heappop(events)
        seq += 1
        if kind == ARRIVAL:
            if tx_busy_task < 0:
                start_tx(task, now)
            else:
                tx_queue.append(task)
            if next_arrival < k:
                heapq.heappush(events, (tau[next_arrival], seq, ARRIVAL, next_arrival))
                next_arrival += 1
        elif kind == TX_DONE:
            tx_busy_task = -1
            if cp_busy_task < 0:
                start_cp(task, now)
            else:
                cp_queue.append(task)
            if tx_queue:
                start_tx(tx_queue.pop(0), now)
        else:
            cp_busy_task = -1
            if cp_queue:
                start_cp(cp_queue.pop(0), now)
    return d1, tau2, tau1


def integrate_path(path, w: float, kind: str, first: int):
    """Brute-force integral of the age path over the observation window.

    Evaluates the age at segment midpoints directly from the informative /
    processing / latest task definitions; the path is piecewise linear
    between breakpoints, so the midpoint rule is exact.
    """
    tau, tau1, tau2, t, valid = path.tau, path.tau1, path.tau2, path.t, path.valid
    if kind == "hard":
        vidx = np.flatnonzero(valid)
        vidx = vidx[vidx >= first]
        t0, t1 = tau1[vidx[0]], tau1[vidx[-1]]
    else:
        t0, t1 = tau1[first], tau1[-1]

    pts = {float(t0), float(t1)}
    for arr in (tau1, tau2):
        for v in arr:
            if t0 < v < t1:
                pts.add(float(v))
    if not math.isinf(w):
        for v in tau + w:
            if t0 < v < t1:
                pts.add(float(v))
    pts = sorted(pts)

    area = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        m = 0.5 * (a + b)
        g = int(np.searchsorted(tau1, m, side="right"))
        if kind == "hard":
            vv = np.flatnonzero(valid[:g])
            n_idx = int(vv[-1])
        else:
            n_idx = g - 1
        c = m - tau[n_idx]
        if kind == "soft" and not math.isinf(w):
            p = int(np.searchsorted(tau2, m, side="right"))
            if p > g:
                eps = float(np.sum(t[:g] > w)) / g
                c += eps * max(m - tau[p - 1] - w, 0.0)
        area += (b - a) * c
    return area, float(t1 - t0)


def age_at(path, w: float, kind: str, m: float) -> float:
    """Age value at one time point from the definitions (m not at an event)."""
    g = int(np.searchsorted(path.tau1, m, side="right"))
    if g < 1:
        return math.nan
    if kind == "hard":
        vv = np.flatnonzero(path.valid[:g])
        if len(vv) == 0:
            return math.nan
        c = m - path.tau[int(vv[-1])]
    else:
        c = m - path.tau[g - 1]
        if not math.isinf(w):
            p = int(np.searchsorted(path.tau2, m, side="right"))
            if p > g:
                eps = float(np.sum(path.t[:g] > w)) / g
                c += eps * max(m - path.tau[p - 1] - w, 0.0)
    return c

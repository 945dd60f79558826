"""Compiled slot loop for the discrete-time simulator.

Semantics (and floating-point expression order) mirror slotted.step exactly,
so a replication driven by the same uniforms produces bit-identical traces.
The python reference stays the source of truth; the tests enforce agreement.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_POLICY_ID = {"maxweight": 0, "maf": 1, "randomized": 2}


@njit(cache=False)
def _kernel(lam, mu, beta, q, w, hard, policy_id, preempt, horizon, warmup,
            u_arr, u_tx, u_choice, trace_c, trace_z, trace_a, trace_d,
            trace_valid, record):
    n = lam.shape[0]
    c = np.zeros(n)
    age = np.full(n, -1, dtype=np.int64)
    g = np.zeros(n, dtype=np.int64)
    a = np.zeros(n, dtype=np.int64)
    in_service = -1
    comp_src = -1
    comp_delay = 0
    total = 0.0

    for k in range(horizon):
        # arrivals
        for i in range(n):
            if u_arr[k, i] < lam[i]:
                if age[i] >= 0 and i == in_service and not preempt:
                    continue
                age[i] = 0

        # scheduling decision when nothing is in flight
        chosen = -1
        if in_service < 0 and comp_src < 0:
            if policy_id == 2:
                acc = 0.0
                chosen = n - 1
                for j in range(n + 1):
                    acc += q[j]
                    if u_choice[k] < acc:
                        chosen = j - 1
                        break
            else:
                best = -1.0e300
                nties = 0
                for i in range(n):
                    ci = c[i] + 1.0
                    if policy_id == 1:
                        s = ci
                    else:
                        zi = age[i] + 1.0 if age[i] >= 0 else ci
                        ratio = a[i] / g[i] if g[i] > 0 else 0.0
                        if hard:
                            wi = (ci - zi) if zi + 1.0 <= w else 0.0
                        else:
                            hinge = zi + 1.0 - w
                            if hinge < 0.0:
                                hinge = 0.0
                            wi = ci - zi - ratio * hinge
                        s = beta[i] * mu[i] * wi
                    if s > best:
                        best = s
                        nties = 1
                    elif s == best:
                        nties += 1
                if nties == 1:
                    for i in range(n):
                        ci = c[i] + 1.0
                        if policy_id == 1:
                            s = ci
                        else:
                            zi = age[i] + 1.0 if age[i] >= 0 else ci
                            ratio = a[i] / g[i] if g[i] > 0 else 0.0
                            if hard:
                                wi = (ci - zi) if zi + 1.0 <= w else 0.0
                            else:
                                hinge = zi + 1.0 - w
                                if hinge < 0.0:
                                    hinge = 0.0
                                wi = ci - zi - ratio * hinge
                            s = beta[i] * mu[i] * wi
                        if s == best:
                            chosen = i
                            break
                else:
                    pick = int(u_choice[k] * nties)
                    seen = 0
                    for i in range(n):
                        ci = c[i] + 1.0
                        if policy_id == 1:
                            s = ci
                        else:
                            zi = age[i] + 1.0 if age[i] >= 0 else ci
                            ratio = a[i] / g[i] if g[i] > 0 else 0.0
                            if hard:
                                wi = (ci - zi) if zi + 1.0 <= w else 0.0
                            else:
                                hinge = zi + 1.0 - w
                                if hinge < 0.0:
                                    hinge = 0.0
                                wi = ci - zi - ratio * hinge
                            s = beta[i] * mu[i] * wi
                        if s == best:
                            if seen == pick:
                                chosen = i
                                break
                            seen += 1
            if chosen >= 0:
                in_service = chosen
                if record:
                    trace_a[k, chosen] = 1

        # transmission attempt
        departing = -1
        next_comp = -1
        next_delay = 0
        if in_service >= 0 and age[in_service] >= 0 and u_tx[k] < mu[in_service]:
            next_comp = in_service
            next_delay = age[in_service] + 2
            departing = in_service
            in_service = -1

        # departure from the computational node, then aging
        if comp_src >= 0:
            j = comp_src
            delay = float(comp_delay)
            valid = delay <= w
            if hard:
                if valid:
                    c[j] = delay
                else:
                    c[j] = c[j] + 1.0
            else:
                ratio = a[j] / g[j] if g[j] > 0 else 0.0
                over = delay - w
                if over < 0.0:
                    over = 0.0
                c[j] = delay + ratio * over
            g[j] += 1
            if delay > w:
                a[j] += 1
            for i in range(n):
                if i != j:
                    c[i] += 1.0
            if record:
                trace_d[k, j] = 1
                trace_valid[k, j] = 1 if valid else 0
            comp_src = -1
        else:
            for i in range(n):
                c[i] += 1.0

        for i in range(n):
            if age[i] >= 0:
                age[i] += 1
        if record:
            for i in range(n):
                trace_c[k, i] = c[i]
                trace_z[k, i] = age[i] if age[i] >= 0 else c[i]
        if departing >= 0:
            age[departing] = -1
            comp_src = next_comp
            comp_delay = next_delay
        if k >= warmup:
            csum = 0.0
            for i in range(n):
                csum += c[i]
            total += csum
    return total, g, a


def run_replication(config, u_arr, u_tx, u_choice, want_trace):
    """One replication through the compiled kernel; returns
    (post-warmup AoC sum, completions, violations, traces-or-None)."""
    n, horizon = config.n_sources, config.horizon
    if want_trace:
        trace_c = np.zeros((horizon, n))
        trace_z = np.zeros((horizon, n))
        trace_a = np.zeros((horizon, n), dtype=np.int8)
        trace_d = np.zeros((horizon, n), dtype=np.int8)
        trace_valid = np.full((horizon, n), -1, dtype=np.int8)
    else:
        trace_c = np.zeros((1, 1))
        trace_z = np.zeros((1, 1))
        trace_a = np.zeros((1, 1), dtype=np.int8)
        trace_d = np.zeros((1, 1), dtype=np.int8)
        trace_valid = np.zeros((1, 1), dtype=np.int8)
    total, g, a = _kernel(
        np.asarray(config.lam), np.asarray(config.mu_t), np.asarray(config.beta),
        np.asarray(config.q), float(config.w), config.deadline_kind == "hard",
        _POLICY_ID[config.policy], config.preempt_in_service, horizon,
        config.effective_warmup, u_arr, u_tx, u_choice,
        trace_c, trace_z, trace_a, trace_d, trace_valid, want_trace)
    traces = None
    if want_trace:
        traces = {"c": trace_c, "z": trace_z, "a": trace_a, "d": trace_d,
                  "valid": trace_valid}
    return total, g, a, traces

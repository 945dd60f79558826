"""Experiment presets, the comparison reporter, and the artifact bundle writer.

Every preset writes CSV rows (shortest round-trip decimals), one SVG per
figure analogue, and a manifest with the config hash and library versions.
Grid points are dispatched to a thread pool but results are reduced in
submission order, so the thread count never changes a byte of output.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..dists import DistributionSpec
from ..errors import ConfigError
from ..mm1 import MM1Params, theta_hard_mm1_approx, theta_soft_mm1, throughput_mm1_approx
from ..pareto import ParetoPoint, ParetoQuery, minimize_theta
from ..slotted import SUMMARY_COLUMNS, SlottedConfig, run_slotted
from ..stats import mean_ci
from ..tandem import TandemConfig, run_tandem
from .config import config_hash, slotted_config_from, tandem_config_from
from .svgplot import PlotSpec, render_plot

PRESET_KINDS = ("fig6_soft_sweep", "fig7_hard_sweep", "fig8_tradeoff",
                "fig9_slotted", "custom")


@dataclass
class ExperimentConfig:
    kind: str
    out_dir: Path
    seed: int = 0
    replications: int = 5
    threads: int = 1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PRESET_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.replications < 1 or self.threads < 1:
            raise ConfigError("replications and threads must be >= 1")
        self.out_dir = Path(self.out_dir)


@dataclass
class ComparisonRow:
    params: dict
    analytic: float
    simulated: float
    ci95: tuple
    relative_error: float
    bound_respected: bool | None


def compare_report(analytic_rows: dict, simulated_rows: dict,
                   bound: str | None = None) -> list:
    """Join analytic and simulated values on identical parameter keys.

    bound: 'lower' asserts simulated >= analytic, 'upper' the reverse,
    None skips the flag. Orphan keys on either side are an error.
    """
    a_keys, s_keys = set(analytic_rows), set(simulated_rows)
    if not analytic_rows:
        raise ConfigError("empty analytic row set")
    if a_keys != s_keys:
        raise ConfigError(f"key mismatch: analytic-only={sorted(a_keys - s_keys)!r} "
                          f"simulated-only={sorted(s_keys - a_keys)!r}")
    out = []
    for key in sorted(analytic_rows):
        ana = float(analytic_rows[key])
        sim = simulated_rows[key]
        sim_mean, lo, hi = (sim if isinstance(sim, tuple) else (float(sim),) * 3)
        denom = max(abs(ana), np.finfo(float).tiny)
        flag = None
        if bound == "lower":
            flag = sim_mean >= ana
        elif bound == "upper":
            flag = sim_mean <= ana
        out.append(ComparisonRow(params=dict(zip(("key",), (key,))) if not isinstance(key, tuple)
                                 else {f"k{i}": v for i, v in enumerate(key)},
                                 analytic=ana, simulated=sim_mean, ci95=(lo, hi),
                                 relative_error=abs(sim_mean - ana) / denom,
                                 bound_respected=flag))
    return out


def _exp(rate: float) -> DistributionSpec:
    return DistributionSpec(kind="exponential", rate=rate)


def _point_seed(seed: int, point: int, rep: int) -> int:
    return seed + 1_000_003 * point + 1_009 * rep


def _tandem_reps(cfg: ExperimentConfig, point: int, lam, mu_t, mu_c, w, kind, tasks):
    def one(rep):
        tc = TandemConfig(arrival=_exp(lam), transmit=_exp(mu_t), compute=_exp(mu_c),
                          task_count=tasks, w=w, deadline_kind=kind,
                          seed=_point_seed(cfg.seed, point, rep))
        return run_tandem(tc)
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(one, range(cfg.replications)))


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Execute a preset and write its artifact bundle; returns the manifest."""
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    runner = {
        "fig6_soft_sweep": _run_fig6,
        "fig7_hard_sweep": _run_fig7,
        "fig8_tradeoff": _run_fig8,
        "fig9_slotted": _run_fig9,
        "custom": _run_custom,
    }[cfg.kind]
    files, errors = runner(cfg)
    manifest = {
        "kind": cfg.kind,
        "seed": cfg.seed,
        "replications": cfg.replications,
        "params": cfg.params,
        "config_hash": config_hash({"kind": cfg.kind, "seed": cfg.seed,
                                    "replications": cfg.replications,
                                    "params": cfg.params}),
        "versions": _versions(),
        "outputs": {name: _sha256(cfg.out_dir / name) for name in sorted(files)},
        "errors": errors,
    }
    (cfg.out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    if errors:
        raise RuntimeError(f"{len(errors)} grid point(s) failed; see manifest")
    return manifest


def _run_fig6(cfg: ExperimentConfig):
    p = cfg.params
    w = float(p.get("w", 0.5))
    mu_c = float(p.get("mu_c", 3.0))
    mu_ts = [float(v) for v in p.get("mu_t", (2.0, 3.0))]
    lams = [float(v) for v in p.get("lambda", np.round(np.arange(0.2, 1.81, 0.2), 10))]
    tasks = int(p.get("task_count", 1_000_000))

    rows, errors = [], []
    point = 0
    for mu_t in mu_ts:
        for lam in lams:
            try:
                theta_ref = theta_soft_mm1(MM1Params(lam, mu_t, mu_c, w))
                reps = _tandem_reps(cfg, point, lam, mu_t, mu_c, w, "soft", tasks)
                mean, lo, hi = mean_ci([r.theta for r in reps])
                rows.append({"mu_t": mu_t, "lambda": lam, "theta_analytic": theta_ref,
                             "theta_sim": mean, "ci_lo": lo, "ci_hi": hi,
                             "rel_err": abs(mean - theta_ref) / theta_ref})
            except Exception as exc:   # noqa: BLE001 - recorded per row
                errors.append({"mu_t": mu_t, "lambda": lam, "error": str(exc)})
            point += 1
    _write_csv(cfg.out_dir / "soft_sweep.csv", rows)
    long_rows = _melt(rows, [("theta_analytic", "analytic mu_t={mu_t}"),
                             ("theta_sim", "simulated mu_t={mu_t}")])
    _write_svg(cfg.out_dir / "soft_sweep.svg", long_rows,
               PlotSpec(x="lambda", y="theta", series="series",
                        title="average AoC vs arrival rate (soft deadline)"))
    return ["soft_sweep.csv", "soft_sweep.svg"], errors


def _run_fig7(cfg: ExperimentConfig):
    p = cfg.params
    w = float(p.get("w", 0.5))
    mu_c = float(p.get("mu_c", 3.0))
    mu_ts = [float(v) for v in p.get("mu_t", (2.0, 3.0))]
    lams = [float(v) for v in p.get("lambda", np.round(np.arange(0.2, 1.81, 0.2), 10))]
    tasks = int(p.get("task_count", 1_000_000))

    rows, errors = [], []
    point = 10_000
    for mu_t in mu_ts:
        for lam in lams:
            try:
                mm = MM1Params(lam, mu_t, mu_c, w)
                th_ref = theta_hard_mm1_approx(mm)
                xi_ref = throughput_mm1_approx(mm)
                reps = _tandem_reps(cfg, point, lam, mu_t, mu_c, w, "hard", tasks)
                th, th_lo, th_hi = mean_ci([r.theta for r in reps])
                xi, xi_lo, xi_hi = mean_ci([r.throughput for r in reps])
                rows.append({"mu_t": mu_t, "lambda": lam,
                             "theta_approx": th_ref, "theta_sim": th,
                             "theta_ci_lo": th_lo, "theta_ci_hi": th_hi,
                             "theta_lower_bound_ok": int(th >= th_ref),
                             "xi_approx": xi_ref, "xi_sim": xi,
                             "xi_ci_lo": xi_lo, "xi_ci_hi": xi_hi,
                             "xi_upper_bound_ok": int(xi <= xi_ref)})
            except Exception as exc:   # noqa: BLE001
                errors.append({"mu_t": mu_t, "lambda": lam, "error": str(exc)})
            point += 1
    _write_csv(cfg.out_dir / "hard_sweep.csv", rows)
    long_rows = _melt(rows, [("theta_approx", "approx mu_t={mu_t}"),
                             ("theta_sim", "simulated mu_t={mu_t}")])
    _write_svg(cfg.out_dir / "hard_sweep.svg", long_rows,
               PlotSpec(x="lambda", y="theta", series="series",
                        title="average AoC vs arrival rate (hard deadline)"))
    long_xi = _melt(rows, [("xi_approx", "approx mu_t={mu_t}"),
                           ("xi_sim", "simulated mu_t={mu_t}")])
    _write_svg(cfg.out_dir / "hard_throughput.svg", long_xi,
               PlotSpec(x="lambda", y="theta", series="series",
                        title="computation throughput vs arrival rate (hard deadline)"))
    return ["hard_sweep.csv", "hard_sweep.svg", "hard_throughput.svg"], errors


def _run_fig8(cfg: ExperimentConfig):
    p = cfg.params
    w = float(p.get("w", 0.5))
    pairs = [tuple(map(float, pair)) for pair in p.get("pairs", ((2, 3), (3, 2), (2, 5)))]
    lams = [float(v) for v in p.get("lambda", np.round(np.arange(0.05, 1.80, 0.05), 10))]
    rows, errors = [], []
    for mu_t, mu_c in pairs:
        for lam in lams:
            if lam >= min(mu_t, mu_c):
                continue
            mm = MM1Params(lam, mu_t, mu_c, w)
            rows.append({"mu_t": mu_t, "mu_c": mu_c, "lambda": lam,
                         "xi_hat": throughput_mm1_approx(mm),
                         "theta_hat": theta_hard_mm1_approx(mm)})
    _write_csv(cfg.out_dir / "tradeoff_curves.csv", rows)
    for r in rows:
        r["series"] = f"mu_t={r['mu_t']:g}, mu_c={r['mu_c']:g}"
    _write_svg(cfg.out_dir / "tradeoff_curves.svg", rows,
               PlotSpec(x="xi_hat", y="theta_hat", series="series",
                        title="freshness vs computation throughput"))

    mu_t0 = float(p.get("frontier_mu_t", 2.0))
    mu_cs = [float(v) for v in p.get("frontier_mu_c", np.round(np.arange(3.0, 6.01, 0.5), 10))]
    u = float(p.get("u", 0.0))
    frows = []
    for mu_c in mu_cs:
        try:
            pt = minimize_theta(ParetoQuery(mu_t=mu_t0, mu_c=mu_c, w=w, u=u))
            frows.append({"mu_c": mu_c, "u": pt.u, "lambda_star": pt.lambda_star,
                          "theta": pt.theta, "xi": pt.xi, "feasible": int(pt.feasible)})
        except Exception as exc:   # noqa: BLE001
            errors.append({"mu_c": mu_c, "error": str(exc)})
    _write_csv(cfg.out_dir / "frontier.csv", frows)
    _write_svg(cfg.out_dir / "frontier.svg", frows,
               PlotSpec(x="xi", y="theta",
                        title="optimal freshness vs attained throughput"))
    return ["tradeoff_curves.csv", "tradeoff_curves.svg",
            "frontier.csv", "frontier.svg"], errors


def _run_fig9(cfg: ExperimentConfig):
    p = cfg.params
    n = int(p.get("n_sources", 5))
    mu = float(p.get("mu_t", 0.5))
    ws = [float(v) for v in p.get("w", (4.0, 10.0))]
    lams = [float(v) for v in p.get("lambda", (0.1, 0.3, 0.5, 0.7, 0.9))]
    horizon = int(p.get("horizon", 20_000))
    kinds = list(p.get("deadline_kinds", ("soft", "hard")))
    policies = list(p.get("policies", ("maxweight", "maf", "randomized")))

    rows, errors = [], []
    jobs = []
    for w in ws:
        for kind in kinds:
            for policy in policies:
                for lam in lams:
                    jobs.append((w, kind, policy, lam))

    def one(job):
        w, kind, policy, lam = job
        sc = SlottedConfig(n_sources=n, lam=(lam,) * n, mu_t=(mu,) * n,
                           horizon=horizon, w=w, deadline_kind=kind,
                           q=(1.0 / (n + 1),) * (n + 1), policy=policy,
                           seed=cfg.seed, replications=cfg.replications)
        return run_slotted(sc)

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        results = list(pool.map(one, jobs))
    for job, res in zip(jobs, results):
        w, kind, policy, lam = job
        rows.append({"policy": policy, "lambda": lam, "w": w, "deadline": kind,
                     "mean": res.mean, "ci95_lo": res.ci95[0], "ci95_hi": res.ci95[1],
                     "replications": cfg.replications})
    _write_csv(cfg.out_dir / "slotted_policies.csv", rows, columns=SUMMARY_COLUMNS)
    files = ["slotted_policies.csv"]
    for w in ws:
        sub = [dict(r, series=f"{r['policy']}/{r['deadline']}")
               for r in rows if r["w"] == w]
        name = f"slotted_w{w:g}.svg"
        _write_svg(cfg.out_dir / name, sub,
                   PlotSpec(x="lambda", y="mean", series="series",
                            title=f"average sum AoC vs arrival rate (w={w:g})"))
        files.append(name)
    return files, errors


def _run_custom(cfg: ExperimentConfig):
    files, errors = [], []
    p = cfg.params
    if "tandem" in p:
        tc = tandem_config_from(p["tandem"])
        res = run_tandem(tc)
        rows = [{"theta": res.theta, "throughput": res.throughput,
                 "epsilon_hat": res.epsilon_hat, "tasks_counted": res.tasks_counted,
                 "divergent": int(res.divergent)}]
        _write_csv(cfg.out_dir / "tandem.csv", rows)
        files.append("tandem.csv")
    if "slotted" in p:
        sc = slotted_config_from(p["slotted"], replications=cfg.replications)
        res = run_slotted(sc)
        rows = [{"policy": sc.policy, "lambda": sc.lam[0], "w": sc.w,
                 "deadline": sc.deadline_kind, "mean": res.mean,
                 "ci95_lo": res.ci95[0], "ci95_hi": res.ci95[1],
                 "replications": sc.replications}]
        _write_csv(cfg.out_dir / "slotted.csv", rows, columns=SUMMARY_COLUMNS)
        files.append("slotted.csv")
    if not files:
        raise ConfigError("custom experiment needs a [tandem] or [slotted] section")
    return files, errors


def _melt(rows, specs):
    out = []
    for row in rows:
        for col, label in specs:
            out.append({"lambda": row["lambda"], "theta": row[col],
                        "series": label.format(**row)})
    return out


def csv_text(rows, columns=None) -> str:
    if not rows:
        return ""
    cols = list(columns) if columns else list(rows[0].keys())
    buf = io.StringIO()
    wtr = csv.writer(buf, lineterminator="\n")
    wtr.writerow(cols)
    for row in rows:
        wtr.writerow([_cell(row.get(c)) for c in cols])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _write_csv(path: Path, rows, columns=None) -> None:
    path.write_text(csv_text(rows, columns))


def _write_svg(path: Path, rows, spec: PlotSpec) -> None:
    str_rows = [{k: str(v) for k, v in r.items()} for r in rows]
    path.write_text(render_plot(str_rows, spec))


def read_csv_rows(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _versions() -> dict:
    import numba
    import scipy
    return {"aoc_lab": __version__, "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def pareto_csv(points: list) -> str:
    """CSV body for frontier output: u,lambda_star,theta,xi,feasible."""
    rows = [{"u": pt.u, "lambda_star": pt.lambda_star, "theta": pt.theta,
             "xi": pt.xi, "feasible": int(pt.feasible)} for pt in points]
    return csv_text(rows, columns=("u", "lambda_star", "theta", "xi", "feasible"))

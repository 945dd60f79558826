"""Command-line front end.

Subcommands: analytic | simulate-tandem | simulate-slotted | gg-analytic |
pareto | experiment | plot. Exit codes: 0 success, 2 configuration error,
3 numeric error, 4 partial failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from ..errors import ConfigError, NumericError
from ..mm1 import (MM1Params, aoi_mm1_tandem, epsilon_w, theta_hard_mm1_approx,
                   theta_soft_mm1, throughput_mm1_approx)
from ..pareto import ParetoQuery, frontier
from ..slotted import run_slotted, write_trace_csv
from ..tandem import run_tandem, write_task_log

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="aoc-lab",
                                  description="computation-freshness laboratory")
    sub = top.add_subparsers(dest="command", required=True)

    ana = sub.add_parser("analytic", help="closed-form quantities for the exponential tandem")
    ana.add_argument("--lambda", dest="lam", type=float, required=True)
    ana.add_argument("--mu-t", type=float, required=True)
    ana.add_argument("--mu-c", type=float, required=True)
    ana.add_argument("--w", type=float, default=math.inf)
    ana.add_argument("--deadline", choices=("soft", "hard"), default="soft")
    ana.add_argument("--quantity", choices=("theta", "throughput", "epsilon", "aoi"),
                     default="theta")

    sim = sub.add_parser("simulate-tandem", help="run the continuous-time tandem simulator")
    _common(sim)
    sim.add_argument("--task-log", type=Path, help="write the per-task CSV here")

    slo = sub.add_parser("simulate-slotted", help="run the discrete-time multi-source simulator")
    _common(slo)
    slo.add_argument("--trace", type=Path, help="write the per-slot trace CSV here")

    gga = sub.add_parser("gg-analytic", help="quadrature from tabulated density grids")
    gga.add_argument("--inputs", type=Path, required=True,
                     help="directory with fX.csv fSt.csv fSc.csv fUtUc.csv fUtUcmSc.csv")
    gga.add_argument("--w", type=float, required=True)

    par = sub.add_parser("pareto", help="freshness-throughput frontier")
    par.add_argument("--mu-t", type=float, required=True)
    par.add_argument("--mu-c", type=float, required=True)
    par.add_argument("--w", type=float, required=True)
    par.add_argument("--u-grid", type=float, nargs="+", default=[0.0])
    par.add_argument("--resolution", type=int, default=96)

    exp = sub.add_parser("experiment", help="run a preset experiment bundle")
    exp.add_argument("--config", type=Path)
    exp.add_argument("--kind", choices=("fig6_soft_sweep", "fig7_hard_sweep",
                                        "fig8_tradeoff", "fig9_slotted", "custom"))
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--out", type=Path, required=True)
    exp.add_argument("--replications", type=int, default=None)
    exp.add_argument("--threads", type=int, default=1)

    plo = sub.add_parser("plot", help="render a CSV to a deterministic SVG")
    plo.add_argument("--csv", type=Path, required=True)
    plo.add_argument("--x", required=True)
    plo.add_argument("--y", required=True)
    plo.add_argument("--series")
    plo.add_argument("--title", default="")
    plo.add_argument("--out", type=Path, required=True)
    return top


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--out", type=Path)
    p.add_argument("--threads", type=int, default=1)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RuntimeError as exc:
        print(f"partial failure: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


def _dispatch(args) -> int:
    if args.command == "analytic":
        p = MM1Params(args.lam, args.mu_t, args.mu_c, args.w)
        value = {
            "theta": (theta_soft_mm1 if args.deadline == "soft"
                      else theta_hard_mm1_approx),
            "throughput": throughput_mm1_approx,
            "epsilon": epsilon_w,
            "aoi": aoi_mm1_tandem,
        }[args.quantity](p)
        print(f"lambda,mu_t,mu_c,w,deadline,quantity,value")
        print(f"{args.lam!r},{args.mu_t!r},{args.mu_c!r},{args.w!r},"
              f"{args.deadline},{args.quantity},{value!r}")
        return EXIT_OK

    if args.command == "simulate-tandem":
        from .config import load_config, tandem_config_from
        cfg = load_config(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.task_log:
            overrides["log_tasks"] = True
        tc = tandem_config_from(cfg.get("tandem", {}), **overrides)
        res = run_tandem(tc)
        print("theta,throughput,epsilon_hat,tasks_counted,divergent")
        print(f"{res.theta!r},{res.throughput!r},{res.epsilon_hat!r},"
              f"{res.tasks_counted},{int(res.divergent)}")
        for msg in res.warnings:
            print(f"warning: {msg}", file=sys.stderr)
        if args.task_log and res.per_task is not None:
            write_task_log(res.per_task, args.task_log)
        return EXIT_OK

    if args.command == "simulate-slotted":
        from .config import load_config, slotted_config_from
        cfg = load_config(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.replications is not None:
            overrides["replications"] = args.replications
        sc = slotted_config_from(cfg.get("slotted", {}), **overrides)
        res = run_slotted(sc, record_trace=args.trace is not None)
        print("policy,lambda,w,deadline,mean,ci95_lo,ci95_hi,replications")
        print(f"{sc.policy},{sc.lam[0]!r},{sc.w!r},{sc.deadline_kind},"
              f"{res.mean!r},{res.ci95[0]!r},{res.ci95[1]!r},{sc.replications}")
        if args.trace and res.traces:
            write_trace_csv(res.traces, args.trace)
        return EXIT_OK

    if args.command == "gg-analytic":
        from ..gg import (GGInputs, theta_hard_gg1_approx, theta_soft_gg1,
                          throughput_gg1_approx)
        from ..grids import read_grid_csv
        d = args.inputs
        inputs = GGInputs(fX=read_grid_csv(d / "fX.csv"),
                          fSt=read_grid_csv(d / "fSt.csv"),
                          fSc=read_grid_csv(d / "fSc.csv"),
                          fUtUc=read_grid_csv(d / "fUtUc.csv"),
                          fUtUcmSc=read_grid_csv(d / "fUtUcmSc.csv"),
                          w=args.w)
        print("theta_soft,theta_hard_approx,throughput_approx")
        print(f"{theta_soft_gg1(inputs)!r},{theta_hard_gg1_approx(inputs)!r},"
              f"{throughput_gg1_approx(inputs)!r}")
        return EXIT_OK

    if args.command == "pareto":
        from .experiment import pareto_csv
        q = ParetoQuery(mu_t=args.mu_t, mu_c=args.mu_c, w=args.w,
                        resolution=args.resolution)
        points = frontier(q, args.u_grid)
        sys.stdout.write(pareto_csv(points))
        return EXIT_OK

    if args.command == "experiment":
        from .config import load_config
        from .experiment import ExperimentConfig, run_experiment
        params: dict = {}
        kind = args.kind
        seed = args.seed
        reps = args.replications
        if args.config:
            cfg = load_config(args.config)
            exp = cfg.get("experiment", {})
            kind = kind or exp.get("kind")
            seed = exp.get("seed", seed) if args.seed == 0 else seed
            reps = reps if reps is not None else exp.get("replications")
            params = exp.get("params", {})
            for section in ("tandem", "slotted"):
                if section in cfg:
                    params[section] = cfg[section]
        if kind is None:
            raise ConfigError("experiment needs --kind or an experiment.kind in --config")
        ec = ExperimentConfig(kind=kind, out_dir=args.out, seed=seed,
                              replications=reps if reps is not None else 5,
                              threads=args.threads, params=params)
        run_experiment(ec)
        print(f"wrote bundle to {args.out}")
        return EXIT_OK

    if args.command == "plot":
        from .experiment import read_csv_rows
        from .svgplot import PlotSpec, render_plot
        rows = read_csv_rows(args.csv)
        svg = render_plot(rows, PlotSpec(x=args.x, y=args.y, series=args.series,
                                         title=args.title))
        args.out.write_text(svg)
        return EXIT_OK

    raise ConfigError(f"unknown command {args.command!r}")   # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())

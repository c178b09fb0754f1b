"""Command-line front end: ``mimocell {bounds,simulate,compare,scene,selftest}``."""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import analytic as an
from . import compare as cmp
from . import simulate as sim
from .config import DEFAULT_TRIALS, ExperimentConfig, load_config
from .errors import ConfigError, ConvergenceError, DomainError, MimocellError
from .geometry import Window, drop_network, scene_rows
from .outputs import csv_text, write_output
from .params import Arch
from .selftest import run_selftest, selftest_rows

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


def _q_grid(cfg: ExperimentConfig, m: int) -> np.ndarray:
    scale = m if cfg["grid.q_relative"] else 1.0
    return np.logspace(math.log10(cfg["grid.q_min"] * scale),
                       math.log10(cfg["grid.q_max"] * scale), cfg["grid.q_points"])


def _sweep_header(cfg, columns):
    name = cfg["sweep.param"]
    return ((name,) if name else ()) + tuple(columns)


def _prefix(value):
    return () if value is None else (value,)


# ---------------------------------------------------------------------------

def cmd_bounds(cfg: ExperimentConfig) -> list:
    out, resolved = cfg["output.dir"], cfg.resolved()
    beta = cfg["bounds.beta_fd"]
    conv = cfg["bounds.h_convention"]
    mm_rows, sc_rows = [], []
    for value, p in cfg.sweep_points():
        q = _q_grid(cfg, p.m_antennas)
        lower = an.mmimo_cdf_lower(q, p)
        upper = an.mmimo_cdf_upper(q, p)
        mm_rows += [_prefix(value) + (a, b, c, None) for a, b, c in zip(q, lower, upper)]
        qs = np.logspace(math.log10(cfg["bounds.smallcell_q_min"]),
                         math.log10(cfg["bounds.smallcell_q_max"]), cfg["grid.q_points"])
        lo, hi = an.smallcell_cdf_bounds(qs, p, beta=beta, h_convention=conv)
        exact = an.smallcell_cdf_exact(qs, p)
        sc_rows += [_prefix(value) + row for row in zip(qs, lo, hi, exact)]
    header = _sweep_header(cfg, ("q", "cdf_lb", "cdf_ub", "cdf_exact"))
    note = {"mmimo_upper_bound": "proved for q >= M, conjectured below",
            "smallcell_exact": "interference-limited distribution"}
    return [
        write_output(out, "bounds_mmimo.csv", csv_text(header, mm_rows), "bounds", resolved, note),
        write_output(out, "bounds_smallcell.csv", csv_text(header, sc_rows), "bounds",
                     resolved, note),
    ]


def cmd_simulate(cfg: ExperimentConfig) -> list:
    out, resolved = cfg["output.dir"], cfg.resolved()
    estimator = cfg["simulate.estimator"]
    sc = cfg.sim(trials=DEFAULT_TRIALS[estimator])
    resolved["sim.trials"] = sc.trials
    rows = []
    if estimator == "cdf":
        header = _sweep_header(cfg, ("threshold_or_s", "estimate", "ci_halfwidth"))
        for value, p in cfg.sweep_points():
            q = _q_grid(cfg, p.m_antennas if sc.arch is Arch.MMIMO else 1)
            est = sim.estimate_cdf(sc, p, q)
            rows += [_prefix(value) + r for r in zip(q, est.probabilities, est.ci_halfwidth)]
        name = f"cdf_{sc.arch}.csv"
    elif estimator == "laplace":
        header = _sweep_header(cfg, ("threshold_or_s", "estimate", "ci_halfwidth", "analytic"))
        for value, p in cfg.sweep_points():
            s = np.asarray(cfg["grid.s"])
            ests = sim.estimate_laplace(sc, p, s)
            ps = p if sc.snr is None else p.replace(snr=sc.snr)
            ana = an.mmimo_laplace_inv_sir(s, ps, eps=sc.eps)
            rows += [_prefix(value) + (sv, e.mean, e.ci_halfwidth, a)
                     for sv, e, a in zip(s, ests, ana)]
        name = "laplace.csv"
    elif estimator == "inv_sir_mean":
        header = _sweep_header(cfg, ("estimate", "ci_halfwidth", "analytic"))
        for value, p in cfg.sweep_points():
            est = sim.estimate_inv_sir_mean(sc, p)
            rows.append(_prefix(value) + (est.mean, est.ci_halfwidth,
                                          an.mmimo_inv_sir_mean(p, eps=sc.eps)))
        name = "inv_sir_mean.csv"
    else:
        eta = cfg["simulate.eta"]
        header = _sweep_header(cfg, ("shannon", "shannon_ci", "outage", "outage_ci",
                                     "mean_inv_n", "rate_lb", "rate_ub", "outage_lb"))
        for value, p in cfg.sweep_points():
            est = sim.estimate_user_rates(sc, p, eta)
            if sc.arch is Arch.MMIMO:
                rb = an.mmimo_rate_bounds(p)
                lb, ub = rb.lower, rb.upper
                olb = an.mmimo_outage_bounds(eta, p).lower
            else:
                sb = an.smallcell_rate_bounds(eta, p)
                lb, ub, olb = sb.shannon_lower.lower, None, sb.outage_lower.lower
            rows.append(_prefix(value) + (est.shannon.mean, est.shannon.ci_halfwidth,
                                          est.outage.mean, est.outage.ci_halfwidth,
                                          est.mean_inv_n.mean, lb, ub, olb))
        name = f"user_rates_{sc.arch}.csv"
    return [write_output(out, name, csv_text(header, rows), "simulate", resolved,
                         {"sim_config": sc.as_dict()})]


def cmd_compare(cfg: ExperimentConfig) -> list:
    out, resolved = cfg["output.dir"], cfg.resolved()
    threshold = cfg["compare.asymptotic_threshold"]
    if cfg["sweep.param"] is None:
        base = cfg.system()
        points = [(float(v) * base.lambda_b, base.replace(lambda_u=float(v) * base.lambda_b))
                  for v in np.logspace(-3, 2, 21)]
        resolved["sweep.param"] = "system.lambda_u"
        resolved["sweep.values"] = [v for v, _ in points]
    else:
        points = cfg.sweep_points()
    reports = [cmp.compare(p, eta, threshold=threshold, p_t=cfg["compare.p_t"])
               for _, p in points for eta in cfg["compare.etas"]]
    crossover = None
    extra = {}
    if cfg["compare.crossover"]:
        base = cfg.system()
        crossover = cmp.find_rate_crossover(
            base, cfg["compare.crossover_lo"] * base.lambda_b,
            cfg["compare.crossover_hi"] * base.lambda_b, tol=cfg["compare.crossover_tol"])
        extra["crossover_searched"] = True
    return [
        write_output(out, "compare.csv", cmp.reports_to_csv(reports), "compare", resolved),
        write_output(out, "compare_report.json",
                     cmp.reports_to_json(reports, crossover, extra) + "\n", "compare", resolved),
    ]


def cmd_scene(cfg: ExperimentConfig) -> list:
    out, resolved = cfg["output.dir"], cfg.resolved()
    rng = np.random.default_rng([cfg["sim.seed"], 0])
    real = drop_network(cfg["scene.lambda_b"], cfg["scene.lambda_u"],
                        Window.square(cfg["scene.side"]), rng)
    header = ("kind", "x", "y", "assoc_index", "occupancy")
    idle = int(np.count_nonzero(real.occupancy == 0))
    return [write_output(out, "scene.csv", csv_text(header, scene_rows(real)), "scene", resolved,
                         {"bs_count": len(real.bs), "ue_count": len(real.ue), "idle_bs": idle})]


def cmd_selftest(cfg: ExperimentConfig) -> tuple:
    checks = run_selftest()
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  (|err| = {c.error:.3g})")
    text = csv_text(("check", "value", "expected", "tolerance", "passed"), selftest_rows(checks))
    path = write_output(cfg["output.dir"], "selftest.csv", text, "selftest", cfg.resolved())
    return [path], all(c.passed for c in checks)


COMMANDS = {
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "scene": cmd_scene,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimocell",
        description="Massive-MIMO versus small-cell downlink analysis and simulation.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat 'section.key = value' file")
    common.add_argument("--seed", type=int, help="sets sim.seed")
    common.add_argument("--trials", type=int, help="sets sim.trials")
    common.add_argument("--out", metavar="DIR", help="sets output.dir")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "bounds": "analytic CDF bounds for both architectures",
        "simulate": "Monte Carlo estimates (cdf, inv_sir_mean, laplace, user_rates)",
        "compare": "rate and energy-efficiency comparison over a density sweep",
        "scene": "export one network realisation in a square window",
        "selftest": "analytic identity checks",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set, {"sim.seed": args.seed,
                                                  "sim.trials": args.trials,
                                                  "output.dir": args.out})
        result = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        key = f" [{exc.key}]" if exc.key else ""
        print(f"config error{key}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, MimocellError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.command == "selftest":
        paths, ok = result
    else:
        paths, ok = result, True
    for path in paths:
        print(path)
    return EXIT_OK if ok else EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

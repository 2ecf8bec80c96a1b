"""Command-line front door: parameter sweeps, optimisation, validation.

Three subcommands:

``sweep``     one row per grid value of a swept parameter, any number of
              target quantities per row (plot-ready CSV or JSON).
``optimize``  run the two-step cache-size / edge-density search and
              report the feasible set and the minimum-energy pair.
``validate``  run every analytic-vs-Monte-Carlo comparison and report
              z-scores.

Exit codes: 0 success, 1 usage or config error, 2 infeasible
optimisation, 3 validation failures present.
"""

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import latency, montecarlo, multipath, optimizer
from .energy import (load_energy_model, load_energy_model_file,
                     system_energy)
from .multipath import MULTIPATH, SCHEMES, SINGLE_PATH
from .popularity import hit_probability, zipf
from .scenario import (ScenarioError, load_scenario, load_scenario_file,
                       scenario_hash)

DEFAULT_PSI = 144


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class SweepSpec:
    """One sweep run: a parameter grid and the quantities to record."""

    param: str
    grid: tuple
    targets: tuple
    fixed: dict
    out: str = None
    fmt: str = "csv"

    def __post_init__(self):
        if not self.grid:
            raise UsageError("sweep grid is empty")
        diffs = [b - a for a, b in zip(self.grid, self.grid[1:])]
        if diffs and not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
            raise UsageError("sweep grid must be strictly monotone")
        unknown = [t for t in self.targets if t not in TARGETS]
        if unknown:
            raise UsageError(
                f"unknown targets {unknown}; available: {sorted(TARGETS)}")


@dataclass(frozen=True)
class RunContext:
    """Scenario + energy model + cache size used to evaluate targets."""

    scenario: object
    energy: object
    psi: int


def _p_hit(ctx):
    return hit_probability(
        zipf(ctx.scenario.beta, ctx.scenario.k_total), ctx.psi)


def _see(ctx, scheme):
    """Service effective energy at the critical density for this cache
    size: the delay budget binds exactly, so the QoS gate is 1 and the
    value is the system energy of the cheapest feasible deployment."""
    s = ctx.scenario
    budget = optimizer.reduced_delay_budget(s)
    try:
        pair = optimizer.critical_edc_density(s, ctx.psi, budget, scheme)
    except optimizer.DensityBracketError as exc:
        raise RuntimeError(str(exc)) from exc
    if pair is None:
        raise RuntimeError(
            f"no feasible density for psi={ctx.psi}: the cache-miss fiber "
            f"term alone exceeds the reduced budget {budget:.4g} s")
    return system_energy(s, ctx.energy, ctx.psi,
                         lambda_e=pair.lambda_e_crit).total


TARGETS = {
    "p_in_edc": _p_hit,
    "fiber_delay": lambda ctx: latency.fiber_delay(ctx.scenario),
    "fiber_link_delay":
        lambda ctx: latency.fiber_delay(ctx.scenario) * (1.0 - _p_hit(ctx)),
    "uplink_delay": lambda ctx: latency.uplink_request_delay(ctx.scenario),
    "deli_delay": lambda ctx: latency.deli_delay(ctx.scenario),
    "access_delay": lambda ctx: latency.access_delay(ctx.scenario),
    "backhaul_delay_multipath":
        lambda ctx: multipath.multipath_backhaul_delay(ctx.scenario),
    "backhaul_delay_single":
        lambda ctx: multipath.single_path_backhaul_delay(ctx.scenario),
    "backhaul_gain":
        lambda ctx: (multipath.single_path_backhaul_delay(ctx.scenario)
                     - multipath.multipath_backhaul_delay(ctx.scenario)),
    "backhaul_delay_bmax":
        lambda ctx: multipath.multipath_backhaul_delay(
            ctx.scenario,
            b=min(multipath.max_cooperative_paths(
                ctx.scenario.lambda_e, ctx.scenario.r_max), 16)),
    "delay_lower_bound":
        lambda ctx: multipath.delay_bounds(ctx.scenario)[0],
    "delay_upper_bound":
        lambda ctx: multipath.delay_bounds(ctx.scenario)[1],
    "total_latency_multipath":
        lambda ctx: latency.total_latency(
            ctx.scenario, _p_hit(ctx),
            multipath.multipath_backhaul_delay(ctx.scenario)).total,
    "e_sys":
        lambda ctx: system_energy(ctx.scenario, ctx.energy, ctx.psi).total,
    "see_multipath": lambda ctx: _see(ctx, MULTIPATH),
    "see_single": lambda ctx: _see(ctx, SINGLE_PATH),
}


def _route_param(key, value, scenario_overrides, energy_overrides, extra):
    """Send a CLI key to the scenario, energy model or run extras."""
    if key == "psi":
        extra["psi"] = int(float(value))
        return
    from .energy import _ENERGY_FIELDS, _YEAR_KEYS  # noqa: internal tables
    if key in _ENERGY_FIELDS or key in _YEAR_KEYS:
        energy_overrides[key] = value
        return
    scenario_overrides[key] = value


def _build_context(args, sweep_override=None):
    scenario_overrides, energy_overrides = {}, {}
    extra = {"psi": DEFAULT_PSI}
    for key, value in args.params:
        _route_param(key, value, scenario_overrides, energy_overrides, extra)
    if sweep_override is not None:
        _route_param(sweep_override[0], sweep_override[1],
                     scenario_overrides, energy_overrides, extra)
    if args.config:
        s = load_scenario_file(args.config, scenario_overrides)
    else:
        s = load_scenario(overrides=scenario_overrides)
    if getattr(args, "energy", None):
        em = load_energy_model_file(args.energy, energy_overrides)
    else:
        em = load_energy_model(overrides=energy_overrides)
    return RunContext(scenario=s, energy=em, psi=extra["psi"])


def _fmt_value(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _emit(rows, columns, fmt, out):
    if fmt == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt_value(row.get(c, "")) for c in columns])
        text = buf.getvalue()
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _metadata(ctx):
    return {
        "scenario_hash": scenario_hash(ctx.scenario),
        "assumed_defaults": ";".join(
            ctx.scenario.assumed_defaults
            + ctx.energy.assumed_defaults),
    }


def cmd_sweep(args):
    grid = tuple(float(v) for v in args.values.split(","))
    spec = SweepSpec(param=args.sweep_param, grid=grid,
                     targets=tuple(args.targets.split(",")),
                     fixed=dict(args.params), out=args.out, fmt=args.format)

    def one_row(value):
        row = {spec.param: value, "error": ""}
        try:
            ctx = _build_context(args, sweep_override=(spec.param, value))
        except Exception as exc:  # row-level failure, run continues
            row["error"] = str(exc)
            for t in spec.targets:
                row[t] = math.nan
            return row
        row.update(_metadata(ctx))
        for t in spec.targets:
            try:
                row[t] = float(TARGETS[t](ctx))
            except Exception as exc:
                row[t] = math.nan
                row["error"] = str(exc)
        return row

    if args.jobs and args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(one_row, spec.grid))
    else:
        rows = [one_row(v) for v in spec.grid]
    columns = ([spec.param] + list(spec.targets)
               + ["scenario_hash", "assumed_defaults", "error"])
    _emit(rows, columns, spec.fmt, spec.out)
    return 0


def cmd_optimize(args):
    ctx = _build_context(args)
    meta = _metadata(ctx)
    try:
        outcome = optimizer.optimize_cache_density(
            ctx.scenario, ctx.energy, scheme=args.scheme, jobs=args.jobs)
    except optimizer.NoFeasiblePairError as exc:
        report = {"feasible": False, "reduced_budget": exc.budget,
                  "message": str(exc), **meta}
        _emit([report], list(report), args.format, args.out)
        return 2

    def pair_row(pair, e_sys):
        return {
            "psi": pair.psi,
            "lambda_e_crit": pair.lambda_e_crit,
            "lambda_e_crit_per_km2": pair.lambda_e_crit * 1e6,
            "e_sys": e_sys,
            "residual": pair.residual,
            "at_lower_bound": pair.at_lower_bound,
            "is_best": pair == outcome.best_pair,
            **meta,
        }

    rows = [pair_row(p, system_energy(ctx.scenario, ctx.energy, p.psi,
                                      lambda_e=p.lambda_e_crit).total)
            for p in outcome.feasible_set]
    if args.format == "json":
        payload = [{
            "best": pair_row(outcome.best_pair, outcome.e_sys_min),
            "e_sys_min": outcome.e_sys_min,
            "scheme": args.scheme,
            "skipped_psi": list(outcome.skipped_psi),
            "feasible_set": rows,
            **meta,
        }]
        _emit(payload, [], "json", args.out)
    else:
        columns = ["psi", "lambda_e_crit", "lambda_e_crit_per_km2", "e_sys",
                   "residual", "at_lower_bound", "is_best",
                   "scenario_hash", "assumed_defaults"]
        _emit(rows, columns, "csv", args.out)
    return 0


def _validation_rows(ctx, trials, seed, jobs):
    s = ctx.scenario

    def geometry(p):
        def run():
            ref = multipath.mean_kth_edc_distance(s.lambda_e, p)
            est = montecarlo.estimate_kth_nearest(
                s.lambda_e, p, min(trials, 200_000), seed)
            return ref, est, est.z_score(ref)
        return f"kth_nearest_distance_p{p}", run

    def success(name, analytic_fn, oracle_fn):
        def run():
            analytic = analytic_fn(s)
            est = oracle_fn(s, trials, seed)
            return analytic, est, montecarlo.proportion_z(est, analytic)
        return name, run

    checks = [geometry(p) for p in (1, 2, 3)] + [
        success("uplink_success", latency.uplink_success_prob,
                montecarlo.estimate_uplink_success),
        success("deli_success", latency.deli_success_prob,
                montecarlo.estimate_deli_success),
        success("access_success", latency.access_success_prob,
                montecarlo.estimate_access_success),
        success("shadowing_success", multipath.mmwave_success_prob,
                montecarlo.estimate_shadowing_success),
    ]

    def evaluate(check):
        name, run = check
        row = {"check": name, "criterion": "|z| <= 3", "error": ""}
        try:
            analytic, est, z = run()
            row.update(analytic=analytic, estimate=est.mean,
                       std_error=est.std_error, n_samples=est.n_samples,
                       deviation=z, passed=abs(z) <= 3.0)
        except Exception as exc:
            row.update(analytic=math.nan, estimate=math.nan,
                       std_error=math.nan, n_samples=0, deviation=math.nan,
                       passed=False, error=str(exc))
        return row

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(evaluate, checks))
    else:
        rows = [evaluate(c) for c in checks]

    # packet simulator against the integer-hop closed form (5% relative)
    row = {"check": "backhaul_simulator", "criterion": "rel <= 5%",
           "error": ""}
    try:
        topo = montecarlo.mean_distance_topology(s)
        est = montecarlo.simulate_backhaul(
            s, topo, MULTIPATH, trials=min(trials, 2000), seed=seed)
        analytic = multipath.multipath_backhaul_delay(s, multipath.EXACT_CEIL)
        rel = abs(est.mean - analytic) / analytic
        row.update(analytic=analytic, estimate=est.mean,
                   std_error=est.std_error, n_samples=est.n_samples,
                   deviation=rel, passed=rel <= 0.05)
    except Exception as exc:
        row.update(analytic=math.nan, estimate=math.nan, std_error=math.nan,
                   n_samples=0, deviation=math.nan, passed=False,
                   error=str(exc))
    rows.append(row)
    for r in rows:
        r.update(_metadata(ctx))
    return rows


def cmd_validate(args):
    ctx = _build_context(args)
    rows = _validation_rows(ctx, args.trials, args.seed, args.jobs)
    columns = ["check", "analytic", "estimate", "std_error", "n_samples",
               "criterion", "deviation", "passed", "error",
               "scenario_hash", "assumed_defaults"]
    _emit(rows, columns, args.format, args.out)
    return 0 if all(r["passed"] for r in rows) else 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_kv(raw):
    if "=" not in raw:
        raise UsageError(f"--param expects KEY=VALUE, got {raw!r}")
    key, _, value = raw.partition("=")
    return key.strip(), value.strip()


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="scenario config file")
    common.add_argument("--energy", help="energy model config file")
    common.add_argument("--param", dest="params", action="append", default=[],
                        metavar="KEY=VALUE", type=_parse_kv,
                        help="override any scenario/energy key or psi")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=100_000)
    common.add_argument("--jobs", type=int, default=1)

    parser = _Parser(prog="mcrnet", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="evaluate targets over a parameter grid")
    p_sweep.add_argument("sweep_param", help="config key to sweep (or psi)")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated grid values")
    p_sweep.add_argument("--targets", required=True,
                         help="comma-separated target quantities")

    p_opt = sub.add_parser("optimize", parents=[common],
                           help="two-step cache/density optimisation")
    p_opt.add_argument("--scheme", choices=SCHEMES, default=MULTIPATH)

    sub.add_parser("validate", parents=[common],
                   help="analytic vs Monte-Carlo comparison report")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "optimize":
            return cmd_optimize(args)
        return cmd_validate(args)
    except (UsageError, ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``fdrelay analyze | sweep | simulate``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

from .errors import ConfigurationError, DomainAssumptionError
from .scenario import Scenario, SweepSpec, analyse, load_scenario_file, point_record, scenario_from_mapping
from .simulator import SimConfig, simulate_with_verdict

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INDETERMINATE = 3


def fmt(value) -> str:
    """Full-precision text for CSV cells."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def _overrides(pairs) -> dict:
    values = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigurationError(f"--set expects KEY=VALUE, got {pair!r}")
        values[key.strip()] = value.strip()
    return values


def _scenario(args) -> tuple:
    scenario, sweep = (Scenario(), None) if args.scenario is None else load_scenario_file(args.scenario)
    scenario = scenario_from_mapping(_overrides(args.set), scenario)
    sim = {}
    for key in ("slots", "seed", "warmup"):
        if getattr(args, key, None) is not None:
            sim[key] = getattr(args, key)
    return scenario_from_mapping(sim, scenario), sweep


def _simulate(scenario: Scenario, cfg):
    sim_cfg = SimConfig(cfg, scenario.slots, scenario.seed, scenario.warmup)
    return simulate_with_verdict(sim_cfg)


def evaluate_point(scenario: Scenario, simulate: bool = False) -> dict:
    """Analytical record for one scenario, with empirical columns when ``simulate``."""
    cfg, qa, th = analyse(scenario)
    record = point_record(scenario, cfg, qa, th)
    if simulate:
        report, verdict = _simulate(scenario, cfg)
        record.update({"sim_" + k: v for k, v in report.as_dict().items()})
        record["sim_verdict"] = verdict.verdict
    return record


def _table(record: dict) -> str:
    width = max(len(k) for k in record)
    lines = []
    for key, value in record.items():
        text = f"{value:.6g}" if isinstance(value, float) else str(value)
        lines.append(f"{key:<{width}}  {text}")
    return "\n".join(lines)


def _sweep_task(item):
    scenario, simulate = item
    return evaluate_point(scenario, simulate)


def run_sweep(scenario: Scenario, spec: SweepSpec, simulate: bool = False, jobs: int = 1, curve=None) -> list:
    """Evaluate every sweep point, optionally for several values of a curve variable.

    Rows come back in sweep order whatever the completion order.
    """
    curve_var, curve_values = curve if curve else (None, [None])
    points = []
    for cv in curve_values:
        base = scenario if curve_var is None else scenario_from_mapping({curve_var: cv}, scenario)
        for x in spec.values():
            points.append((cv, x, scenario_from_mapping({spec.variable: x}, base)))

    items = [(sc, simulate) for _, _, sc in points]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_sweep_task, items))
    else:
        records = [_sweep_task(item) for item in items]

    rows = []
    for (cv, x, _), record in zip(points, records):
        row = {"sweep_var": spec.variable, "sweep_value": x}
        if curve_var is not None:
            row["curve_var"] = curve_var
            row["curve_value"] = cv
        row.update(record)
        rows.append(row)
    return rows


def write_csv(rows: list, stream) -> None:
    fields = []
    for row in rows:
        fields.extend(k for k in row if k not in fields)
    writer = csv.DictWriter(stream, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: fmt(v) for k, v in row.items()})


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", metavar="FILE", help="TOML scenario file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a scenario key (repeatable)")
    common.add_argument("--slots", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--warmup", type=int)

    parser = argparse.ArgumentParser(prog="fdrelay", description="Full-duplex relay random-access model")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="closed-form analysis of one point")
    p.add_argument("--simulate", action="store_true", help="add Monte Carlo estimates")
    p.add_argument("--json", action="store_true", help="print only the JSON record")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo run with stability verdict")
    p.add_argument("--strict", action="store_true", help="exit 3 on an indeterminate stability verdict")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("sweep", parents=[common], help="CSV sweep over one variable")
    p.add_argument("--sweep-var", choices=("g", "gamma", "q", "q0", "n", "q1", "q2"))
    p.add_argument("--from", dest="start", type=float)
    p.add_argument("--to", dest="stop", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--log", action="store_true", help="logarithmic spacing")
    p.add_argument("--curve", metavar="VAR=V1,V2,...", help="repeat the sweep for each value of VAR")
    p.add_argument("--simulate", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", metavar="CSV", help="output file (default stdout)")
    return parser


def _sweep_spec(args, from_file: SweepSpec | None) -> SweepSpec:
    if args.sweep_var is None:
        if from_file is None:
            raise ConfigurationError("sweep: give --sweep-var/--from/--to/--steps or a [sweep] table")
        return from_file
    if args.start is None:
        raise ConfigurationError("sweep: --from is required")
    stop = args.start if args.stop is None else args.stop
    steps = args.steps if args.steps is not None else (1 if stop == args.start else 11)
    return SweepSpec(args.sweep_var, args.start, stop, steps, args.log)


def _curve(text):
    if text is None:
        return None
    var, sep, values = text.partition("=")
    if not sep or not values:
        raise ConfigurationError(f"--curve expects VAR=V1,V2,..., got {text!r}")
    return var.strip(), [v.strip() for v in values.split(",")]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        scenario, file_sweep = _scenario(args)
        if args.command == "analyze":
            record = evaluate_point(scenario, args.simulate)
            if not args.json:
                print(_table(record))
            print(json.dumps(record))
            return EXIT_OK

        if args.command == "simulate":
            record = evaluate_point(scenario, simulate=True)
            if not args.json:
                print(_table(record))
            print(json.dumps(record))
            if args.strict and record["sim_verdict"] == "indeterminate":
                return EXIT_INDETERMINATE
            return EXIT_OK

        spec = _sweep_spec(args, file_sweep)
        rows = run_sweep(scenario, spec, args.simulate, args.jobs, _curve(args.curve))
        if args.out:
            with open(args.out, "w", newline="") as fh:
                write_csv(rows, fh)
        else:
            buf = io.StringIO()
            write_csv(rows, buf)
            sys.stdout.write(buf.getvalue())
        return EXIT_OK
    except (ConfigurationError, DomainAssumptionError) as exc:
        print(f"fdrelay: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

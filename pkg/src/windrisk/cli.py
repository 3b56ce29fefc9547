"""Command-line interface.

Subcommands cover the whole workflow: gen-data (training dataset), gen-log
(synthetic flight log), learn (dataset -> rules), map (rules -> decision
map), estimate (log -> risk records), inspect (print a rule set). Exit codes:
0 success, 1 bad input or usage, 2 internal fault.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from typing import Optional

from .accumulator import AccumulatorParams
from .errors import ConfigError, InputError, WindriskError
from .margin import DEFAULT_WINDOW_S, NormalizationMode, SaturationLimits
from .pipeline import (
    PipelineConfig,
    parse_log,
    run_pipeline,
    write_log,
    write_records,
    SOURCE_HELD,
)
from .rules import (
    DEFAULT_GRID,
    build_decision_map,
    learn_ruleset,
    load_map,
    load_rules,
    save_map,
    save_rules,
)
from .synthdata import (
    DEFAULT_DURATION_S,
    DEFAULT_RATE_HZ,
    DroneParams,
    WindScenario,
    gen_dataset,
    scenario_grid,
    simulate_flight,
    write_dataset,
)

_GRID_RE = re.compile(r"^(\d+)x(\d+)$")

_CONFIG_KEYS = {"saturation", "window_s", "accumulator", "emit_rate"}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _parse_grid(text: str) -> tuple:
    m = _GRID_RE.match(text.strip())
    if not m:
        raise InputError(f"grid must look like ROWSxCOLS, got {text!r}")
    rows, cols = int(m.group(1)), int(m.group(2))
    if rows < 2 or cols < 2:
        raise InputError(f"grid must be at least 2x2, got {text!r}")
    return rows, cols


def _parse_gust(text: str) -> tuple:
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"gust must look like T_START:T_END:EXTRA_MPS, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise InputError(f"bad gust {text!r}: {exc}") from exc


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: config must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise InputError(f"{path}: unknown config keys: {', '.join(sorted(unknown))}")
    return data


def _limits_from(cfg: dict) -> SaturationLimits:
    sat = cfg.get("saturation", {})
    try:
        mode = NormalizationMode(sat.get("mode", "linear"))
    except ValueError as exc:
        raise InputError(f"unknown normalization mode {sat.get('mode')!r}") from exc
    return SaturationLimits(
        t_low=float(sat.get("t_low", 1000.0)),
        t_high=float(sat.get("t_high", 2000.0)),
        mode=mode,
    )


def _accumulator_from(cfg: dict) -> AccumulatorParams:
    acc = cfg.get("accumulator", {})
    return AccumulatorParams(
        window=int(acc.get("window", 50)),
        x_high=float(acc.get("x_high", 75.0)),
        x_low=float(acc.get("x_low", 25.0)),
        k_i=float(acc.get("k_i", 2.0)),
        k_d=float(acc.get("k_d", 1.0)),
    )


def _cmd_gen_data(args) -> int:
    rows, cols = _parse_grid(args.grid)
    means = [18.0 * i / (rows - 1) for i in range(rows)]
    variances = [40.0 * j / (cols - 1) for j in range(cols)]
    scenarios = scenario_grid(
        wind_means=means,
        wind_vars=variances,
        duration=args.duration,
        base_seed=args.seed,
        include_gusts=not args.no_gusts,
    )
    cfg = _load_config(args.config)
    pairs = gen_dataset(scenarios, DroneParams(), rate=args.rate, limits=_limits_from(cfg))
    write_dataset(pairs, args.out)
    print(f"wrote {len(pairs)} pairs ({len(scenarios)} scenarios) to {args.out}")
    return 0


def _cmd_gen_log(args) -> int:
    scenario = WindScenario(
        wind_mean=args.wind_mean,
        wind_var=args.wind_var,
        duration=args.duration,
        seed=args.seed,
        gusts=tuple(_parse_gust(g) for g in args.gust),
    )
    cfg = _load_config(args.config)
    frames = simulate_flight(scenario, DroneParams(), rate=args.rate, limits=_limits_from(cfg))
    write_log(frames, args.out)
    print(f"wrote {len(frames)} frames to {args.out}")
    return 0


def _cmd_learn(args) -> int:
    from .synthdata import read_dataset

    pairs = read_dataset(args.data)
    ruleset = learn_ruleset(pairs)
    save_rules(ruleset, args.out)
    print(f"learned {len(ruleset)} rules from {len(pairs)} pairs -> {args.out}")
    return 0


def _cmd_map(args) -> int:
    ruleset = load_rules(args.rules)
    rows, cols = _parse_grid(args.grid)
    dmap = build_decision_map(ruleset, rows=rows, cols=cols)
    save_map(dmap, args.out)
    n_covered = int(dmap.covered.sum())
    print(
        f"built {rows}x{cols} map from {len(ruleset)} rules "
        f"({n_covered} covered, {dmap.covered.size - n_covered} interpolated) -> {args.out}"
    )
    if args.csv:
        dmap.write_csv(args.csv)
        print(f"wrote cell table to {args.csv}")
    if args.plot:
        from .figures import plot_decision_map

        plot_decision_map(dmap, args.plot)
        print(f"rendered {args.plot}")
    return 0


def _cmd_estimate(args) -> int:
    if args.rules is None and args.map is None:
        raise InputError("estimate needs --rules, --map, or both")
    cfg = _load_config(args.config)
    window = args.window if args.window is not None else float(cfg.get("window_s", DEFAULT_WINDOW_S))
    emit_rate = args.emit_rate if args.emit_rate is not None else cfg.get("emit_rate")
    config = PipelineConfig(
        rules=load_rules(args.rules) if args.rules else None,
        decision_map=load_map(args.map) if args.map else None,
        limits=_limits_from(cfg),
        window_s=window,
        accumulator=_accumulator_from(cfg),
        emit_rate=None if emit_rate is None else float(emit_rate),
    )
    frames = parse_log(args.log)
    records = run_pipeline(config, frames)
    write_records(records, args.out, include_source=args.with_source)
    held = sum(1 for r in records if r.source == SOURCE_HELD)
    if held:
        print(
            f"warning: {held} of {len(records)} steps outside rule coverage with no "
            f"decision map; risk held at last value there",
            file=sys.stderr,
        )
    print(
        f"wrote {len(records)} records to {args.out} "
        f"(final risk_acc {records[-1].risk_acc:.1f}%)"
    )
    if args.plot:
        from .figures import plot_risk_trace

        plot_risk_trace(records, args.plot)
        print(f"rendered {args.plot}")
    return 0


def _cmd_inspect(args) -> int:
    ruleset = load_rules(args.rules)
    prov = ruleset.provenance
    if prov:
        origin = ", ".join(f"{k}={v}" for k, v in sorted(prov.items()))
        print(f"# {origin}")
    print(f"{'margin mean':<12} {'margin std':<12} {'risk':<12} degree")
    for r in ruleset.rules:
        print(f"{r.antecedent_mean:<12} {r.antecedent_std:<12} {r.consequent:<12} {r.degree:.4f}")
    if args.plot:
        from .figures import plot_memberships

        plot_memberships(ruleset.variables, args.plot)
        print(f"rendered {args.plot}")
    return 0


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--config", default=None, help="JSON config file")

    parser = _Parser(prog="windrisk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-data", parents=[common], help="generate a training dataset CSV")
    p.add_argument("--grid", default="19x11", help="wind mean x variance grid (default 19x11)")
    p.add_argument("--duration", type=float, default=DEFAULT_DURATION_S)
    p.add_argument("--rate", type=float, default=DEFAULT_RATE_HZ)
    p.add_argument("--no-gusts", action="store_true", help="skip the gust scenarios")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("gen-log", parents=[common], help="generate a synthetic flight log CSV")
    p.add_argument("--wind-mean", type=float, default=0.0)
    p.add_argument("--wind-var", type=float, default=0.0)
    p.add_argument("--duration", type=float, default=DEFAULT_DURATION_S)
    p.add_argument("--rate", type=float, default=DEFAULT_RATE_HZ)
    p.add_argument(
        "--gust",
        action="append",
        default=[],
        metavar="T0:T1:EXTRA",
        help="add a gust window (repeatable)",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_log)

    p = sub.add_parser("learn", parents=[common], help="learn rules from a dataset CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser("map", parents=[common], help="build a decision map from rules")
    p.add_argument("--rules", required=True)
    p.add_argument("--grid", default=f"{DEFAULT_GRID}x{DEFAULT_GRID}")
    p.add_argument("--out", required=True)
    p.add_argument("--csv", default=None, help="also write the long-form cell table")
    p.add_argument("--plot", default=None, help="also render the map as a PNG")
    p.set_defaults(func=_cmd_map)

    p = sub.add_parser("estimate", parents=[common], help="run the estimator over a flight log")
    p.add_argument("--log", required=True)
    p.add_argument("--rules", default=None)
    p.add_argument("--map", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=float, default=None, help="margin window seconds")
    p.add_argument("--emit-rate", type=float, default=None, help="records per second")
    p.add_argument("--with-source", action="store_true", help="append the risk source column")
    p.add_argument("--plot", default=None, help="also render the risk trace as a PNG")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("inspect", parents=[common], help="print a rule set as a table")
    p.add_argument("rules")
    p.add_argument("--plot", default=None, help="render the membership functions as a PNG")
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (WindriskError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # the CLI contract reserves 2 for faults
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``lifi-feedback <subcommand> [options]``.

Every subcommand writes one or more CSV files (plus ``.json`` metadata
sidecars) into ``--out``. Failures print a one-line JSON object to stderr
and exit with a code that identifies the error class.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import montecarlo as mc
from .channel import access_points_from_config, gain_map, room_from_config, transceiver_from_config
from .config import NetworkConfig, load_config
from .errors import (ConfigError, DegenerateGeometryError, InfeasibleRateError, IntervalError,
                     LiFiError, NoRootError)
from .update_interval import UpdateIntervalParams, expected_throughput

EXIT_CODES = {
    ConfigError: 2,
    InfeasibleRateError: 3,
    IntervalError: 3,
    DegenerateGeometryError: 3,
    NoRootError: 4,
}


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="JSON file overriding the default parameters")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--seed", type=int, help="master seed (default: the config seed)")
    p.add_argument("--tier", choices=sorted(mc.TIERS), default="smoke",
                   help="run counts: 'smoke' for a quick look, 'paper' for full statistics")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="lifi-feedback",
                                     description="LiFi feedback-reduction experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("channel-map", parents=[common], help="DC gain map of the centre AP")
    p.add_argument("--resolution", type=float, default=0.1, help="grid step in metres")
    p.add_argument("--ap", type=int, help="AP index (default: the centre AP)")

    p = sub.add_parser("downlink-compare", parents=[common],
                       help="downlink throughput of FF, LCF and one-bit feedback versus N")
    p.add_argument("--scheme", action="append", choices=["ff", "lcf", "onebit"],
                   help="restrict to this scheme (repeatable)")
    p.add_argument("--r-req", type=float, default=20.0, help="requested rate in Mbit/s")

    p = sub.add_parser("overhead", parents=[common], help="feedback bits per frame versus K")
    p.add_argument("--velocity", type=float, action="append",
                   help="UE speed for the LFF rows (repeatable)")

    p = sub.add_parser("topt", parents=[common],
                       help="optimal update interval: closed form, numeric root and MC search")
    p.add_argument("--velocity", type=float, action="append", help="UE speed (repeatable)")
    p.add_argument("--t-u", type=float,
                   help="evaluate the expected sum throughput at this interval instead")

    p = sub.add_parser("overload", parents=[common], help="optimal interval versus overload")
    p.add_argument("--velocity", type=float, action="append", help="UE speed (repeatable)")
    p.add_argument("--parametrization", choices=["served", "requested"], default="served")

    p = sub.add_parser("scenarios", parents=[common],
                       help="sum throughput versus speed for the three update policies")
    p.add_argument("--velocity", type=float, action="append", help="UE speed (repeatable)")

    p = sub.add_parser("table4", parents=[common], help="sum throughput of the four schemes")
    p.add_argument("--scheme", action="append", choices=["ff", "onebit", "lcf", "lff"],
                   help="keep only these schemes in the output (repeatable)")
    return parser


def _write(table: mc.ResultTable, out: Path, name: str) -> Path:
    path = table.to_csv(out / name)
    print(path)
    return path


def _cmd_channel_map(args, cfg: NetworkConfig, out: Path):
    aps = access_points_from_config(cfg)
    ap = aps[len(aps) // 2 if args.ap is None else args.ap]
    xs, ys, gain = gain_map(ap, room_from_config(cfg), transceiver_from_config(cfg),
                            args.resolution, cfg.ue_height_m)
    table = mc.ResultTable("gain_map", ["x_m", "y_m", "gain"])
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            table.rows.append((float(x), float(y), float(gain[i, j])))
    table.metadata = {"experiment": "gain_map", "ap_index": ap.index, "resolution_m": args.resolution,
                      "config": cfg.to_dict()}
    _write(table, out, "gain_map.csv")


def _cmd_downlink_compare(args, cfg, out, seed, tier):
    schemes = tuple(args.scheme) if args.scheme else ("ff", "lcf", "onebit")
    table = mc.compare_schemes_downlink([1, 5, 10, 15, 20], cfg, schemes,
                                        n_runs=tier["compare"], seed=seed, r_req=args.r_req * 1e6)
    _write(table, out, "downlink_compare.csv")


def _cmd_overhead(args, cfg, out):
    velocities = tuple(args.velocity) if args.velocity else (0.0, 0.5, 1.4)
    _write(mc.overhead_table(cfg, velocities=velocities), out, "overhead.csv")


def _cmd_topt(args, cfg, out, seed, tier):
    velocities = tuple(args.velocity) if args.velocity else (0.5, 1.0, 1.4, 2.0, 2.5)
    if args.t_u is not None:
        table = mc.ResultTable("topt_eval", ["velocity_mps", "t_u_s", "analytic_mbps",
                                             "mc_mean_mbps", "mc_stderr_mbps", "n"])
        for v in velocities:
            p = UpdateIntervalParams.from_config(cfg, v=v)
            exact = expected_throughput(args.t_u, p).weighted_sum
            mean, se = mc.expected_sum_throughput(args.t_u, p, tier["topt"], seed)
            table.rows.append((v, args.t_u, exact / 1e6, mean / 1e6, se / 1e6, tier["topt"]))
        table.metadata = mc.experiment_metadata("topt_eval", cfg, seed, tier["topt"])
        _write(table, out, "topt_eval.csv")
        return
    _write(mc.topt_velocity_sweep(velocities, cfg, n_runs=tier["topt"], seed=seed,
                                  n_grid=tier["grid"]), out, "topt_velocity.csv")
    powers = tuple(np.arange(2.0, 21.0, 1.0))
    _write(mc.topt_power_sweep(powers, cfg, n_runs=tier["topt"], seed=seed, n_grid=tier["grid"]),
           out, "topt_power.csv")


def _cmd_overload(args, cfg, out, seed, tier):
    velocities = tuple(args.velocity) if args.velocity else (1.0, 1.4, 2.0)
    lambdas = tuple(np.round(np.arange(0.2, 1.01, 0.1), 10))
    _write(mc.overload_sweep(lambdas, velocities, cfg, n_runs=tier["topt"], seed=seed,
                             n_grid=tier["grid"], parametrization=args.parametrization),
           out, "topt_overload.csv")


def _cmd_scenarios(args, cfg, out, seed, tier):
    velocities = tuple(args.velocity) if args.velocity else (0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5)
    _write(mc.scenario_sweep(sorted(velocities), cfg, n_runs=tier["scenarios"], seed=seed),
           out, "scenarios.csv")


def _cmd_schemes(args, cfg, out, seed, tier):
    table = mc.scheme_sum_throughput(cfg, n_runs=tier["schemes"], seed=seed)
    if args.scheme:
        table.rows = [r for r in table.rows if r[0] in args.scheme]
    _write(table, out, "scheme_throughput.csv")


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
        seed = cfg.seed
        tier = mc.TIERS[args.tier]
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        cmd = args.command
        if cmd == "channel-map":
            _cmd_channel_map(args, cfg, out)
        elif cmd == "downlink-compare":
            _cmd_downlink_compare(args, cfg, out, seed, tier)
        elif cmd == "overhead":
            _cmd_overhead(args, cfg, out)
        elif cmd == "topt":
            _cmd_topt(args, cfg, out, seed, tier)
        elif cmd == "overload":
            _cmd_overload(args, cfg, out, seed, tier)
        elif cmd == "scenarios":
            _cmd_scenarios(args, cfg, out, seed, tier)
        else:
            _cmd_schemes(args, cfg, out, seed, tier)
    except LiFiError as exc:
        code = next((c for cls, c in EXIT_CODES.items() if isinstance(exc, cls)), 1)
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}),
              file=sys.stderr)
        return code
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

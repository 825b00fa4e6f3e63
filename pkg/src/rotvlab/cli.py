"""Command-line front end: ``rotvlab {simulate,linearize,gains,compare}``.

Exit codes: 0 success, 2 configuration error, 3 trim/synthesis error,
4 simulation divergence.  ``ROTVLAB_CONFIG`` names the config file when
``--config`` is omitted.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, RotvError
from .lincontrol import build_gain_schedule, linearize
from .model import VehicleModel
from .params import VehicleParams
from .scenarios import (CONTROLLERS, SCENARIOS, RunConfig, compare_controllers, lqr_weights,
                        run_scenario)

STATE_NAMES = ("z", "w", "phi", "p", "theta", "q")
INPUT_NAMES = ("u1", "u2", "u3")


def _matrix_csv(name: str, M, cols) -> list[str]:
    lines = [",".join(("matrix", "row") + tuple(cols))]
    for r, row in zip(STATE_NAMES, M):
        lines.append(",".join([name, r] + [f"{v:.9g}" for v in row]))
    return lines


def _speeds(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"--speeds must be a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise ConfigError("--speeds is empty")
    return vals


def cmd_simulate(args) -> int:
    rc = RunConfig(args.scenario, args.controller, args.seed,
                   Path(args.out) if args.out else None, args.config)
    res = run_scenario(rc, load_config(args.config))
    sys.stdout.write(res.report)
    if res.csv_path is not None:
        print(f"wrote {res.csv_path} and {res.report_path}", file=sys.stderr)
    return 0


def cmd_linearize(args) -> int:
    model = VehicleModel(VehicleParams.from_config(load_config(args.config)))
    ss = linearize(args.speed, model)
    lines = _matrix_csv("A", ss.A, STATE_NAMES) + _matrix_csv("B", ss.B, INPUT_NAMES)
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_gains(args) -> int:
    cfg = load_config(args.config)
    model = VehicleModel(VehicleParams.from_config(cfg))
    sched = build_gain_schedule(_speeds(args.speeds), lqr_weights(cfg), model)
    sys.stdout.write(sched.to_csv())
    return 0


def cmd_compare(args) -> int:
    table, _ = compare_controllers(load_config(args.config), args.scenario, args.seed)
    sys.stdout.write(table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rotvlab", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", default=None,
                       help="config file layered over the defaults (default: $ROTVLAB_CONFIG)")
        return p

    p = with_config(sub.add_parser("simulate", help="run one scenario, write CSV and report"))
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--controller", default="lqr", choices=CONTROLLERS)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=".", help="output directory (default: current directory)")
    p.set_defaults(func=cmd_simulate)

    p = with_config(sub.add_parser("linearize", help="print A and B at one surge speed as CSV"))
    p.add_argument("--speed", type=float, required=True)
    p.set_defaults(func=cmd_linearize)

    p = with_config(sub.add_parser("gains", help="print the LQR gain schedule as CSV"))
    p.add_argument("--speeds", default="1,2,3,4,5")
    p.set_defaults(func=cmd_gains)

    p = with_config(sub.add_parser("compare", help="LQR vs PID table on one scenario"))
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="rotvlab: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except RotvError as exc:
        print(f"rotvlab: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main())

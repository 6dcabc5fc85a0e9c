"""Command-line interface: run, sweep, case and trace subcommands."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import fp, harness


def _load(args):
    if args.config:
        scenario, sweep, fp_config = harness.load_scenario(args.config)
    else:
        scenario, sweep, fp_config = harness.default_scenario(), harness.SweepSpec(), fp.FpConfig()
    if args.seed is not None:
        fp_config = replace(fp_config, init_seed=args.seed)
    if getattr(args, "scheme", None):
        sweep = replace(sweep, schemes=tuple(args.scheme.split(",")))
    return scenario, sweep, fp_config


def _cmd_run(args):
    scenario, sweep, fp_config = _load(args)
    scheme = (sweep.schemes[0] if not getattr(args, "scheme", None)
              else args.scheme.split(",")[0])
    report, converged, iterations = harness.evaluate_scheme(scenario, scheme, fp_config)
    out = sys.stdout if not args.out else open(args.out, "w", encoding="utf-8")
    try:
        fields = [
            ("scheme", scheme),
            ("sum_capacity_bps_hz", "%.9g" % report.sum),
            ("cap_user_a", "%.9g" % report.user_a),
            ("cap_user_b", "%.9g" % report.user_b),
            ("private_a", "%.9g" % report.private_a),
            ("private_b", "%.9g" % report.private_b),
            ("common_pair", "%.9g" % report.common_pair),
            ("converged", "true" if converged else "false"),
            ("iterations", str(iterations)),
            ("seed", str(fp_config.init_seed)),
        ]
        for name, value in fields:
            out.write("%s: %s\n" % (name, value))
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_sweep(args):
    scenario, sweep, fp_config = _load(args)
    rows = harness.run_sweep(scenario, sweep, fp_config)
    harness.emit_csv(rows, args.out or "sweep.csv")
    return 0


def _cmd_case(args):
    case = harness.preset_case(args.id)
    print("name: %s" % case.name)
    print("modes: %s" % ",".join(str(l) for l in case.modes))
    print("rx_count: %d" % case.rx_count)
    print("tx_count: %d" % case.tx_count)
    print("tau_sq: %s" % ",".join("%g" % t for t in case.tau_sq))
    return 0


def _cmd_trace(args):
    scenario, _, fp_config = _load(args)
    records = []
    fp.optimize(scenario, fp_config,
                trace_hook=lambda pair, it, value, power: records.append((pair, it, value, power)))
    out = sys.stdout if not args.out else open(args.out, "w", encoding="utf-8", newline="\n")
    try:
        out.write("pair,iteration,surrogate_bps_hz,power_w\n")
        for pair, it, value, power in records:
            out.write("%d,%d,%.9g,%.9g\n" % (pair, it, value, power))
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oamrs",
        description="Downlink OAM-MIMO rate-splitting link simulator and precoder optimizer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int, help="override the optimizer seed")
        p.add_argument("--out", help="output path")

    p_run = sub.add_parser("run", help="optimize one scenario and print the rate report")
    common(p_run)
    p_run.add_argument("--scheme", help="comma-separated scheme list; first entry is used")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a distance or power sweep to CSV")
    common(p_sweep)
    p_sweep.add_argument("--scheme", help="comma-separated scheme subset to evaluate")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_case = sub.add_parser("case", help="print one tabulated mode-combination preset")
    p_case.add_argument("--id", type=int, required=True)
    p_case.set_defaults(func=_cmd_case)

    p_trace = sub.add_parser("trace", help="per-iteration convergence CSV of one run")
    common(p_trace)
    p_trace.set_defaults(func=_cmd_trace)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (harness.ConfigError, ValueError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 1
    except fp.NumericalFailure as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

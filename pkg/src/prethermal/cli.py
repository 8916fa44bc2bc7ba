"""Command-line entry point: sweep subcommands plus CSV-to-SVG plotting.

Each subcommand loads an optional JSON config, applies targeted overrides
and hands off to the corresponding harness run function.  Failures print a
single machine-readable JSON line to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    SweepConfig,
    emit_plot,
    run_dynamics,
    run_expansions,
    run_jc,
    run_spectrum,
)

_RUNNERS = {
    "dynamics": run_dynamics,
    "spectrum": run_spectrum,
    "expansions": run_expansions,
    "jc": run_jc,
}

_JC_DEFAULTS = {"coupling_profile": "inverse_cube_minimal_image", "observables": ()}


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--model", choices=("kdm", "adm", "both"))
    sub.add_argument("--L", nargs="+", type=int, help="system sizes")
    sub.add_argument("--jtau", nargs="+", type=float, help="explicit Jtau grid values")
    sub.add_argument("--rc", type=int, help="basis range cutoff")
    sub.add_argument("--order", type=int, help="expansion order")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--cache", choices=("reuse", "overwrite"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prethermal",
        description="Floquet spin-chain sweeps: dynamics, Lambda spectra, expansions, J_c tau",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        _add_common(subparsers.add_parser(name))
    plot = subparsers.add_parser("plot", help="render CSV files to a static SVG")
    plot.add_argument("--csv", nargs="+", required=True)
    plot.add_argument("--spec", required=True, help="plot spec: JSON file or inline JSON")
    plot.add_argument("--out", required=True, help="output SVG path")
    return parser


def _load_config(args: argparse.Namespace, command: str) -> SweepConfig:
    data = {}
    if command == "jc":
        data.update(_JC_DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            data.update(json.load(fh))
    if args.model:
        data["model"] = args.model
    if args.L:
        data["L"] = args.L
    if args.jtau:
        data["jtau"] = args.jtau
    if args.rc is not None:
        data["r_c"] = args.rc
    if args.order is not None:
        data["orders"] = [args.order]
    if args.out:
        data["out"] = args.out
    if args.cache:
        data["cache"] = args.cache
    return SweepConfig.from_dict(data)


def _load_plot_spec(text: str) -> dict:
    stripped = text.strip()
    if stripped.startswith("{"):
        return json.loads(stripped)
    with open(text) as fh:
        return json.load(fh)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plot":
            out = emit_plot(args.csv, _load_plot_spec(args.spec), args.out)
            print(out)
            return 0
        config = _load_config(args, args.command)
        record = _RUNNERS[args.command](config)
        print(
            json.dumps(
                {
                    "digest": record.digest,
                    "reused": record.reused,
                    "files": len(record.files),
                    "out": config.out,
                }
            )
        )
        return 0
    except Exception as exc:  # surface one machine-readable line
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

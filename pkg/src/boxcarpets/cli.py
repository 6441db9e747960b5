"""Command-line interface.

One subcommand per product; global flags override the configuration file.
Exit codes: 0 success, 1 when any product failed, 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import sys

from .config import PRODUCT_NAMES, apply_overrides, parse_config, parse_config_file
from .errors import CarpetError, ConfigError, DomainError
from .products import run


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="configuration file (INI-style)")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--jobs", type=int, default=1, metavar="N", help="worker count")
    common.add_argument("--seed-count", type=int, metavar="N", help="trajectory ensemble size")
    common.add_argument("--gamma", type=float, metavar="X", help="energy-pair damping control")
    common.add_argument("--lambda", dest="lam", metavar="{0|formula|X}", help="spatial damping rate")
    common.add_argument("--x0", type=float, metavar="X", help="signal center")
    common.add_argument("--kind", choices=("single", "double"), help="signal kind")
    common.add_argument("--tmax", type=float, metavar="MULT_TAU", help="time span in units of tau")
    common.add_argument("--renormalize", action="store_true", default=None,
                        help="rescale truncated coefficients to unit norm")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boxcarpets", description=__doc__)
    common = _common_flags()
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "carpet": "space-time carpet of the density or velocity field",
        "trajectories": "Bohmian streamline ensemble",
        "densmat": "position density-matrix snapshots",
        "purity": "purity decay curve",
        "sweep": "asymptotic purity and fit times across signal centers",
        "fit": "triple-exponential fit of the purity curve",
        "decaymap": "pair decay-time matrix",
    }
    for name in PRODUCT_NAMES:
        p = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "carpet":
            p.add_argument("--quantity", choices=("density", "velocity"), help="field to render")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = parse_config_file(args.config) if args.config else parse_config("")
        overrides = {}
        if args.x0 is not None:
            overrides["x0"] = args.x0
        if args.kind is not None:
            overrides["kind"] = args.kind
        if args.gamma is not None:
            overrides["gamma"] = args.gamma
        if args.lam is not None:
            overrides["lam"] = args.lam
        if args.tmax is not None:
            overrides["tmax_tau"] = args.tmax
        if args.seed_count is not None:
            overrides["seed_count"] = args.seed_count
        if args.out is not None:
            overrides["out_dir"] = args.out
        if args.renormalize is not None:
            overrides["renormalize"] = args.renormalize
        if getattr(args, "quantity", None) is not None:
            overrides["quantity"] = args.quantity
        overrides["products"] = (args.command,)
        config = apply_overrides(config, **overrides)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        manifest = run(config, parallelism=max(args.jobs, 1))
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except CarpetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    for name, files in manifest["products"].items():
        for f in files:
            print(f"wrote {f}")
    if manifest["failures"]:
        for name, message in manifest["failures"].items():
            print(f"product {name} failed: {message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

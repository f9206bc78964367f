"""Command-line front end.

Exit codes: 0 success, 1 numerical failure (including strict-mode regime
violations and failed validation), 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import config as config_mod
from . import runs
from .errors import NumericalError
from .records import jsonable

log = logging.getLogger("cpo_biphoton")

# flag -> config key
_PARAM_FLAGS = {
    "--Gamma-ba": "Gamma_ba",
    "--gamma-ba": "gamma_ba",
    "--gamma-bc": "gamma_bc",
    "--gamma-ca": "gamma_ca",
    "--V0": "V0",
    "--kappa": "kappa",
    "--Omega": "Omega",
    "--L-tilde": "L_tilde",
}


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", metavar="PATH", help="flat 'key = value' config file")
    parser.add_argument("--mode", choices=["full", "thin", "closed"],
                        help="quadrature-full, quadrature-thin or closed-form")
    parser.add_argument("--out", metavar="DIR", help="output directory (default: out)")
    parser.add_argument("--strict", action="store_true", default=None,
                        help="treat regime violations as errors")
    parser.add_argument("--workers", type=int, metavar="N", help="parallel sweep workers")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key (repeatable)")
    parser.add_argument("-v", "--verbose", action="store_true")
    group = parser.add_argument_group("physical parameters (Gamma_ba units)")
    for flag, key in _PARAM_FLAGS.items():
        group.add_argument(flag, dest=f"p_{key}", metavar="X")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpo-biphoton",
        description="Narrowband biphotons from long-lived coherent population oscillations.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "fig2": "correlation curves for a resonant and a detuned pump (shared normalization)",
        "sweep": "metrics over a Cartesian product of parameter values",
        "validate": "regime margins, harmonic-balance cross-check, singles-rate audit",
        "susceptibility": "alpha/beta versus sideband detuning",
        "transfer": "backward-wave coefficients A/B versus sideband detuning",
        "g2": "single correlation run with metrics",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        _common(p)
        if name == "sweep":
            p.add_argument("--axis", action="append", default=[], metavar="NAME=V1,V2,...",
                           help="sweep axis (repeatable)")
            p.add_argument("--max-points", type=int, help="point budget (default 10000)")
    return parser


def _overrides(args) -> dict:
    out = {}
    for item in args.set:
        if "=" not in item:
            raise config_mod.ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    for key in _PARAM_FLAGS.values():
        value = getattr(args, f"p_{key}")
        if value is not None:
            out[key] = value
    if args.mode:
        out["mode"] = args.mode
    if args.out:
        out["out"] = args.out
    if args.strict:
        out["strict"] = "true"
    if args.workers is not None:
        out["workers"] = str(args.workers)
    for axis in getattr(args, "axis", []):
        if "=" not in axis:
            raise config_mod.ConfigError(f"--axis expects NAME=V1,V2,..., got {axis!r}")
        name, values = axis.split("=", 1)
        out[f"sweep.{name.strip()}"] = values
    if getattr(args, "max_points", None) is not None:
        out["max_points"] = str(args.max_points)
    return out


def load_config(args) -> config_mod.RunConfig:
    base = config_mod.load_file(args.config) if args.config else {}
    return config_mod.build(config_mod.merge(base, _overrides(args)))


def _print(obj):
    print(json.dumps(jsonable(obj), indent=2))


def dispatch(command: str, cfg: config_mod.RunConfig) -> int:
    if command == "fig2":
        _, paths = runs.run_fig2(cfg)
    elif command == "sweep":
        _, _, paths = runs.run_sweep(cfg)
    elif command == "validate":
        report, path = runs.run_validate(cfg)
        _print(report)
        if cfg.strict and not report["all_ok"]:
            failed = [k for k, ok in report["checks"].items() if not ok]
            log.error("validation failed: %s", ", ".join(failed))
            return 1
        paths = [path]
    elif command == "susceptibility":
        _, path = runs.run_susceptibility(cfg)
        paths = [path]
    elif command == "transfer":
        _, path = runs.run_transfer(cfg)
        paths = [path]
    elif command == "g2":
        _, m, paths = runs.run_g2(cfg)
        _print(m.as_dict())
    else:  # pragma: no cover - argparse restricts choices
        raise config_mod.ConfigError(f"unknown command {command!r}")
    for path in paths:
        log.info("wrote %s", path)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return dispatch(args.command, cfg)
    except NumericalError as exc:
        log.error("%s", exc)
        return 1
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point ``seqnw``.

Exit status is 0 on success, 2 for configuration or usage errors and 1 for
runtime failures; errors are reported as one JSON line on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import bandwidth as bw
from .errors import ConfigError
from .experiments import KINDS, ExperimentConfig, _clean, preset, run_experiment, write_results
from .smallball import DistSpec, rate_constants

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return ExperimentConfig.from_dict(doc)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="seqnw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=f"run the {kind} experiment")
        sp.add_argument("--config", help="TOML experiment file (default: built-in preset)")
        sp.add_argument("--out", default="results", help="output directory")
        sp.add_argument("--seed", type=int, help="override the master seed")
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="worker processes; never changes the numbers")

    sp = sub.add_parser("constants", help="print rate constants for a design")
    sp.add_argument("--dist", default="chisq1", help="law of X^2, e.g. exp:1, gamma:2,1, chisq1")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--lam", type=float, default=1.0)
    sp.add_argument("--variant", choices=("iid", "gaussian"), default="iid")
    sp.add_argument("--ma-ratio", type=float, help="geometric MA coefficients for the gaussian variant")

    sp = sub.add_parser("bandwidth", help="tabulate optimal bandwidth exponents")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--n", type=float, nargs="+", default=[1e3, 1e4, 1e5, 1e6])
    sp.add_argument("--scale", type=float, default=1.0, help="constant multiplying (log n)^a")
    return parser


def _constants(args) -> dict:
    dist = DistSpec.parse(args.dist)
    coeffs = None
    if args.ma_ratio is not None:
        from .datagen import geometric_ma_coeffs

        coeffs = geometric_ma_coeffs(args.ma_ratio)
    out = rate_constants(dist, args.p, args.lam, args.variant, coeffs).as_dict()
    out.update(dist=str(dist), p=args.p, lam=args.lam)
    return out


def _bandwidth(args) -> dict:
    rows = []
    for n in args.n:
        a_pw = bw.a_opt_pointwise(n, args.beta, args.p)
        a_un = bw.a_opt_uniform(n, args.beta, args.p)
        rows.append({
            "n": n, "a_opt_pointwise": a_pw, "a_opt_uniform": a_un,
            "h_opt_pointwise": bw.h_opt(n, a_pw, args.scale), "h_opt_uniform": bw.h_opt(n, a_un, args.scale),
        })
    return {"p": args.p, "beta": args.beta, "scale": args.scale, "a_limit": bw.a_limit(args.p), "rows": rows}


def dispatch(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "constants":
            print(json.dumps(_clean(_constants(args)), sort_keys=True, indent=2))
            return 0
        if args.command == "bandwidth":
            print(json.dumps(_clean(_bandwidth(args)), sort_keys=True, indent=2))
            return 0
        cfg = load_config(args.config) if args.config else preset(args.command)
        if cfg.kind != args.command:
            raise ConfigError(f"config describes a {cfg.kind!r} experiment, not {args.command!r}")
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        result = run_experiment(cfg, args.workers)
        csv_path, json_path = write_results(result, args.out, cfg.experiment)
        print(json.dumps({"csv": str(csv_path), "json": str(json_path), "rows": len(result.records)}))
        return 0
    except (ConfigError, ValueError) as exc:
        _report("ConfigError", exc)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI must never crash with a traceback
        _report(type(exc).__name__, exc)
        return 1


def _report(kind, exc):
    print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()

"""Batch command line: ``simulate`` runs one configuration, ``sweep`` a grid."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import build_config
from .engine import Simulation, run_experiment
from .errors import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class _UsageError(Exception):
    pass


def _pairs(extra: list[str]) -> dict[str, str]:
    """Turn ``--key value`` / ``--key=value`` leftovers into overrides."""
    out: dict[str, str] = {}
    it = iter(extra)
    for token in it:
        if not token.startswith("--"):
            raise _UsageError(f"unexpected argument {token!r}")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            value = next(it, None)
            if value is None:
                raise _UsageError(f"missing value for --{key}")
        out[key.replace("-", "_")] = value
    return out


def _vary(specs: list[str]) -> dict[str, list[str]]:
    vary: dict[str, list[str]] = {}
    for spec in specs:
        if "=" not in spec:
            raise _UsageError(f"--vary expects key=v1,v2,... (got {spec!r})")
        key, values = spec.split("=", 1)
        vary[key.strip()] = [v.strip() for v in values.split(",") if v.strip()]
    return vary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="p2ptrust", description=__doc__, allow_abbrev=False)
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-generation progress")
    sub = parser.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", allow_abbrev=False, help="run one configuration; extra --key value pairs override it")
    sim.add_argument("--config", help="key=value config file")
    sim.add_argument("--out", required=True, help="output directory")
    sw = sub.add_parser("sweep", allow_abbrev=False, help="run every combination of the varied keys")
    sw.add_argument("--config", help="key=value config file")
    sw.add_argument("--vary", action="append", default=[], metavar="KEY=V1,V2")
    sw.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        overrides = _pairs(extra)
        cfg = build_config(args.config, overrides)
        if args.command == "simulate":
            Simulation(cfg).run(args.out)
        else:
            vary = _vary(args.vary)
            for key, values in vary.items():
                for value in values:
                    build_config(args.config, {**overrides, key: value})
            for path in run_experiment(cfg, vary, args.out):
                print(path)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - report anything else as a runtime failure
        logging.getLogger(__name__).debug("simulation failed", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())

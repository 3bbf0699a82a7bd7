"""Command line entry point: ``primhd <subcommand> --config PATH [options]``."""

from __future__ import annotations

import argparse
import json
import sys

from .config import parse_config
from .errors import ConfigError
from .experiments import EXIT_CONFIG, EXIT_IO, EXIT_OK, run_experiment

# subcommand -> (config kind, default model)
_COMMANDS = {
    "run-pem": ("run", "PEM"),
    "run-smhd": ("run", "SMHD"),
    "eps-sweep": ("sweep", "PEM"),
    "twin-run": ("twin", "PEM"),
    "check-inequalities": ("inequality", "PEM"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="primhd", description="Hydrostatic MHD experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--output", metavar="DIR", help="output directory (overrides output_dir)")
        p.add_argument("--seed", type=int, metavar="N", help="random seed (overrides seed)")
        if name.startswith("run-"):
            p.add_argument("--resume", metavar="SNAPSHOT", help="continue from a checkpoint")
    v = sub.add_parser("verify", help="run the acceptance criteria")
    v.add_argument("--only", type=int, nargs="+", metavar="K", help="criterion numbers to run")
    return parser


def _run(args):
    kind, model = _COMMANDS[args.command]
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    overrides = {}
    if args.output is not None:
        overrides["output_dir"] = args.output
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        job = parse_config(text, kind, overrides, defaults={"model": model})
        base = job if kind == "run" else job.base
        if base.model != model:
            raise ConfigError(f"{args.command} needs model = {model}, config has {base.model}")
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = run_experiment(job, resume=getattr(args, "resume", None))
    if result.status == EXIT_OK:
        print(json.dumps(result.summary, indent=2, sort_keys=True, default=float))
    else:
        print(f"error: {result.message}", file=sys.stderr)
    return result.status


def _verify(args):
    from .acceptance import run_all

    results = run_all(args.only)
    return EXIT_OK if all(r.passed for r in results) else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _verify(args)
    return _run(args)


if __name__ == "__main__":
    sys.exit(main())

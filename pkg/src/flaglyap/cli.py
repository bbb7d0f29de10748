"""Command-line front end.

Subcommands: spectrum | section | derivative | semigroup | verify.
Exit codes: 0 success (and, for verify, all criteria passed); 1 usage
error or failed verify criteria; 2 config validation error; 3 section
solver did not converge; 4 inadmissible weight; 5 semigroup prediction
violated.
"""

import argparse
import sys
from pathlib import Path

from .errors import NoConvergence, PredictionViolated, WeightNotAdmissible
from .experiment import (
    ConfigError,
    Experiment,
    bundled_config_names,
    cmd_derivative,
    cmd_section,
    cmd_semigroup,
    cmd_spectrum,
    cmd_verify,
    load_bundled_config,
    load_config,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3
EXIT_INADMISSIBLE = 4
EXIT_PREDICTION = 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="flaglyap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config in [
        ("spectrum", True),
        ("section", True),
        ("derivative", True),
        ("semigroup", True),
        ("verify", False),
    ]:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=needs_config)
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--seed", type=int, default=None, help="override sampler seeds")
        p.add_argument("--tol", type=float, default=None, help="override the section solver tolerance")
        if name == "verify":
            p.add_argument("--all", action="store_true", help="run every bundled config")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _run_verify(args)
        exp = Experiment(load_config(args.config), seed_override=args.seed, tol_override=args.tol)
        runner = {
            "spectrum": cmd_spectrum,
            "section": cmd_section,
            "derivative": cmd_derivative,
            "semigroup": cmd_semigroup,
        }[args.command]
        runner(exp, args.out)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NoConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        print("residual history:", ", ".join(f"{r:.3e}" for r in exc.history[-10:]), file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except WeightNotAdmissible as exc:
        print(f"inadmissible weight: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except PredictionViolated as exc:
        print(f"prediction violated: {exc}", file=sys.stderr)
        return EXIT_PREDICTION


def _run_verify(args) -> int:
    if args.all:
        configs = [(name, load_bundled_config(name)) for name in bundled_config_names()]
    else:
        if args.config is None:
            print("verify needs --config or --all", file=sys.stderr)
            return EXIT_USAGE
        configs = [(args.config.stem, load_config(args.config))]
    all_ok = True
    for label, cfg in configs:
        exp = Experiment(cfg, seed_override=args.seed, tol_override=args.tol)
        payload = cmd_verify(exp, args.out, label=label.removesuffix(".json"))
        for row in payload["results"]:
            status = "PASS" if row["passed"] else "FAIL"
            print(f"[{status}] {label}: {row['criterion']} - {row['detail']}")
        all_ok = all_ok and payload["all_passed"]
    return EXIT_OK if all_ok else EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line entry point.

    twinlab check FILE [--json] [--tol-op X] [--tol-prob X] [--tol-norm X]
    twinlab demo NAME [--theta R] [--json]
    twinlab sweep --suite S --dim D --trials N --seed K [--json]
    twinlab export NAME [--theta R] [-o FILE]

Reports go to stdout, diagnostics to stderr.  Exit codes: 0 when every check
matched (or a sweep found no disagreement), 1 on any mismatch or errored
check, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from ._version import __version__
from .errors import TwinlabError
from .scenario_file import ScenarioFileError
from .scenarios import SCENARIOS, get_scenario
from .sweeps import MAX_DIM, MIN_DIM, SUITES, run_sweep
from .checks import run_check_file
from .tolerances import Tolerances

EXIT_OK, EXIT_MISMATCH, EXIT_INVALID = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2 as well; keep the message terse
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twinlab", description="Verify twin-event and twin-observable claims numerically.")
    parser.add_argument("--version", action="version", version=f"twinlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="run the checks of a scenario file")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="print the full JSON report")
    p.add_argument("--tol-op", type=_positive, metavar="X")
    p.add_argument("--tol-prob", type=_positive, metavar="X")
    p.add_argument("--tol-norm", type=_positive, metavar="X")

    p = sub.add_parser("demo", help="run a built-in scenario")
    p.add_argument("name", help=f"one of: {', '.join(SCENARIOS)}")
    p.add_argument("--theta", type=float, help="entanglement angle for the scully scenario")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("sweep", help="seeded property sweep")
    p.add_argument("--suite", required=True, help=f"one of: {', '.join(SUITES)}")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("export", help="write a built-in scenario as a scenario file")
    p.add_argument("name", help=f"one of: {', '.join(SCENARIOS)}")
    p.add_argument("--theta", type=float)
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    return parser


def _fail(message: str) -> int:
    print(f"twinlab: {message}", file=sys.stderr)
    return EXIT_INVALID


def _base_tolerances() -> Tolerances:
    return Tolerances.from_env()


def _cmd_check(args: argparse.Namespace) -> int:
    overrides = {"op": args.tol_op, "prob": args.tol_prob, "norm": args.tol_norm}
    try:
        report = run_check_file(args.file, overrides, _base_tolerances())
    except ScenarioFileError as exc:
        return _fail(f"invalid scenario file {args.file}: {exc}")
    print(report.dumps() if args.json else report.human())
    return report.exit_code


def _cmd_demo(args: argparse.Namespace) -> int:
    if args.name not in SCENARIOS:
        return _fail(f"unknown scenario {args.name!r}; choose from {', '.join(SCENARIOS)}")
    try:
        scenario = get_scenario(args.name, args.theta)
    except TwinlabError as exc:
        return _fail(str(exc))
    report = scenario.run(_base_tolerances())
    print(report.dumps() if args.json else report.human())
    return report.exit_code


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.suite not in SUITES:
        return _fail(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    if not MIN_DIM <= args.dim <= MAX_DIM:
        return _fail(f"--dim must lie in [{MIN_DIM}, {MAX_DIM}], got {args.dim}")
    if args.trials < 1:
        return _fail(f"--trials must be at least 1, got {args.trials}")
    if args.seed < 0:
        return _fail(f"--seed must be non-negative, got {args.seed}")
    report = run_sweep(args.suite, args.dim, args.trials, args.seed, _base_tolerances())
    print(report.dumps() if args.json else report.human())
    return report.exit_code


def _cmd_export(args: argparse.Namespace) -> int:
    if args.name not in SCENARIOS:
        return _fail(f"unknown scenario {args.name!r}; choose from {', '.join(SCENARIOS)}")
    try:
        scenario = get_scenario(args.name, args.theta)
    except TwinlabError as exc:
        return _fail(str(exc))
    if args.output:
        scenario.file.write(args.output)
    else:
        print(scenario.file.dumps())
    return EXIT_OK


_COMMANDS = {"check": _cmd_check, "demo": _cmd_demo, "sweep": _cmd_sweep, "export": _cmd_export}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        # e.g. a malformed TWINLAB_TOL_OP value
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())

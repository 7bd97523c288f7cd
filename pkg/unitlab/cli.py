"""Command line front end: ``unitlab {gen,simulate,duel,opt,report}``.

Results go to stdout, logs to stderr. Exit status is 0 on success, 1 for bad
input, 2 when an online rule or an invariant is broken, 3 when the exact
oracle refuses an instance.
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, NoReturn, Optional, Sequence

import minject

from . import __version__
from .algorithms import ALGORITHMS
from .config import load_config
from .errors import LabError
from .geometry import read_instance, write_instance
from .instances import FAMILIES, generate
from .lab import DuelRunner, OracleService, Simulator
from .oracle import STRUCTURED_KINDS
from .reports import format_csv, format_rounds, format_table, ratio_series, read_csv, summarize, write_csv

LOG = logging.getLogger(__name__)

USAGE_ERROR = 1


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit status 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="unitlab", description="Online unit clustering and covering lab.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", metavar="FILE", help="JSON config layered over the defaults")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a generated instance")
    gen.add_argument("--family", required=True, choices=FAMILIES)
    gen.add_argument("--d", type=int, required=True)
    size = gen.add_mutually_exclusive_group()
    size.add_argument("--K", type=int, default=0)
    size.add_argument("--n", type=int, default=0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, metavar="FILE")

    sim = sub.add_parser("simulate", help="run an online algorithm over an instance file")
    sim.add_argument("--alg", required=True, choices=sorted(ALGORITHMS))
    sim.add_argument("--instance", required=True, metavar="FILE")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--opt-formula", action="store_true", help="take OPT from the family's closed form")
    sim.add_argument("--family", default="file")
    sim.add_argument("--param", type=int, default=0, help="K or n of the generated family")
    sim.add_argument("--transcript", metavar="FILE")
    sim.add_argument("--csv", metavar="FILE")

    duel = sub.add_parser("duel", help="play an adaptive adversary against an algorithm")
    duel.add_argument("--adversary", required=True, choices=("clustering", "covering"))
    duel.add_argument("--alg", required=True, choices=sorted(ALGORITHMS))
    duel.add_argument("--d", type=int, required=True)
    duel.add_argument("--K", type=int, default=4)
    duel.add_argument("--rho")
    duel.add_argument("--eps", metavar="P/Q")
    duel.add_argument("--mode", choices=("det", "oblivious"))
    duel.add_argument("--seed", type=int)
    duel.add_argument("--trials", type=int, default=1)
    duel.add_argument("--workers", type=int)
    duel.add_argument("--lenient", action="store_true", help="count failed game checks instead of aborting")
    duel.add_argument("--csv", metavar="FILE")
    duel.add_argument("--log", metavar="FILE", help="JSON lines, one record per presented point")

    opt = sub.add_parser("opt", help="exact offline optimum of an instance file")
    opt.add_argument("--instance", required=True, metavar="FILE")
    opt.add_argument("--cubes", action="store_true", help="also print the lower corner of every cube")

    report = sub.add_parser("report", help="summarize result CSV files")
    report.add_argument("files", nargs="*", metavar="FILE")
    return parser


def _cmd_gen(args: argparse.Namespace, _registry: minject.Registry) -> int:
    points = generate(args.family, args.d, args.K or args.n, args.seed)
    write_instance(args.out, points, args.d)
    LOG.info("wrote %s points to %s", len(points), args.out)
    return 0


def _cmd_simulate(args: argparse.Namespace, registry: minject.Registry) -> int:
    points = read_instance(args.instance)
    result = registry[Simulator].run(
        args.alg,
        points,
        seed=args.seed,
        family=args.family,
        param=args.param,
        use_formula=args.opt_formula,
    )
    if args.transcript:
        with open(args.transcript, "w", encoding="utf-8", newline="\n") as f:
            f.write("".join(line + "\n" for line in result.transcript))
    report = result.report
    if args.csv:
        write_csv(args.csv, [report])
    print(f"ALG={report.alg_count} OPT={report.opt} ratio={report.ratio}")
    failed = sorted(name for name, ok in report.verdicts.items() if not ok)
    if failed:
        print(f"unitlab: failed checks: {', '.join(failed)}", file=sys.stderr)
        return 2
    return 0


def _cmd_duel(args: argparse.Namespace, registry: minject.Registry) -> int:
    runner = registry[DuelRunner]
    specs = runner.specs(
        args.adversary,
        args.alg,
        args.d,
        K=args.K,
        trials=args.trials,
        seed=args.seed,
        rho=args.rho,
        eps=args.eps,
        mode=args.mode,
        strict=False if args.lenient else None,
        log=bool(args.log),
    )
    events: List[Dict[str, Any]] = []
    result = runner.run(specs, on_event=events.append if args.log else None)
    if args.log:
        with open(args.log, "w", encoding="utf-8", newline="\n") as f:
            for event in events:
                f.write(json.dumps(event, sort_keys=True) + "\n")
    if args.csv:
        write_csv(args.csv, result.reports)
    if len(result.reports) == 1:
        only = result.reports[0]
        sys.stdout.write(format_rounds(only.rounds))
        print(f"ALG={only.alg_count} OPT={only.opt} ratio={only.ratio}")
    else:
        sys.stdout.write(format_csv(result.reports))
        for trial, report in enumerate(result.reports):
            if report.rounds:
                print(f"trial {trial}")
                sys.stdout.write(format_rounds(report.rounds))
    print(result.summary.describe())
    return 0


def _cmd_opt(args: argparse.Namespace, registry: minject.Registry) -> int:
    solution = registry[OracleService].solve(read_instance(args.instance))
    print(f"OPT={solution.size}")
    if args.cubes:
        for cube in solution.cubes:
            print(" ".join(str(c) for c in cube.lo))
    return 0


def _cmd_report(args: argparse.Namespace, _registry: minject.Registry) -> int:
    reports = [row for path in args.files for row in read_csv(path)]
    sys.stdout.write(format_table(summarize(reports), ratio_series(reports)))
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "simulate": _cmd_simulate,
    "duel": _cmd_duel,
    "opt": _cmd_opt,
    "report": _cmd_report,
}


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    if getattr(args, "workers", None) is not None:
        return {"duel": {"workers": args.workers}}
    return {}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.opt_formula and args.family not in STRUCTURED_KINDS:
        parser.error(f"--opt-formula needs --family with a closed form, one of {', '.join(STRUCTURED_KINDS)}")
    level = logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        registry = minject.initialize(load_config(args.config, _overrides(args)))
        return _COMMANDS[args.command](args, registry)
    except LabError as e:
        print(f"unitlab: {e}", file=sys.stderr)
        return e.exit_code
    except (ValueError, OSError) as e:
        print(f"unitlab: {e}", file=sys.stderr)
        return 1

import argparse
import functools
import sys
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from assemblyline_setcover.config import LOGGER
from assemblyline_setcover.exceptions import SetCoverException, UsageError
from assemblyline_setcover.helper.report import make_report
from assemblyline_setcover.instances import RandomSeed, as_seed

SUBCOMMANDS: Dict[str, 'subcommand'] = {}


@dataclass
class CommandResult:
    data: Any
    summary: Optional[str] = None
    status_code: int = 0


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so usage errors map to their own exit code"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def parse_seed(value: str) -> RandomSeed:
    if value == 'random':
        return RandomSeed(int(np.random.SeedSequence().entropy) % 2 ** 64)
    try:
        return as_seed(int(value))
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer or 'random', got {value}")


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


####################################
# Subcommand registration
# noinspection PyPep8Naming,PyClassHasNoInit
class subcommand:
    """Register a CLI subcommand.

    The wrapped function receives the parsed arguments and returns a CommandResult. Exceptions from the
    package become exit codes; the JSON report is printed either way.
    """

    def __init__(self, name, help, arguments=(), seeded=True):
        self.name = name
        self.help = help
        self.arguments = arguments
        self.seeded = seeded
        self.func = None

    def __call__(self, func):
        @functools.wraps(func)
        def base(args):
            try:
                result = func(args)
            except SetCoverException as e:
                LOGGER.error(f"{self.name}: {e.__class__.__name__}: {e}")
                print(f"error: {e}", file=sys.stderr)
                print(make_report(None, e, e.exit_code))
                return e.exit_code
            except Exception as e:
                print(f"error: {e.__class__.__name__}: {e}", file=sys.stderr)
                print(make_report(None, e, 1))
                return 1

            if result.summary:
                print(result.summary)
            report = make_report(result.data, status_code=result.status_code)
            print(report)
            if getattr(args, 'report', None):
                with open(args.report, 'w') as report_file:
                    report_file.write(report + '\n')
            return result.status_code

        self.func = base
        SUBCOMMANDS[self.name] = self
        return base

    def register(self, subparsers):
        parser = subparsers.add_parser(self.name, help=self.help)
        for flags, kwargs in self.arguments:
            parser.add_argument(*flags, **kwargs)
        if self.seeded:
            parser.add_argument('--seed', type=parse_seed, default=as_seed(None),
                                help="64-bit seed, or 'random' for a fresh one")
        parser.add_argument('--report', help="Also write the JSON report to this file")
        parser.set_defaults(handler=self.func)
        return parser


def build_parser() -> CliParser:
    parser = CliParser(prog='setcover', description="Exact and Monte Carlo solvers for Set Cover, Set Partition, "
                                                    "graph colouring and Linear Sat")
    subparsers = parser.add_subparsers(dest='command', parser_class=CliParser)
    for command in SUBCOMMANDS.values():
        command.register(subparsers)
    return parser

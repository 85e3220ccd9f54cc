from typing import List, Optional

from assemblyline_setcover.cli.base import SUBCOMMANDS, build_parser
from assemblyline_setcover.exceptions import UsageError

# Subcommands register themselves on import
from assemblyline_setcover.cli import check, params, solve  # noqa: F401


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, dispatch the subcommand and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return UsageError.exit_code
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    if args.command is None:
        parser.print_usage()
        return UsageError.exit_code
    return args.handler(args)


__all__ = ['SUBCOMMANDS', 'run']

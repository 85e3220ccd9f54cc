from assemblyline_setcover.exceptions import ParseError
from assemblyline_setcover.helper.report import read_report
from assemblyline_setcover.instances import parse_graph, parse_linsat, parse_set_system


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as e:
        raise ParseError(f"cannot read {path}: {getattr(e, 'strerror', None) or e}")


def _parsed(path, parser):
    try:
        return parser(_read(path))
    except ParseError as e:
        raise ParseError(f"{path}: {e}")


def read_set_system(path: str):
    return _parsed(path, parse_set_system)


def read_graph(path: str):
    return _parsed(path, parse_graph)


def read_linsat(path: str):
    return _parsed(path, parse_linsat)


def read_report_file(path: str):
    try:
        return read_report(_read(path))
    except ValueError as e:
        raise ParseError(f"{path}: not a JSON report ({e})")

import json
from sys import exc_info
from traceback import format_tb

from assemblyline_setcover.config import LOGGER, VERSION
from assemblyline_setcover.exceptions import SetCoverException
from assemblyline_setcover.helper.logger import log_with_traceback

SCHEMA = 1


def make_report(data, err="", status_code=0):
    """Versioned JSON envelope around a command result, sorted keys so identical runs give identical bytes"""
    if isinstance(err, Exception):
        trace = exc_info()[2]
        if isinstance(err, SetCoverException):
            err = f"{err.__class__.__name__}: {str(err)}"
        else:
            err = ''.join(['\n'] + format_tb(trace) + [f"{err.__class__.__name__}: {str(err)}\n"]).rstrip('\n')
            log_with_traceback(LOGGER, trace, "Exception", is_exception=True)

    return json.dumps({"schema": SCHEMA,
                       "report": data,
                       "error_message": err,
                       "version": VERSION,
                       "status_code": status_code}, sort_keys=True)


def read_report(text):
    """The report block of a JSON envelope (a bare report object is accepted too)"""
    data = json.loads(text)
    if isinstance(data, dict) and "schema" in data and "report" in data:
        return data["report"]
    return data

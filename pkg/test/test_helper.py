import json
import sys

from unittest.mock import MagicMock

from assemblyline_setcover.config import VERSION
from assemblyline_setcover.exceptions import GuardExceeded
from assemblyline_setcover.helper.logger import get_traceback_info, log_with_traceback
from assemblyline_setcover.helper.report import SCHEMA, make_report, read_report
from assemblyline_setcover.instances import RandomSeed


def test_make_report_envelope():
    envelope = json.loads(make_report({'answer': 'YES'}))
    assert envelope == {"schema": SCHEMA, "report": {'answer': 'YES'}, "error_message": "",
                        "version": VERSION, "status_code": 0}
    assert make_report({'b': 1, 'a': 2}) == make_report({'a': 2, 'b': 1})


def test_make_report_errors():
    envelope = json.loads(make_report(None, GuardExceeded("n=40 exceeds the configured limit of 30"), 3))
    assert envelope['error_message'] == "GuardExceeded: n=40 exceeds the configured limit of 30"
    assert envelope['status_code'] == 3

    try:
        RandomSeed(-1)
    except ValueError as e:
        envelope = json.loads(make_report(None, e, 1))
    assert envelope['error_message'].endswith("ValueError: seed -1 is not a 64-bit unsigned integer")


def test_read_report():
    assert read_report(make_report({'x': 1})) == {'x': 1}
    assert read_report('{"verdict": {"answer": "NO"}}') == {'verdict': {'answer': 'NO'}}


def test_log_with_traceback():
    log = MagicMock()
    try:
        RandomSeed(2 ** 64)
    except ValueError:
        trace = sys.exc_info()[2]
    file_name, function, _ = get_traceback_info(trace)
    assert file_name.endswith('instances.py')
    assert function == '__post_init__'

    log_with_traceback(log, trace, "Exception", is_exception=True)
    message = log.exception.call_args[0][0]
    assert message.startswith("Exception - ")
    assert message.endswith(f"[{VERSION}]")

    log_with_traceback(log, None, "plain")
    log.warning.assert_called_with("plain")

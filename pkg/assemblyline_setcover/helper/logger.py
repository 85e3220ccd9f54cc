from assemblyline_setcover.config import VERSION

PACKAGE_MARKER = "/assemblyline_setcover/"


def get_traceback_info(tb):
    """(file, function, line) of the innermost frame that belongs to this package"""
    last_frame = None
    while tb is not None:
        f = tb.tb_frame
        if PACKAGE_MARKER in f.f_code.co_filename:
            last_frame = (f.f_code.co_filename, f.f_code.co_name, tb.tb_lineno)
        tb = tb.tb_next
    return last_frame


def dumb_log(log, msg, is_exception=False):
    if is_exception:
        log.exception(msg)
    else:
        log.warning(msg)


def log_with_traceback(log, traceback, msg, is_exception=False):
    tb_info = get_traceback_info(traceback)
    if not tb_info:
        dumb_log(log, msg, is_exception=is_exception)
        return

    tb_file, tb_function, tb_line_no = tb_info
    message = "%s - %s:%s:%s[%s]" % (msg, tb_file, tb_function, tb_line_no, VERSION)
    if is_exception:
        log.exception(message)
    else:
        log.warning(message)

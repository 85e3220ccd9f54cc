class SetCoverException(Exception):
    exit_code = 1


class ParseError(SetCoverException):
    exit_code = 2

    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)
        self.line = line


class GuardExceeded(SetCoverException):
    """An enumeration or memory guard refused the request"""
    exit_code = 3


class CountOverflowError(GuardExceeded):
    pass


class HypothesisViolation(SetCoverException):
    """A precondition the algorithm's guarantee depends on does not hold"""
    exit_code = 4


class ReductionError(HypothesisViolation):
    pass


class SoundnessError(SetCoverException):
    exit_code = 5


class ClosureMismatch(SetCoverException):
    pass


class UsageError(SetCoverException):
    """Bad command line"""
    pass


def check_guard(value, limit, what):
    if value > limit:
        raise GuardExceeded(f"{what}={value} exceeds the configured limit of {limit}")

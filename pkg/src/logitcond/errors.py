"""Exception types raised across the toolkit."""


class LogitCondError(Exception):
    """Base class for all toolkit errors."""


class ZeroGradient(LogitCondError):
    pass


class NonFinite(LogitCondError):
    pass


class NotSymmetric(LogitCondError):
    pass


class ParseError(LogitCondError):
    def __init__(self, row: int, col: int, text: str = ""):
        self.row = row
        self.col = col
        super().__init__(f"cannot parse value {text!r} at row {row}, column {col}")


class BadLabel(LogitCondError):
    def __init__(self, row: int, text: str = ""):
        self.row = row
        super().__init__(f"invalid label {text!r} at row {row}")


class MethodUnavailable(LogitCondError):
    pass


class NotApplicable(LogitCondError):
    pass


class NotAttained(LogitCondError):
    pass


class UncertifiedConditioning(LogitCondError):
    pass


class WrongStepRule(LogitCondError):
    pass


class NotSeparable(LogitCondError):
    pass


class WrongOption(LogitCondError):
    pass


class TooFewTrials(LogitCondError):
    pass

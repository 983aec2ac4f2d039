"""Exception hierarchy shared across the package."""


class MomentestError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(MomentestError):
    """Source text could not be parsed.

    Carries the 1-based position and a hint of what was expected.
    """

    def __init__(self, message, line, column, expected=None):
        self.line = line
        self.column = column
        self.expected = tuple(expected) if expected else ()
        suffix = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{column}: {message}{suffix}")


class UndefinedVariable(MomentestError):
    pass


class DuplicateInit(MomentestError):
    pass


class DesugarUnsupported(MomentestError):
    pass


class NumericOverflow(MomentestError):
    def __init__(self, message, row=None, iteration=None):
        self.row = row
        self.iteration = iteration
        super().__init__(message)


class UnknownVariable(MomentestError):
    pass


class ClosureExceeded(MomentestError):
    def __init__(self, cap, size):
        self.cap = cap
        self.size = size
        super().__init__(
            f"monomial closure would exceed {cap} entries (reached {size}); "
            "the program is not eligible for moment propagation"
        )


class SchemaError(MomentestError):
    pass


class EvalError(MomentestError):
    pass


class DegenerateVariance(MomentestError):
    pass


class SingularSystem(MomentestError):
    pass

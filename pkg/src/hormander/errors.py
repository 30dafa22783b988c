"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class HormanderError(Exception):
    pass


class PreconditionError(HormanderError, ValueError):
    """Input violates an operation's precondition (CLI exit code 2)."""


class DomainError(PreconditionError):
    """Argument outside the domain of a function, e.g. t < 1 for a weight."""


class UnsupportedError(PreconditionError):
    """Requested quantity is not available for this kind of object."""


class NumericError(HormanderError, ArithmeticError):
    """Non-finite or otherwise failed numerical evaluation (CLI exit code 3)."""

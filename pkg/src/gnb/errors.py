"""Exception types raised by the library."""


class GnbError(Exception):
    """Base class for all library errors."""


class DomainError(GnbError, ValueError):
    """An argument lies outside the domain of the requested function."""


class ConvergenceError(GnbError, RuntimeError):
    """A truncated series or table did not reach its target before the term cap."""


class DegenerateError(GnbError, ArithmeticError):
    """The requested quantity is an indeterminate form at these parameters."""

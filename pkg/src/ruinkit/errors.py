"""Exception types shared by all ruinkit modules."""


class RuinkitError(Exception):
    """Base class for ruinkit errors."""


class DomainError(RuinkitError, ValueError):
    """A parameter or argument lies outside the admissible domain."""


class NumericError(RuinkitError, ArithmeticError):
    """A numerical procedure failed (no bracket, no convergence, inconsistent result)."""

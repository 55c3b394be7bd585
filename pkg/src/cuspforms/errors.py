"""Exception hierarchy shared by every module of the package."""


class CuspFormsError(Exception):
    """Base class for all package errors."""


class PrecisionError(CuspFormsError, ValueError):
    """A quantity is not determined at the available p-adic precision."""


class InsufficientPrecision(PrecisionError):
    """The working precision cannot resolve the requested verdict."""


class ConvergenceViolation(CuspFormsError, ValueError):
    """A power series was asked to run outside its domain of convergence."""


class DomainViolation(CuspFormsError, ValueError):
    """A function's support leaves the domain of the chart being used."""


class CuspViolation(CuspFormsError):
    """A cusp integral that should vanish does not.

    ``witness`` is a JSON-friendly dict naming the parabolic, the base
    point and the offending value.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or {}


class ReductionMismatch(CuspFormsError):
    """Group-side and Lie-side unipotent integrals disagree."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or {}

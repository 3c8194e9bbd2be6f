"""Exception hierarchy shared by the compute modules and the CLI."""

from __future__ import annotations


class SasError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(SasError, ValueError):
    """An argument violates a documented invariant.

    ``field`` names the offending argument when one can be singled out.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ConfigurationError(SasError, ValueError):
    """Mutually inconsistent settings (sampling, focusing depth, variants)."""


class ParseError(SasError):
    """A file could not be decoded. ``offset`` is a byte offset when known."""

    def __init__(self, message: str, offset: int | None = None, field: str | None = None):
        super().__init__(message)
        self.offset = offset
        self.field = field


class NotFoundError(SasError, LookupError):
    pass


class NumericalError(SasError, ArithmeticError):
    """Non-finite values or failed iterations; ``diagnostics`` says where."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class SolverError(NumericalError):
    pass


class DispersionError(InvalidArgumentError):
    """Wavenumber outside the domain of a dispersion formula."""

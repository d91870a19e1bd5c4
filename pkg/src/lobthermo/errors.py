"""Exception hierarchy shared by every module.

``DomainError`` subclasses signal inputs that are well formed but violate a
model precondition; the CLI maps them to exit status 1.  ``ParseError``
signals malformed input text and maps to exit status 2.
"""

from __future__ import annotations


class LobThermoError(Exception):
    """Base class for all package errors."""


class DomainError(LobThermoError, ValueError):
    """A value lies outside the domain of the requested operation."""


class ParseError(LobThermoError, ValueError):
    """Malformed input text (CSV or JSON).

    ``line`` is 1-based; ``column`` names the offending field when known.
    """

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


# gibbs model
class InvalidParameter(DomainError):
    pass


class OutOfDomain(DomainError):
    pass


class Divergence(DomainError):
    pass


class NoIntersection(DomainError):
    pass


class InvalidObservables(DomainError):
    pass


class ZeroVolume(DomainError):
    pass


# book engine
class InvalidOrder(DomainError):
    pass


class EmptyBook(DomainError):
    pass


class NonPositiveTick(DomainError):
    pass


class UnknownLevel(DomainError, KeyError):
    pass


class NoTrade(DomainError):
    pass


class EmptyGrid(DomainError):
    pass


# calibration
class NonPositiveQuantity(DomainError):
    def __init__(self, message: str, index: int | None = None):
        self.index = index
        super().__init__(message)


class InsufficientData(DomainError):
    pass


class ModelRejected(DomainError):
    """The depth data contradicts the occupancy law.

    This is a falsification outcome rather than a malfunction: ``fit`` holds
    the raw regression diagnostics so callers can report them.
    """

    def __init__(self, message: str, fit=None):
        self.fit = fit
        super().__init__(message)


class WrongSlopeSign(ModelRejected):
    pass


class WrongInterceptSign(ModelRejected):
    pass


# market pipeline
class OrderingError(DomainError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InvariantError(DomainError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class TooFewBars(DomainError):
    pass

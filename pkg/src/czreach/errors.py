"""Exception types raised by the library."""


class CzreachError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(CzreachError):
    """Operands or fields have inconsistent dimensions."""


class NegativeExponent(CzreachError):
    """An exponent matrix contains a negative entry."""


class DuplicateId(CzreachError):
    """A factor-identifier list contains repeated entries."""


class MissingFactor(CzreachError):
    """An assignment does not cover every factor of a set."""


class NotDivisible(CzreachError):
    """A vector length is not divisible by the requested row count."""


class IndexOutOfRange(CzreachError):
    """A projection index lies outside the set's coordinate range."""


class TooShort(CzreachError):
    """A trajectory has too few samples to form a data batch."""


class DuplicateMonomial(CzreachError):
    """A monomial basis contains repeated exponent vectors."""


class RankDeficient(CzreachError):
    """A data matrix does not have full row rank."""


class Infeasible(CzreachError):
    """Feasible-factor search exhausted its budget."""


class BudgetExceeded(CzreachError):
    """A brute-force search would exceed its point budget."""


class CapacityExceeded(CzreachError):
    """A set representation grew beyond the configured generator budget."""


class ParseError(CzreachError):
    """A configuration file is not well-formed."""


class ValidationError(CzreachError):
    """A configuration file is well-formed but invalid; message names the field."""

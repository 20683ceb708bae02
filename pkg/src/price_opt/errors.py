"""Exception types raised by the library."""


class PriceOptError(Exception):
    """Base class for library errors."""


class DomainError(PriceOptError, ValueError):
    """An argument lies outside the domain of a function."""


class RangeError(DomainError):
    """A time argument lies outside the horizon."""


class InfeasibleError(PriceOptError):
    """No admissible price (or multiplier) can meet a requirement.

    ``interval`` is the ``(t_start, t_end)`` pair that could not be priced,
    ``kind`` is ``"sales"``, ``"revenue"``, ``"stock"`` or ``"assumption"``,
    and ``violations`` carries the feasibility report entries when the
    failure was detected before solving.
    """

    def __init__(self, message, *, interval=None, kind=None, index=None, violations=()):
        super().__init__(message)
        self.interval = interval
        self.kind = kind
        self.index = index
        self.violations = tuple(violations)


class ScenarioError(PriceOptError, ValueError):
    """Malformed scenario or policy input. ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class OracleLimitError(PriceOptError):
    """The requested exhaustive enumeration is too large."""

"""Exception hierarchy for the solver suite."""

from typing import Any, Optional, Tuple


class QpeError(Exception):
    """Root of every error raised by the suite."""


# ----------------------------------------------------------------------
# Games and game files
# ----------------------------------------------------------------------

class GameValidationError(QpeError):
    """A game failed one of the structural checks of validate().

    Carries the id of the offending node or information set, plus a
    (line, column) location when the game came from a .qpef file.
    """

    def __init__(self, message: str, subject: Optional[str] = None,
                 location: Optional[Tuple[int, int]] = None):
        self.message = message
        self.subject = subject
        self.location = location
        super().__init__(self._render())

    def _render(self) -> str:
        text = self.message
        if self.subject is not None:
            text = f"{text} [{self.subject}]"
        if self.location is not None:
            text = f"line {self.location[0]}, column {self.location[1]}: {text}"
        return text

    def with_location(self, location: Tuple[int, int]) -> "GameValidationError":
        """Return a copy of this error annotated with a source location."""
        return type(self)(self.message, self.subject, location)


class NotATree(GameValidationError):
    pass


class BadChanceDistribution(GameValidationError):
    pass


class InconsistentInfoset(GameValidationError):
    pass


class ImperfectRecall(GameValidationError):
    pass


class BadPayoffVector(GameValidationError):
    pass


class QpefSyntaxError(QpeError):
    """Malformed .qpef text."""

    def __init__(self, line: int, column: int, expected: str, found: str = ""):
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        detail = f"expected {expected}"
        if found:
            detail += f", found {found!r}"
        super().__init__(f"line {line}, column {column}: {detail}")

    @property
    def location(self) -> Tuple[int, int]:
        return (self.line, self.column)


# ----------------------------------------------------------------------
# Profiles
# ----------------------------------------------------------------------

class ConditionalOnNullSet(QpeError):
    pass


class NotFullyMixed(QpeError):
    pass


class ActionNotInInfoset(QpeError):
    pass


class ZeroParentWeight(QpeError):
    pass


class InvalidProfile(QpeError):
    """A profile misses an infoset, names an unknown action, or does not sum to 1."""


# ----------------------------------------------------------------------
# Ordered epsilon field
# ----------------------------------------------------------------------

class EpsDivisionByZero(QpeError, ZeroDivisionError):
    pass


class PoleAtZero(QpeError):
    pass


class DegreeCapExceeded(QpeError):
    pass


# ----------------------------------------------------------------------
# Polytopes
# ----------------------------------------------------------------------

class MassTooSmall(QpeError):
    pass


class TooManyFacets(QpeError):
    pass


class NetworkDoesNotSort(QpeError):
    pass


# ----------------------------------------------------------------------
# Solvers
# ----------------------------------------------------------------------

class WrongPlayerCount(QpeError):
    pass


class NotZeroSum(QpeError):
    pass


class IterationLimit(QpeError):
    pass


class RayTermination(QpeError):
    """Lemke's algorithm left along a secondary ray.

    ``certificate`` holds the ray direction over the LCP variables.
    """

    def __init__(self, message: str, certificate: Any = None, pivots: int = 0):
        self.certificate = certificate
        self.pivots = pivots
        super().__init__(message)


class LpInfeasible(QpeError):
    pass


class LpUnbounded(QpeError):
    pass


# ----------------------------------------------------------------------
# Multiplayer fixed point
# ----------------------------------------------------------------------

class ContainmentViolated(QpeError):
    pass


class InfeasibleFloor(QpeError):
    pass


class Underflow(QpeError):
    pass


class NoConvergence(QpeError):
    pass


class ParameterOutOfRange(QpeError, ValueError):
    """ε, δ or γ outside the range the operator is defined on."""


# ----------------------------------------------------------------------
# Command line
# ----------------------------------------------------------------------

class UsageError(QpeError):
    """Bad or inconsistent command-line flags."""

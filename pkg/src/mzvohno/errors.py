"""Exception hierarchy shared by the evaluators, verifiers and the CLI."""


class MZVError(Exception):
    """Base class for all package errors."""


class DomainError(MZVError, ValueError):
    """An argument lies outside the domain where a series is defined."""


class ConvergenceError(MZVError):
    """A series fails its decay test or its tail estimate is too large."""


class QuadratureError(MZVError):
    """Numerical integration did not reach the requested tolerance."""


class ParseError(MZVError, ValueError):
    """Malformed index, composition or identity-table text."""


class RankDeficient(MZVError):
    """Least-squares design matrix is numerically singular."""

    def __init__(self, message, condition_number=float("inf")):
        super().__init__(message)
        self.condition_number = condition_number

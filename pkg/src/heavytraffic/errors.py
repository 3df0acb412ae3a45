"""Exception hierarchy shared by every module of the package."""


class HeavyTrafficError(Exception):
    """Base class; the CLI maps every subclass to exit code 1."""


class DomainError(HeavyTrafficError, ValueError):
    """A parameter lies outside the mathematical domain of an operation."""


class InfiniteMean(DomainError):
    pass


class Unsupported(HeavyTrafficError):
    """The model family does not support the requested functional."""


class BracketFailure(HeavyTrafficError):
    """A bisection could not find a sign change in its search interval."""


class NonMonotone(HeavyTrafficError):
    """A map assumed monotone failed the monotonicity probe."""


class UnstableSystem(DomainError):
    """Traffic intensity is not below one, so the supremum is infinite."""


class HorizonExceeded(HeavyTrafficError):
    """A truncated simulation did not reach its stopping rule in time."""


class InsufficientHits(HeavyTrafficError):
    """A Monte Carlo cell has too few hits for its ratio to be trusted."""

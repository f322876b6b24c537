"""Exception and warning classes shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class IterationError(RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class BracketError(RuntimeError):
    """A search window does not bracket a minimum or a root."""


class WindowError(ValueError):
    """A requested grid window misses the effective domain of the inputs."""


class TruncationWarning(RuntimeWarning):
    """The finite lower limit of a stationary integral may be too shallow."""


class HeavyTailWarning(RuntimeWarning):
    """A single Monte Carlo replicate dominates an empirical moment."""


class CensoredWarning(RuntimeWarning):
    """No replicate reached the target event."""

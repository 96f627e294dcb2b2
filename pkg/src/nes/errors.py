"""Exception types shared across the package."""


class DomainViolation(ArithmeticError):
    """A cost was evaluated outside its domain (log/sqrt of a bad argument,
    a point outside the game's feasible set, ...).

    Kept distinct from ``OverflowError`` so boundary grazes can be told
    apart from blow-ups.
    """


class SolverError(RuntimeError):
    """A root finder or minimizer failed to converge or to bracket."""


class SingularityError(SolverError):
    """A derivative used as a denominator vanished."""


class NonFiniteState(FloatingPointError):
    """The integrator produced a NaN or infinite state."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class ConfigError(ValueError):
    """Invalid game or run configuration."""

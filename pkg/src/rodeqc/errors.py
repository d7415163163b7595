"""Exception types shared across the toolkit."""


class BranchCutError(ValueError):
    """Matrix logarithm requested for a unitary with an eigenvalue at (or
    numerically on top of) the principal branch cut at -1.

    Callers must perturb the argument or split the path; silently moving the
    eigenvalue would corrupt distance computations downstream.
    """


class NumericError(RuntimeError):
    """A numerical procedure failed beyond its recovery ladder
    (e.g. Cholesky of a noise covariance after jitter escalation)."""


class NonconvergenceError(RuntimeError):
    """An iterative solver exhausted its budget without reaching tolerance."""


class ConfigError(ValueError):
    """Run configuration failed schema or semantic validation."""

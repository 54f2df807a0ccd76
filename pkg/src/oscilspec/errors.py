"""Exception types shared across the solver modules."""


class OscilspecError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(OscilspecError):
    """Invalid problem configuration (bad potential spec, bad parameters)."""


class SolverError(OscilspecError):
    """Base class for numerical failures during a computation."""


class PrecisionExhausted(SolverError):
    """Working precision or series order hit its ceiling before convergence."""

    def __init__(self, message, *, working_dps=None, order=None):
        super().__init__(message)
        self.working_dps = working_dps
        self.order = order


class NoSignChange(SolverError):
    """A root bracket does not actually straddle a sign change."""


class AmbiguousNode(SolverError):
    """A wavefunction sign change cannot be separated from numerical noise."""


class MissedLevel(SolverError):
    """Node counts reveal a gap in the computed spectrum."""

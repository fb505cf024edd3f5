"""Exception hierarchy.

The CLI maps the three top-level families onto exit codes:
``ConfigError`` -> 2, ``SolverError`` -> 3, ``DetectionError`` -> 4.
"""


class ChiralPumpError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(ChiralPumpError, ValueError):
    """Malformed or physically invalid run configuration."""


class InvalidParameters(ConfigError):
    """A ``SystemParams`` field violates its invariants."""


class DegenerateCoupling(ChiralPumpError, ValueError):
    """Dressed basis undefined because the c-a / c-b couplings vanish."""


class UnsupportedPhase(ChiralPumpError, ValueError):
    """Dark-state analytics requested for phi_L outside {0, pi}."""


class SolverError(ChiralPumpError, RuntimeError):
    pass


class DimensionMismatch(SolverError, ValueError):
    pass


class CapExceeded(SolverError):
    """Superoperator would exceed the configured size cap."""


class StepSizeUnderflow(SolverError):
    pass


class NonUniqueSteadyState(SolverError):
    pass


class NoConvergence(SolverError):
    pass


class InvalidState(SolverError, ValueError):
    """Array is not a valid density matrix."""


class DetectionError(ChiralPumpError):
    pass


class GridMismatch(DetectionError, ValueError):
    pass


class PeaksNotFound(DetectionError):
    pass


class AmbiguousPeaks(DetectionError):
    pass


class UndefinedPurity(DetectionError, ZeroDivisionError):
    """Purity requested where both enantiomer populations are zero."""


class InitialStateRequired(SolverError, ValueError):
    """kappa = 0 steady state asked for without an initial state."""

"""Exception types raised across the package."""


class PulseSenseError(Exception):
    """Base class for all package errors."""


class ValidationError(PulseSenseError, ValueError):
    """An input violates a documented precondition."""


class DegenerateSequence(PulseSenseError):
    """The single pulse is a pure phase gate (|Im a| = 1).

    The alternating-phase closed form is singular there and sensing is
    undefined.
    """


class InternalConsistencyError(PulseSenseError):
    """A computed quantity left its admissible range by more than rounding."""


class PoleError(PulseSenseError, ValueError):
    """Gamma function evaluated at a non-positive integer."""


class ToleranceNotMet(PulseSenseError):
    """The adaptive integrator could not satisfy tolerances within max_steps."""


class UnitarityLost(PulseSenseError):
    """Integrated propagator drifted too far from SU(2) to be repaired."""


class FeatureNotResolved(PulseSenseError):
    """No half-level crossing of the central feature within the scanned range."""


class UnsupportedCase(PulseSenseError, ValueError):
    """No small-detuning approximation exists for the requested model/sequence."""


class NoFit(PulseSenseError):
    """Best least-squares residual exceeds the configured ceiling."""


class AmbiguousEstimate(UserWarning):
    """Several detuning candidates explain the data equally well."""

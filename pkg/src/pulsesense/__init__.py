"""Detuning sensing with N-pulse sequences of exactly soluble two-state pulses.

Quick start::

    >>> from pulsesense import PulseModel, SequenceSpec, hwhm
    >>> rep = hwhm(PulseModel("rz", 1.0), SequenceSpec(10, "alternating"))
    >>> round(rep.hwhm_dimensionless, 3)
    0.05
"""
from importlib.metadata import PackageNotFoundError as _NotInstalled, version as _version
from types import ModuleType as _ModuleType

from ._backend import BACKEND
from .errors import (
    AmbiguousEstimate,
    DegenerateSequence,
    FeatureNotResolved,
    InternalConsistencyError,
    NoFit,
    PoleError,
    PulseSenseError,
    ToleranceNotMet,
    UnitarityLost,
    UnsupportedCase,
    ValidationError,
)
from .estimator import (
    DetuningEstimate,
    Measurement,
    MeasurementSet,
    estimate,
    predict,
    simulate_measurement,
    synthetic_measurements,
)
from .models import (
    ModelExpansion,
    PulseModel,
    cayley_klein_grid,
    complex_gamma,
    demkov_kunike_propagator,
    model_expansion,
    rabi_propagator,
    reciprocal_gamma,
    rosen_zener_propagator,
)
from .oracle import IntegrationConfig, PulseWaveform, integrate_propagator, make_waveform
from .profiles import (
    FeatureKind,
    Provenance,
    SensitivityReport,
    SweepProfile,
    approx_profile,
    format_khz,
    formula_hwhm,
    hwhm,
    physical_sensitivity,
    probabilities,
    sweep,
)
from .su2 import (
    PhaseMode,
    Propagator,
    SequenceSpec,
    asymptotic_probability,
    compose,
    flip_sign,
    n_pass_alternating,
    n_pass_same,
    sequence_probability,
    sequence_propagator,
)

try:
    __version__ = _version("artifact")
except _NotInstalled:  # running from a source tree
    __version__ = "0.1.0"

__all__ = sorted(
    name for name, obj in globals().items()
    if not name.startswith("_") and not isinstance(obj, _ModuleType)
)

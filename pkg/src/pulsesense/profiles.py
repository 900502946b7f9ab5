"""Excitation profiles, central-feature widths and sensitivity numbers."""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import bisect

from .errors import FeatureNotResolved, UnsupportedCase, ValidationError
from .models import PulseModel, cayley_klein_grid
from .oracle import IntegrationConfig, integrate_propagator, make_waveform
from .su2 import SequenceSpec, sequence_probability, sequence_probability_array

HALF_LEVEL = 0.5
DEFAULT_POINTS = 801
_LN2 = math.log(2.0)


class Provenance(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    ODE_ORACLE = "ode_oracle"


class FeatureKind(str, enum.Enum):
    SPIKE = "spike"
    DIP = "dip"


def default_range(family: str) -> tuple[float, float]:
    return (-6.0, 6.0) if family == "dk" else (-4.0, 4.0)


@dataclass(frozen=True, eq=False)
class SweepProfile:
    model: PulseModel
    seq: SequenceSpec
    delta: np.ndarray
    probability: np.ndarray
    provenance: Provenance = Provenance.CLOSED_FORM

    def __post_init__(self):
        d = np.asarray(self.delta, dtype=float)
        p = np.asarray(self.probability, dtype=float)
        if d.shape != p.shape or d.ndim != 1:
            raise ValidationError("delta and probability must be 1-D arrays of equal length")
        if np.any(np.diff(d) <= 0):
            raise ValidationError("profile grid must be strictly increasing")
        if not np.any(d == 0.0):
            raise ValidationError("profile grid must contain delta = 0")
        if np.any(p < 0) or np.any(p > 1):
            raise ValidationError("probabilities must lie in [0, 1]")

    @property
    def grid(self):
        return list(zip(self.delta.tolist(), self.probability.tolist()))

    def at_zero(self) -> float:
        return float(self.probability[np.flatnonzero(self.delta == 0.0)[0]])


def probabilities(model: PulseModel, seq: SequenceSpec, deltas) -> np.ndarray:
    """Exact N-pulse transition probability over a detuning array."""
    a, b = cayley_klein_grid(model, deltas)
    return sequence_probability_array(a, b, seq)


def _grid(delta_range, n_points):
    lo, hi = (float(x) for x in delta_range)
    if not (lo <= 0.0 <= hi) or lo == hi:
        raise ValidationError(f"delta range {delta_range} must contain 0")
    if n_points < 51:
        raise ValidationError("n_points must be at least 51")
    grid = np.linspace(lo, hi, int(n_points))
    grid[np.isclose(grid, 0.0, atol=1e-15 * max(abs(lo), abs(hi)))] = 0.0
    if not np.any(grid == 0.0):
        grid = np.sort(np.append(grid, 0.0))
    return grid


def sweep(model: PulseModel, seq: SequenceSpec, delta_range=None, n_points: int = DEFAULT_POINTS,
          *, provenance: Provenance | str = Provenance.CLOSED_FORM, workers: int = 1,
          ode_config: Optional[IntegrationConfig] = None) -> SweepProfile:
    """Excitation profile P_N(delta) on a uniform grid with delta = 0 included.

    ``model.delta`` is ignored. Grid points are independent; ``workers > 1``
    splits the grid across threads, with output order unchanged.
    """
    provenance = Provenance(provenance)
    grid = _grid(delta_range or default_range(model.family), n_points)

    if provenance is Provenance.CLOSED_FORM:
        def work(chunk):
            return probabilities(model, seq, chunk)
    else:
        cfg = ode_config or IntegrationConfig()

        def work(chunk):
            out = [sequence_probability(integrate_propagator(make_waveform(model.with_delta(d)), cfg), seq)
                   for d in chunk]
            return np.array(out, dtype=float)

    if workers > 1:
        chunks = np.array_split(grid, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            probs = np.concatenate(list(pool.map(work, chunks)))
    else:
        probs = work(grid)
    base = PulseModel(model.family, model.alpha, model.beta, 0.0)
    return SweepProfile(base, seq, grid, probs, provenance)


def formula_hwhm(model: PulseModel, seq: SequenceSpec) -> Optional[float]:
    """Published small-detuning half width (dimensionless), when one exists."""
    n = seq.n_pulses
    fam, al, be = model.family, model.alpha, model.beta
    if fam == "rz" and math.isclose(al, 1.0):
        if seq.alternating:
            return math.sqrt(2.0) / (n * math.pi)
        return 1.0 / math.sqrt(n * math.pi * math.sqrt(2.0) * _LN2)
    if fam == "rabi" and math.isclose(al, math.pi) and seq.alternating:
        return math.pi / (math.sqrt(2.0) * n)
    if fam == "dk" and math.isclose(al, 2.0) and math.isclose(be, 2.0) and seq.alternating:
        return 4.3 / n
    return None


@dataclass(frozen=True, slots=True)
class SensitivityReport:
    hwhm_dimensionless: float
    feature_kind: FeatureKind
    formula_value: Optional[float]
    hwhm_physical: Optional[float] = None
    formula_physical: Optional[float] = None
    pulse_width_seconds: Optional[float] = None

    def __post_init__(self):
        if not self.hwhm_dimensionless > 0:
            raise ValidationError("hwhm must be positive")

    @property
    def relative_deviation(self) -> Optional[float]:
        if self.formula_value is None:
            return None
        return self.hwhm_dimensionless / self.formula_value - 1.0


def hwhm(model: PulseModel, seq: SequenceSpec, *, delta_max: Optional[float] = None,
         profile: Optional[SweepProfile] = None, pulse_width_seconds: Optional[float] = None,
         side: int = 1) -> SensitivityReport:
    """Half width at half maximum of the central spike or dip.

    The half level is the absolute probability 1/2. Starting at ``delta = 0``
    the profile is scanned outward (``side=+1`` or ``-1``) in steps of at most
    1/20 of the published width and the innermost crossing is refined by
    bisection on the closed form to 1e-9.

    Raises
    ------
    FeatureNotResolved
        If no crossing of the half level lies within the scanned range.
    """
    if side not in (1, -1):
        raise ValidationError("side must be +1 or -1")
    if profile is not None:
        model, seq = profile.model, profile.seq
        if delta_max is None:
            delta_max = float(profile.delta[-1] if side > 0 else -profile.delta[0])
    if delta_max is None:
        delta_max = default_range(model.family)[1]
    if delta_max <= 0:
        raise ValidationError("delta_max must be positive")
    formula = formula_hwhm(model, seq)
    step = formula / 20.0 if formula else min(0.01, 0.05 / seq.n_pulses)

    def excess(d):
        return float(probabilities(model, seq, np.array([d]))[0]) - HALF_LEVEL

    f0 = excess(0.0)
    if f0 == 0.0:
        raise FeatureNotResolved("profile sits exactly at the half level at resonance")
    crossing = None
    start = 0.0
    chunk = 512
    while start < delta_max and crossing is None:
        pts = start + step * np.arange(1, chunk + 1)
        pts = pts[pts <= delta_max]
        if pts.size == 0:
            break
        vals = probabilities(model, seq, side * pts) - HALF_LEVEL
        hit = np.flatnonzero(np.sign(vals) != np.sign(f0))
        if hit.size:
            i = hit[0]
            lo = pts[i - 1] if i > 0 else start
            crossing = (lo, pts[i])
        start = pts[-1]
    if crossing is None:
        raise FeatureNotResolved(f"no half-level crossing within |delta| <= {delta_max} for {seq}")
    lo, hi = crossing
    if excess(side * hi) == 0.0:
        root = hi
    else:
        root = bisect(lambda d: excess(side * d), lo, hi, xtol=1e-9)
    kind = FeatureKind.SPIKE if seq.n_pulses % 2 else FeatureKind.DIP
    phys = form_phys = None
    if pulse_width_seconds is not None:
        phys = physical_sensitivity(root, pulse_width_seconds)
        form_phys = physical_sensitivity(formula, pulse_width_seconds) if formula else None
    return SensitivityReport(root, kind, formula, phys, form_phys, pulse_width_seconds)


def physical_sensitivity(hwhm_dimensionless: float, pulse_width_seconds: float) -> float:
    """Convert a dimensionless half width to a detuning in s^-1."""
    if not pulse_width_seconds > 0:
        raise ValidationError("pulse width must be positive")
    return hwhm_dimensionless / pulse_width_seconds


def format_khz(rate_per_second: float) -> str:
    """Two-significant-digit kHz display of a rate given in s^-1 (``"4.5 kHz"``)."""
    khz = rate_per_second / 1e3
    if khz == 0 or not math.isfinite(khz):
        return f"{khz:g} kHz"
    # round first so that e.g. 9.96 becomes "10" rather than "10.0"
    khz = float(f"{khz:.2g}")
    decimals = max(0, 1 - math.floor(math.log10(abs(khz))))
    return f"{khz:.{decimals}f} kHz"


def _tabulated(model: PulseModel) -> Optional[str]:
    fam, al, be = model.family, model.alpha, model.beta
    if fam == "rz" and math.isclose(al, 1.0):
        return "rz"
    if fam == "rabi" and math.isclose(al, math.pi):
        return "rabi"
    if fam == "dk" and math.isclose(al, 2.0) and math.isclose(be, 2.0):
        return "dk"
    return None


def approx_profile(model: PulseModel, seq: SequenceSpec, delta):
    """Small-detuning approximation of the N-pulse transition probability.

    Covers the three tabulated cases (rz alpha=1, rabi alpha=pi,
    dk alpha=beta=2). The dk same-phase case has no usable expansion.
    """
    case = _tabulated(model)
    if case is None:
        raise UnsupportedCase(f"no small-detuning approximation for {model.descriptor()}")
    d = np.asarray(delta, dtype=float)
    n_tot = seq.n_pulses
    n, odd = divmod(n_tot, 2)
    pi2 = math.pi ** 2
    if case == "rz":
        if seq.alternating:
            out = 1 - (n + 0.5) ** 2 * pi2 * d ** 2 if odd else n ** 2 * pi2 * d ** 2
        elif odd:
            out = 1 - 0.25 * pi2 * d ** 2 + (pi2 / 24 - 4 * n * (n + 1) * _LN2 ** 2) * pi2 * d ** 4
        else:
            out = (2 * n * math.pi * _LN2) ** 2 * d ** 4
    elif case == "rabi":
        ai2 = d ** 2 / pi2
        ar2 = d ** 4 / (16 * pi2)
        if seq.alternating:
            out = 1 - n_tot ** 2 * ai2 if odd else n_tot ** 2 * ai2
        else:
            out = 1 - ai2 - n_tot ** 2 * ar2 if odd else n_tot ** 2 * ar2
    else:
        if not seq.alternating:
            raise UnsupportedCase("dk same-phase sequences have no small-detuning approximation")
        corr = d ** 2 * (1 + 0.438 * d ** 2)
        out = 1 - (0.33 * (n + 0.5)) ** 2 * corr if odd else (0.33 * n) ** 2 * corr
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


__all__ = [
    "Provenance",
    "FeatureKind",
    "SweepProfile",
    "SensitivityReport",
    "sweep",
    "probabilities",
    "hwhm",
    "formula_hwhm",
    "approx_profile",
    "physical_sensitivity",
    "format_khz",
]

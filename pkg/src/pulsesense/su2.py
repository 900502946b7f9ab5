"""SU(2) propagators and N-pulse sequence composition.

A propagator is stored through its Cayley-Klein pair ``(a, b)``; the matrix
is ``[[a, -conj(b)], [b, conj(a)]]``. Same-phase sequences repeat the pulse
``N`` times; alternating-phase sequences flip the sign of the Rabi frequency
on every even-numbered pulse.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DegenerateSequence, InternalConsistencyError, ValidationError

UNITARITY_TOL = 1e-12
PROBABILITY_SLACK = 1e-12
_SMALL_SIN = 1e-8


class PhaseMode(str, enum.Enum):
    SAME = "same"
    ALTERNATING = "alternating"


@dataclass(frozen=True, slots=True)
class Propagator:
    """Immutable SU(2) propagator in Cayley-Klein form."""

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        defect = abs(abs(a) ** 2 + abs(b) ** 2 - 1.0)
        if not defect <= UNITARITY_TOL:
            raise ValidationError(f"|a|^2 + |b|^2 deviates from 1 by {defect:.3e}")

    @classmethod
    def from_raw(cls, a, b, tol=1e-10):
        """Build from nearly-unitary values, renormalizing after a defect check."""
        a, b = complex(a), complex(b)
        norm = math.hypot(abs(a), abs(b))
        if not abs(norm * norm - 1.0) <= tol:
            raise InternalConsistencyError(
                f"unitarity defect {abs(norm * norm - 1.0):.3e} exceeds {tol:.1e}"
            )
        return cls(a / norm, b / norm)

    @classmethod
    def from_matrix(cls, m, tol=1e-10):
        m = np.asarray(m, dtype=complex)
        a = 0.5 * (m[0, 0] + m[1, 1].conjugate())
        b = 0.5 * (m[1, 0] - m[0, 1].conjugate())
        return cls.from_raw(a, b, tol=tol)

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0)

    @property
    def matrix(self) -> np.ndarray:
        a, b = self.a, self.b
        return np.array([[a, -b.conjugate()], [b, a.conjugate()]], dtype=complex)

    @property
    def p(self) -> float:
        """Single-pulse transition probability |b|^2."""
        return abs(self.b) ** 2

    @property
    def q(self) -> float:
        return abs(self.a) ** 2

    @property
    def xi(self) -> float:
        """Dynamical phase of ``a``."""
        return cmath.phase(self.a)

    @property
    def eta(self) -> float:
        """Dynamical phase of ``b``."""
        return cmath.phase(self.b)

    def half_angles(self) -> "HalfAngles":
        return HalfAngles.of(self)


@dataclass(frozen=True, slots=True)
class SequenceSpec:
    n_pulses: int
    phase_mode: PhaseMode = PhaseMode.SAME

    def __post_init__(self):
        n = self.n_pulses
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise ValidationError(f"n_pulses must be a positive integer, got {n!r}")
        object.__setattr__(self, "n_pulses", int(n))
        object.__setattr__(self, "phase_mode", PhaseMode(self.phase_mode))

    @property
    def alternating(self) -> bool:
        return self.phase_mode is PhaseMode.ALTERNATING

    def __str__(self):
        return f"N={self.n_pulses} {self.phase_mode.value}"


@dataclass(frozen=True, slots=True)
class HalfAngles:
    """Rotation angles governing same-phase (``theta``) and alternating
    (``big_theta``) powers.

    Computed with ``atan2`` on the unitarity-consistent sines, which equals
    ``arccos(Re a)`` and ``arccos(1 - 2 Im(a)^2)`` but keeps full precision
    near 0 and pi.
    """

    theta: float
    big_theta: float

    @classmethod
    def of(cls, u: Propagator) -> "HalfAngles":
        babs = abs(u.b)
        theta = math.atan2(math.hypot(u.a.imag, babs), u.a.real)
        big_theta = 2.0 * math.atan2(abs(u.a.imag), math.hypot(u.a.real, babs))
        return cls(theta, big_theta)


def compose(second: Propagator, first: Propagator) -> Propagator:
    """Matrix product ``second @ first`` (``first`` acts first)."""
    a1, b1, a2, b2 = first.a, first.b, second.a, second.b
    a = a2 * a1 - b2.conjugate() * b1
    b = b2 * a1 + a2.conjugate() * b1
    return Propagator.from_raw(a, b)


def flip_sign(u: Propagator) -> Propagator:
    """Propagator of the same pulse with the Rabi frequency negated."""
    return Propagator(u.a, -u.b)


def _sin_ratio(n: int, angle: float, sin_angle: float) -> float:
    """sin(n x)/sin(x), with the removable singularities at x = 0, pi filled in."""
    if abs(sin_angle) < _SMALL_SIN:
        if angle < 0.5 * math.pi:
            return float(n)
        return float(n) if n % 2 else -float(n)
    return math.sin(n * angle) / sin_angle


def _check_n(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValidationError(f"pulse count must be a positive integer, got {n!r}")
    return int(n)


def n_pass_same(u: Propagator, n: int) -> Propagator:
    """N-th power of ``u`` from the closed form for SU(2) powers."""
    n = _check_n(n)
    if n == 1:
        return u
    s = math.hypot(u.a.imag, abs(u.b))
    theta = math.atan2(s, u.a.real)
    ratio = _sin_ratio(n, theta, s)
    a = math.cos(n * theta) + 1j * u.a.imag * ratio
    return Propagator.from_raw(a, u.b * ratio)


def _alternating_angles(u: Propagator):
    ai = u.a.imag
    ch = math.hypot(u.a.real, abs(u.b))
    if ch <= 1e-12:
        raise DegenerateSequence(
            "single pulse is a pure phase gate (|Im a| = 1); alternating sequence undefined"
        )
    big_theta = 2.0 * math.atan2(abs(ai), ch)
    return big_theta, ch


def n_pass_alternating(u: Propagator, n: int) -> Propagator:
    """Propagator of ``n`` pulses whose Rabi-frequency sign alternates.

    Pulse 1 is ``u``, pulse 2 is ``flip_sign(u)``, and so on; the odd-length
    product is ``u @ (flip_sign(u) @ u) ** m``.
    """
    n = _check_n(n)
    if n == 1:
        return u
    big_theta, ch = _alternating_angles(u)
    m, odd = divmod(n, 2)
    ar, ai, b = u.a.real, u.a.imag, u.b
    sin_big = 2.0 * abs(ai) * ch
    s = _sin_ratio(m, big_theta, sin_big)
    if not odd:
        a_n = math.cos(m * big_theta) + 2j * ar * ai * s
        b_n = -2j * b * ai * s
    else:
        c = math.cos((m + 0.5) * big_theta) / ch
        a_n = u.a * c + 2j * ai * s
        b_n = b * c
    return Propagator.from_raw(a_n, b_n)


def sequence_propagator(u: Propagator, seq: SequenceSpec) -> Propagator:
    if seq.alternating:
        return n_pass_alternating(u, seq.n_pulses)
    return n_pass_same(u, seq.n_pulses)


def clamp_probability(raw):
    """Clip rounding excursions outside [0, 1]; larger ones are bugs."""
    arr = np.asarray(raw, dtype=float)
    if np.any(arr > 1.0 + PROBABILITY_SLACK) or np.any(arr < -PROBABILITY_SLACK):
        worst = float(np.max(np.maximum(arr - 1.0, -arr)))
        raise InternalConsistencyError(f"probability outside [0, 1] by {worst:.3e}")
    out = np.clip(arr, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def sequence_probability(u: Propagator, seq: SequenceSpec) -> float:
    """Transition probability |<2|U_N|1>|^2 after the sequence."""
    v = sequence_propagator(u, seq)
    return clamp_probability(abs(v.b) ** 2)


def sequence_probability_array(a, b, seq: SequenceSpec) -> np.ndarray:
    """Vectorized sequence probability over arrays of Cayley-Klein pairs."""
    raw = kernels.sequence_probability(
        np.asarray(a, dtype=complex), np.asarray(b, dtype=complex),
        seq.n_pulses, seq.alternating,
    )
    raw = np.asarray(raw, dtype=float)
    if np.isnan(raw).any():
        raise DegenerateSequence(
            "single pulse is a pure phase gate (|Im a| = 1); alternating sequence undefined"
        )
    return clamp_probability(raw)


@dataclass(frozen=True, slots=True)
class AsymptoticProbability:
    value: float
    valid: bool


def asymptotic_probability(a: complex, seq: SequenceSpec) -> AsymptoticProbability:
    """Leading-order sequence probability for a nearly inverting pulse.

    ``valid`` is False when |a| >= 0.3, outside the near-inversion regime the
    expansion assumes; the value is still returned.
    """
    a = complex(a)
    ar, ai = a.real, a.imag
    n = seq.n_pulses
    if seq.alternating:
        value = n * n * ai * ai if n % 2 == 0 else 1.0 - n * n * ai * ai
    else:
        value = n * n * ar * ar if n % 2 == 0 else 1.0 - ai * ai - n * n * ar * ar
    return AsymptoticProbability(value, abs(a) < 0.3)

"""Closed-form single-pulse propagators for three exactly soluble models.

All quantities are dimensionless: ``alpha = Omega0 T``, ``beta = B T`` and
``delta = Delta0 T``.

rz
    Rosen-Zener: sech pulse, constant detuning. Pulse area ``pi * alpha``.
rabi
    Rabi: rectangular pulse on ``|t| <= T/2``, constant detuning.
dk
    Demkov-Kunike: sech pulse, detuning ``delta + beta * tanh(t/T)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._backend import kernels
from .errors import InternalConsistencyError, PoleError, ValidationError
from .su2 import Propagator

FAMILIES = ("rz", "rabi", "dk")
FAMILY_CODES = {"rz": kernels.FAMILY_RZ, "rabi": kernels.FAMILY_RABI, "dk": kernels.FAMILY_DK}
FAMILY_NAMES = {"rz": "Rosen-Zener", "rabi": "Rabi", "dk": "Demkov-Kunike"}
MAX_ABS_DELTA = 100.0

# unitarity check applied to the raw closed-form values
_GAMMA_UNITARITY_TOL = 1e-10
_RABI_UNITARITY_TOL = 1e-14


def complex_gamma(z: complex) -> complex:
    """Gamma function for complex argument.

    Lanczos approximation (g = 607/128, 15 terms) with the reflection formula
    for ``Re z < 0.5``.

    Raises
    ------
    PoleError
        If ``z`` is a non-positive integer (within 1e-12).
    """
    z = complex(z)
    if abs(z.imag) <= 1e-12 and z.real <= 1e-12:
        k = round(z.real)
        if abs(z.real - k) <= 1e-12:
            raise PoleError(f"gamma has a pole at z = {k}")
    return kernels.cgamma(z)


def reciprocal_gamma(z: complex) -> complex:
    """1/Gamma(z), entire; exactly zero at the poles of Gamma."""
    return kernels.crgamma(complex(z))


@dataclass(frozen=True, slots=True)
class PulseModel:
    """One pulse of a soluble model at a given detuning."""

    family: str
    alpha: float
    beta: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        family = str(self.family).lower()
        if family not in FAMILIES:
            raise ValidationError(f"unknown model family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "family", family)
        for name in ("alpha", "beta", "delta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.alpha <= 0:
            raise ValidationError("alpha must be positive")
        if self.beta < 0:
            raise ValidationError("beta must be non-negative")
        if family != "dk" and self.beta != 0.0:
            raise ValidationError(f"beta applies only to the dk model, got beta={self.beta}")
        if abs(self.delta) > MAX_ABS_DELTA:
            raise ValidationError(f"|delta| must not exceed {MAX_ABS_DELTA}")

    @classmethod
    def rosen_zener(cls, alpha, delta=0.0):
        return cls("rz", alpha, 0.0, delta)

    @classmethod
    def rabi(cls, alpha, delta=0.0):
        return cls("rabi", alpha, 0.0, delta)

    @classmethod
    def demkov_kunike(cls, alpha, beta, delta=0.0):
        return cls("dk", alpha, beta, delta)

    def with_delta(self, delta) -> "PulseModel":
        return PulseModel(self.family, self.alpha, self.beta, delta)

    def descriptor(self) -> dict:
        """Model parameters without the detuning."""
        out = {"family": self.family, "alpha": self.alpha}
        if self.family == "dk":
            out["beta"] = self.beta
        return out

    def propagator(self) -> Propagator:
        if self.family == "rz":
            return rosen_zener_propagator(self.alpha, self.delta)
        if self.family == "rabi":
            return rabi_propagator(self.alpha, self.delta)
        return demkov_kunike_propagator(self.alpha, self.beta, self.delta)


def _scalar(family, alpha, beta, delta):
    a, b = kernels.cayley_klein(FAMILY_CODES[family], alpha, beta, np.array([delta], dtype=float))
    return complex(a[0]), complex(b[0])


def rosen_zener_propagator(alpha: float, delta: float) -> Propagator:
    m = PulseModel.rosen_zener(alpha, delta)
    a, b = _scalar("rz", m.alpha, 0.0, m.delta)
    return Propagator.from_raw(a, b, tol=_GAMMA_UNITARITY_TOL)


def rabi_propagator(alpha: float, delta: float) -> Propagator:
    m = PulseModel.rabi(alpha, delta)
    a, b = _scalar("rabi", m.alpha, 0.0, m.delta)
    return Propagator.from_raw(a, b, tol=_RABI_UNITARITY_TOL)


def demkov_kunike_propagator(alpha: float, beta: float, delta: float) -> Propagator:
    """Demkov-Kunike propagator.

    ``b`` is expressed in the convention of the matrix layout used by
    :class:`Propagator` (lower-left element), in the interaction frame whose
    reference phase tends to ``delta * t + beta * |t|`` at large ``|t|``.
    When ``beta > alpha`` the square root ``sqrt(alpha**2 - beta**2)`` takes
    the principal branch ``+i sqrt(beta**2 - alpha**2)``.
    """
    m = PulseModel.demkov_kunike(alpha, beta, delta)
    a, b = _scalar("dk", m.alpha, m.beta, m.delta)
    return Propagator.from_raw(a, b, tol=_GAMMA_UNITARITY_TOL)


def cayley_klein_grid(model: PulseModel, deltas) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ``(a, b)`` arrays over a detuning grid (``model.delta`` ignored)."""
    deltas = np.asarray(deltas, dtype=float)
    if not np.all(np.isfinite(deltas)) or np.any(np.abs(deltas) > MAX_ABS_DELTA):
        raise ValidationError(f"detunings must be finite with |delta| <= {MAX_ABS_DELTA}")
    a, b = kernels.cayley_klein(FAMILY_CODES[model.family], model.alpha, model.beta, deltas)
    norm2 = np.abs(a) ** 2 + np.abs(b) ** 2
    tol = _RABI_UNITARITY_TOL if model.family == "rabi" else _GAMMA_UNITARITY_TOL
    defect = np.max(np.abs(norm2 - 1.0)) if norm2.size else 0.0
    if not defect <= tol:
        raise InternalConsistencyError(f"closed-form unitarity defect {defect:.3e}")
    norm = np.sqrt(norm2)
    return a / norm, b / norm


def _a_complex(family: str, alpha: float, beta: float, delta: complex) -> complex:
    """Cayley-Klein ``a`` continued to complex detuning (for Taylor coefficients)."""
    g, rg = kernels.cgamma, kernels.crgamma
    if family == "rabi":
        w = cmath.sqrt(alpha * alpha + delta * delta)
        if abs(w) < 1e-300:
            return 1.0 + 0.5j * delta
        return cmath.cos(0.5 * w) + 1j * delta * cmath.sin(0.5 * w) / w
    if family == "rz":
        nu = 0.5 + 0.5j * delta
        return g(nu) ** 2 * rg(nu - 0.5 * alpha) * rg(nu + 0.5 * alpha)
    r = cmath.sqrt(alpha * alpha - beta * beta)
    lam = 0.5 * (r - 1j * beta)
    mu = -0.5 * (r + 1j * beta)
    nu = 0.5 * (1.0 + 1j * (delta - beta))
    return g(nu) * g(nu - lam - mu) * rg(nu - lam) * rg(nu - mu)


@dataclass(frozen=True, slots=True)
class ModelExpansion:
    """Taylor coefficients of ``a`` in powers of ``delta`` (index = power)."""

    coefficients: tuple[complex, ...]
    source: str

    def __post_init__(self):
        if len(self.coefficients) < 4:
            raise ValidationError("an expansion needs at least four coefficients")

    def __call__(self, delta, order=None):
        coefs = self.coefficients if order is None else self.coefficients[: order + 1]
        return sum(c * delta ** k for k, c in enumerate(coefs))


_LN2 = math.log(2.0)
_PI = math.pi
TABULATED = {
    ("rz", 1.0, 0.0): (
        0j,
        0.5j * _PI,
        _PI * _LN2 + 0j,
        -1j * _PI * (_PI ** 2 / 24 + _LN2 ** 2),
    ),
    ("rabi", _PI, 0.0): (
        0j,
        1j / _PI,
        -1 / (4 * _PI) + 0j,
        -1j / (2 * _PI ** 3),
        1 / (16 * _PI ** 3) + 0j,
    ),
    ("dk", 2.0, 2.0): (0.086 + 0j, 0.165j, -0.052 + 0j, 0.036j),
}


def _tabulated_key(family, alpha, beta):
    for (fam, al, be), coefs in TABULATED.items():
        if fam == family and math.isclose(alpha, al, rel_tol=1e-12) and math.isclose(beta, be, abs_tol=1e-12):
            return coefs
    return None


def _cauchy_coefficients(f, order, radius=0.25, points=64):
    z = radius * np.exp(2j * np.pi * np.arange(points) / points)
    vals = np.array([f(complex(zz)) for zz in z])
    fft = np.fft.fft(vals) / points
    return tuple(complex(fft[k] / radius ** k) for k in range(order + 1))


def _fd_coefficients(f, order, step=1e-3, levels=3):
    """Central differences with Richardson extrapolation in the step size."""
    if order > 4:
        raise ValidationError("finite-difference expansion supports order <= 4")
    stencils = {
        0: {0: 1.0},
        1: {-1: -0.5, 1: 0.5},
        2: {-1: 1.0, 0: -2.0, 1: 1.0},
        3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
        4: {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0},
    }
    coefs = []
    for k in range(order + 1):
        table = []
        for lev in range(levels):
            h = step / 2 ** lev
            d = sum(w * f(j * h) for j, w in stencils[k].items()) / h ** k
            table.append(d)
        # error series in h^2
        for col in range(1, levels):
            table = [(4 ** col * table[i + 1] - table[i]) / (4 ** col - 1) for i in range(len(table) - 1)]
        coefs.append(complex(table[0]) / math.factorial(k))
    return tuple(coefs)


def model_expansion(family: str, alpha: float, beta: float = 0.0, *, order: int = 3,
                    method: str = "auto") -> ModelExpansion:
    """Taylor coefficients of the Cayley-Klein ``a`` around ``delta = 0``.

    Parameters
    ----------
    method : {"auto", "tabulated", "cauchy", "fd"}
        ``auto`` returns the published coefficients for the three tabulated
        cases (rz alpha=1, rabi alpha=pi, dk alpha=beta=2) and the contour
        integral otherwise. ``cauchy`` evaluates the trapezoidal Cauchy
        integral on a circle of radius 1/4 in the complex detuning plane.
        ``fd`` uses central differences with step 1e-3 and Richardson
        extrapolation.
    """
    family = PulseModel(family, alpha, beta).family
    order = max(int(order), 3)
    if method in ("auto", "tabulated"):
        tab = _tabulated_key(family, alpha, beta)
        if tab is not None:
            return ModelExpansion(tuple(tab), "paper")
        if method == "tabulated":
            raise ValidationError(f"no tabulated expansion for {family} alpha={alpha} beta={beta}")
        method = "cauchy"
    f = lambda d: _a_complex(family, alpha, beta, d)
    if method == "cauchy":
        return ModelExpansion(_cauchy_coefficients(f, order), "numeric")
    if method == "fd":
        return ModelExpansion(_fd_coefficients(f, order), "numeric")
    raise ValidationError(f"unknown expansion method {method!r}")


__all__: Sequence[str] = [
    "complex_gamma",
    "reciprocal_gamma",
    "PulseModel",
    "ModelExpansion",
    "rosen_zener_propagator",
    "rabi_propagator",
    "demkov_kunike_propagator",
    "cayley_klein_grid",
    "model_expansion",
]

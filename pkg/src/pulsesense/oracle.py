"""Numerical propagators from direct integration of the two-state equation.

Used as an independent check on the closed forms. The Hamiltonian is
``H(t) = 1/2 [[-Delta(t), Omega(t)], [Omega(t), Delta(t)]]`` in units of
``1/T``; both columns of ``U`` are integrated with an adaptive
Dormand-Prince 5(4) stepper.

When a waveform carries a ``phase`` function (antiderivative of the
detuning, anchored at ``t = 0``) the integration runs in the interaction
frame, where the free detuning rotation is removed. This is the frame the
sech-pulse closed forms refer to. Without it, the plain rotating-frame
propagator over the window is returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _pycore
from ._backend import kernels
from .errors import ToleranceNotMet, UnitarityLost, ValidationError
from .models import FAMILY_CODES, PulseModel
from .su2 import Propagator

SECH_WINDOW = (-30.0, 30.0)
RECT_WINDOW = (-0.5, 0.5)
REPAIR_LIMIT = 1e-7


@dataclass(frozen=True)
class PulseWaveform:
    """Rabi frequency and detuning (both times T) as functions of t/T."""

    rabi: Callable[[float], float]
    detuning: Callable[[float], float]
    window: tuple[float, float]
    phase: Optional[Callable[[float], float]] = None
    breakpoints: tuple[float, ...] = ()
    # (family, alpha, beta, delta) lets the compiled kernel evaluate the pulse
    family: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        t0, t1 = (float(x) for x in self.window)
        if not (math.isfinite(t0) and math.isfinite(t1)) or t0 == t1:
            raise ValidationError(f"window must be finite and non-empty, got {self.window}")
        object.__setattr__(self, "window", (t0, t1))

    @property
    def frame(self) -> str:
        return "lab" if self.phase is None else "interaction"


@dataclass(frozen=True, slots=True)
class IntegrationConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_steps: int = 200_000

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol"):
            v = getattr(self, name)
            if not 0.0 < v <= 1e-4:
                raise ValidationError(f"{name} must lie in (0, 1e-4], got {v}")
        if self.max_steps < 10_000:
            raise ValidationError("max_steps must be at least 10000")

    @classmethod
    def diagnostic(cls, tol: float, max_steps: int = 200_000) -> "IntegrationConfig":
        """Config with tolerances up to 0.1, outside the production bound.

        Only meant for checks that deliberately degrade the integrator.
        """
        if not 0.0 < tol <= 0.1:
            raise ValidationError(f"diagnostic tolerance must lie in (0, 0.1], got {tol}")
        cfg = object.__new__(cls)
        for name, v in (("abs_tol", tol), ("rel_tol", tol), ("max_steps", int(max_steps))):
            object.__setattr__(cfg, name, v)
        return cfg


def _sech(t):
    return _pycore._sech(t)


def make_waveform(model: PulseModel, window: Optional[tuple[float, float]] = None) -> PulseWaveform:
    """Waveform of a soluble model, framed to match its closed form.

    sech pulses default to the window [-30, 30]; the rectangular pulse uses
    exactly [-1/2, 1/2] in the lab frame.
    """
    al, be, de = model.alpha, model.beta, model.delta
    tag = (model.family, al, be, de)
    if model.family == "rabi":
        return PulseWaveform(
            rabi=lambda t: al if abs(t) <= 0.5 else 0.0,
            detuning=lambda t: de,
            window=window or RECT_WINDOW,
            breakpoints=(-0.5, 0.5),
            family=tag,
        )
    window = window or SECH_WINDOW
    if model.family == "rz":
        return PulseWaveform(
            rabi=lambda t: al * _sech(t),
            detuning=lambda t: de,
            window=window,
            phase=lambda t: de * t,
            family=tag,
        )
    return PulseWaveform(
        rabi=lambda t: al * _sech(t),
        detuning=lambda t: de + be * math.tanh(t),
        window=window,
        phase=lambda t: de * t + be * _pycore._log2cosh(t),
        family=tag,
    )


def _segments(waveform: PulseWaveform):
    t0, t1 = waveform.window
    lo, hi = min(t0, t1), max(t0, t1)
    cuts = sorted({t for t in waveform.breakpoints if lo < t < hi})
    pts = [lo, *cuts, hi]
    segs = list(zip(pts[:-1], pts[1:]))
    if t1 < t0:
        segs = [(b, a) for a, b in reversed(segs)]
    return segs


def _segment(waveform: PulseWaveform, t0, t1, cfg):
    fam = waveform.family
    if fam is not None and hasattr(kernels, "integrate_family"):
        family, al, be, de = fam
        return kernels.integrate_family(
            FAMILY_CODES[family], al, be, de, t0, t1, waveform.phase is not None,
            cfg.rel_tol, cfg.abs_tol, cfg.max_steps,
        )
    y, steps, status = _pycore.rk_integrate(
        waveform.rabi, waveform.detuning, waveform.phase, t0, t1,
        cfg.rel_tol, cfg.abs_tol, cfg.max_steps,
    )
    return (*y, steps, status)


def integrate_propagator(waveform: PulseWaveform, cfg: Optional[IntegrationConfig] = None,
                         *, full_output: bool = False):
    """Integrate ``i dU/dt = H U`` across the waveform window.

    Integration is split at ``waveform.breakpoints`` so that no step
    straddles a discontinuity. A small unitarity defect (<= 1e-7) is repaired
    by projecting onto SU(2).

    Returns
    -------
    Propagator, or ``(Propagator, info)`` with ``full_output=True``; ``info``
    holds ``defect``, ``steps`` and ``frame``.

    Raises
    ------
    ToleranceNotMet
        If the stepper runs out of steps or its step size underflows.
    UnitarityLost
        If the raw unitarity defect exceeds 1e-7.
    """
    cfg = cfg or IntegrationConfig()
    total = np.eye(2, dtype=complex)
    steps = 0
    for t0, t1 in _segments(waveform):
        u00, u01, u10, u11, n, status = _segment(waveform, t0, t1, cfg)
        steps += n
        if status == 1:
            raise ToleranceNotMet(f"max_steps={cfg.max_steps} exhausted on [{t0}, {t1}]")
        if status == 2:
            raise ToleranceNotMet(f"step size underflow on [{t0}, {t1}]")
        total = np.array([[u00, u01], [u10, u11]]) @ total
    defect = float(np.max(np.abs(total.conj().T @ total - np.eye(2))))
    defect = max(defect, abs(np.linalg.det(total) - 1.0))
    if defect > REPAIR_LIMIT:
        raise UnitarityLost(f"unitarity defect {defect:.3e} exceeds {REPAIR_LIMIT:.0e}")
    u = Propagator.from_matrix(total, tol=10 * REPAIR_LIMIT)
    if full_output:
        return u, {"defect": defect, "steps": steps, "frame": waveform.frame}
    return u


def oracle_propagator(model: PulseModel, cfg: Optional[IntegrationConfig] = None,
                      window=None) -> Propagator:
    """Shortcut: integrate the waveform of ``model``."""
    return integrate_propagator(make_waveform(model, window), cfg)

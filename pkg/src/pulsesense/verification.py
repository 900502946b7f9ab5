"""Self-checks run by ``pulsesense verify``.

Each check returns a dict ``{name, group, max_deviation, threshold, passed}``
plus optional detail fields. The checks compare independent routes to the
same quantity: closed-form sequence algebra against explicit matrix
products, closed-form propagators against the ODE oracle, and the numeric
Taylor expansion of ``a(delta)`` against the tabulated coefficients.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .errors import PulseSenseError
from .models import TABULATED, PulseModel, model_expansion
from .oracle import IntegrationConfig, oracle_propagator
from .su2 import Propagator, SequenceSpec, flip_sign, sequence_propagator

GROUPS = ("su2", "ode", "expansion")
ODE_DELTAS = (-2.0, -1.0, -0.3, 0.0, 0.3, 1.0, 2.0)
ODE_MODELS = (("rz", 1.0, 0.0), ("rabi", math.pi, 0.0), ("dk", 2.0, 2.0))
ODE_THRESHOLD = 1e-8
SU2_THRESHOLD = 1e-12
# relative for rz/rabi, absolute for dk (printed to three decimals)
EXPANSION_THRESHOLDS = {"rz": 1e-6, "rabi": 1e-8, "dk": 1e-3}


def random_su2(rng: np.random.Generator) -> Propagator:
    """Haar-distributed SU(2) element from a uniform point on S^3."""
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    return Propagator.from_raw(complex(v[0], v[1]), complex(v[2], v[3]))


def iterated_product(u: Propagator, seq: SequenceSpec) -> np.ndarray:
    m = u.matrix
    flipped = flip_sign(u).matrix
    out = np.eye(2, dtype=complex)
    for k in range(seq.n_pulses):
        out = ((flipped if seq.alternating and k % 2 else m)) @ out
    return out


def _result(name, group, dev, threshold, **extra):
    out = {"name": name, "group": group, "max_deviation": float(dev),
           "threshold": float(threshold), "passed": bool(dev <= threshold)}
    out.update(extra)
    return out


def check_su2(n_matrices: int = 1000, max_n: int = 64, seed: int = 0) -> list[dict]:
    """Closed-form powers against explicit products for random SU(2)."""
    rng = np.random.default_rng(seed)
    worst = {"same": 0.0, "alternating": 0.0}
    for _ in range(n_matrices):
        u = random_su2(rng)
        n = int(rng.integers(1, max_n + 1))
        for mode in worst:
            seq = SequenceSpec(n, mode)
            dev = np.max(np.abs(sequence_propagator(u, seq).matrix - iterated_product(u, seq)))
            worst[mode] = max(worst[mode], float(dev))
    return [
        _result(f"power formula vs product ({mode})", "su2", dev, SU2_THRESHOLD,
                samples=n_matrices, max_n=max_n)
        for mode, dev in worst.items()
    ]


def check_ode(ode_tol: Optional[float] = None) -> list[dict]:
    """Closed-form single-pulse propagators against direct integration."""
    tol = 1e-12 if ode_tol is None else ode_tol
    cfg = IntegrationConfig(abs_tol=tol, rel_tol=tol) if tol <= 1e-4 else IntegrationConfig.diagnostic(tol)
    out = []
    for family, alpha, beta in ODE_MODELS:
        dev = 0.0
        errors = []
        for d in ODE_DELTAS:
            model = PulseModel(family, alpha, beta, d)
            try:
                diff = oracle_propagator(model, cfg).matrix - model.propagator().matrix
            except PulseSenseError as exc:
                # a failed integration counts as unbounded disagreement
                errors.append(f"delta={d}: {type(exc).__name__}: {exc}")
                dev = math.inf
                continue
            dev = max(dev, float(np.max(np.abs(diff))))
        out.append(_result(f"closed form vs ODE ({family})", "ode", dev, ODE_THRESHOLD,
                           ode_tol=tol, deltas=list(ODE_DELTAS), errors=errors))
    return out


def check_expansion() -> list[dict]:
    """Contour-integral Taylor coefficients against the tabulated values."""
    out = []
    for (family, alpha, beta), ref in TABULATED.items():
        ref = np.array(ref)
        order = len(ref) - 1
        num = np.array(model_expansion(family, alpha, beta, order=order, method="cauchy").coefficients[:order + 1])
        if family == "dk":
            dev = float(np.max(np.abs(num - ref)))
        else:
            nz = ref != 0
            dev = max(float(np.max(np.abs(num[nz] - ref[nz]) / np.abs(ref[nz]))),
                      float(np.max(np.abs(num[~nz]), initial=0.0)))
        out.append(_result(f"expansion coefficients ({family})", "expansion", dev,
                           EXPANSION_THRESHOLDS[family]))
    return out


def run_checks(only: Optional[str] = None, ode_tol: Optional[float] = None) -> dict:
    groups = GROUPS if only is None else (only,)
    checks = []
    for g in groups:
        if g == "su2":
            checks += check_su2()
        elif g == "ode":
            checks += check_ode(ode_tol)
        elif g == "expansion":
            checks += check_expansion()
        else:
            raise ValueError(f"unknown check group {g!r}")
    return {"groups": list(groups), "checks": checks, "passed": all(c["passed"] for c in checks)}

"""Inversion of measured N-pulse populations into a detuning estimate.

The forward model is exact; the inverse is a global least-squares search:
a coarse grid locates every basin of the loss and each basin is refined with
a bounded golden-section/parabolic minimizer. Measurements at several ``N``
remove the aliasing caused by the oscillating profiles at large ``N``.

The rz and rabi forward models are even in ``delta``, so only ``|delta|`` is
identifiable for them; the estimate carries a ``sign_ambiguous`` flag rather
than an invented sign.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import AmbiguousEstimate, NoFit, ValidationError
from .models import PulseModel
from .profiles import probabilities
from .su2 import SequenceSpec

DEFAULT_RANGE = (-0.5, 0.5)
DEFAULT_GRID = 2001
MIN_GRID = 400
RESIDUAL_CEILING = 0.25
# survivors: residual <= 2 * best + floor (the floor absorbs rounding on exact data)
RESIDUAL_FLOOR = 1e-12
EVEN_FAMILIES = ("rz", "rabi")


@dataclass(frozen=True, slots=True)
class Measurement:
    seq: SequenceSpec
    probability: float
    weight: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValidationError(f"probability {self.probability} outside [0, 1]")
        if not self.weight > 0 or not math.isfinite(self.weight):
            raise ValidationError(f"weight must be positive, got {self.weight}")


@dataclass(frozen=True)
class MeasurementSet:
    model: PulseModel
    records: tuple[Measurement, ...]

    def __post_init__(self):
        records = tuple(self.records)
        if not records:
            raise ValidationError("a measurement set needs at least one record")
        object.__setattr__(self, "records", records)

    @property
    def pulse_counts(self) -> set[int]:
        return {r.seq.n_pulses for r in self.records}


@dataclass(frozen=True)
class DetuningEstimate:
    delta_hat: float
    residual: float
    candidates: tuple[tuple[float, float], ...]
    search_range: tuple[float, float]
    ambiguous: bool = False
    sign_ambiguous: bool = False
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def abs_delta(self) -> float:
        return abs(self.delta_hat)


def predict(model: PulseModel, seq: SequenceSpec, delta) -> float | np.ndarray:
    """Exact transition probability of the sequence at detuning ``delta``."""
    d = np.asarray(delta, dtype=float)
    out = probabilities(model, seq, np.atleast_1d(d))
    return float(out[0]) if d.ndim == 0 else out.reshape(d.shape)


def _loss_factory(ms: MeasurementSet):
    groups = {}
    for r in ms.records:
        groups.setdefault(r.seq, []).append((r.probability, r.weight))

    def loss(deltas):
        deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
        total = np.zeros(deltas.shape)
        for seq, obs in groups.items():
            pred = probabilities(ms.model, seq, deltas)
            for p, w in obs:
                total += w * (pred - p) ** 2
        return total

    return loss


def estimate(measurements: MeasurementSet, search_range=DEFAULT_RANGE, *,
             n_grid: int = DEFAULT_GRID, xtol: float = 1e-7,
             residual_ceiling: float = RESIDUAL_CEILING) -> DetuningEstimate:
    """Least-squares detuning from measured sequence populations.

    Minimizes ``sum(weight * (predict(delta) - measured) ** 2)`` over
    ``search_range``. Every local minimum of the coarse grid is refined; all
    refined minima with residual within twice the best are reported as
    candidates. ``delta_hat`` is the best candidate, ties broken towards the
    smaller ``|delta|`` and then the non-negative sign.

    ``ambiguous`` is set when candidates with different ``|delta|`` survive;
    an :class:`AmbiguousEstimate` warning is issued when this happens with a
    single pulse count. ``sign_ambiguous`` is set whenever ``delta_hat != 0``
    and either the forward model is even (rz, rabi) or the mirrored value
    fits equally well.

    Raises
    ------
    NoFit
        If the best residual exceeds ``residual_ceiling``.
    """
    lo, hi = (float(x) for x in search_range)
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise ValidationError(f"invalid search range {search_range}")
    if n_grid < MIN_GRID:
        raise ValidationError(f"n_grid must be at least {MIN_GRID}")
    loss = _loss_factory(measurements)
    grid = np.linspace(lo, hi, int(n_grid))
    if lo < 0.0 < hi:
        grid = np.unique(np.append(grid, 0.0))
    values = loss(grid)

    basins = []
    for i in range(len(grid)):
        left = values[i - 1] if i > 0 else np.inf
        right = values[i + 1] if i + 1 < len(grid) else np.inf
        if values[i] <= left and values[i] <= right:
            basins.append(i)

    refined = {}
    for i in basins:
        a = grid[max(i - 1, 0)]
        b = grid[min(i + 1, len(grid) - 1)]
        x, fx = grid[i], values[i]
        if b > a:
            res = minimize_scalar(lambda d: float(loss(d)[0]), bounds=(a, b), method="bounded",
                                  options={"xatol": xtol})
            if res.fun < fx:
                x, fx = float(res.x), float(res.fun)
        key = round(x / xtol)
        if key not in refined or fx < refined[key][1]:
            refined[key] = (float(x), float(fx))

    cands = sorted(refined.values(), key=lambda c: (c[1], abs(c[0]), -c[0]))
    best = cands[0][1]
    if best > residual_ceiling:
        raise NoFit(f"best residual {best:.3g} exceeds ceiling {residual_ceiling}")
    tol_abs = max(10 * xtol, 1e-6)
    keep = [c for c in cands if c[1] <= 2.0 * best + RESIDUAL_FLOOR]
    keep.sort(key=lambda c: (round(abs(c[0]) / tol_abs), -c[0]))
    # among the survivors the minimal residual wins; near-equal ones go to the smaller |delta|
    tied = [c for c in keep if c[1] <= best + RESIDUAL_FLOOR]
    delta_hat, residual = tied[0]

    distinct = []
    for d, _ in keep:
        if all(abs(abs(d) - abs(e)) > tol_abs for e in distinct):
            distinct.append(d)
    ambiguous = len(distinct) > 1
    if ambiguous and len(measurements.pulse_counts) == 1:
        warnings.warn(
            f"{len(distinct)} detuning candidates fit equally well; measure at another N",
            AmbiguousEstimate, stacklevel=2,
        )
    mirrored = any(d * delta_hat < 0 and abs(abs(d) - abs(delta_hat)) <= tol_abs for d, _ in keep)
    sign_ambiguous = abs(delta_hat) > tol_abs and (
        measurements.model.family in EVEN_FAMILIES or mirrored)
    return DetuningEstimate(
        delta_hat=delta_hat,
        residual=residual,
        candidates=tuple(keep),
        search_range=(lo, hi),
        ambiguous=ambiguous,
        sign_ambiguous=sign_ambiguous,
    )


def simulate_measurement(model: PulseModel, seq: SequenceSpec, shots: int = 0,
                         rng_seed: Optional[int] = None) -> float:
    """Measured transition probability; ``shots=0`` returns the exact value.

    With ``shots > 0`` this is the mean of a seeded binomial draw.
    """
    if shots < 0:
        raise ValidationError("shots must be non-negative")
    p = predict(model, seq, model.delta)
    if shots == 0:
        return p
    rng = np.random.default_rng(rng_seed)
    return rng.binomial(int(shots), p) / shots


def synthetic_measurements(model: PulseModel, seqs: Sequence[SequenceSpec], shots: int = 0,
                           rng_seed: Optional[int] = None) -> MeasurementSet:
    """Records for each sequence at ``model.delta``, one RNG stream for all."""
    rng = np.random.default_rng(rng_seed)
    records = []
    for seq in seqs:
        p = predict(model, seq, model.delta)
        if shots:
            p = rng.binomial(int(shots), p) / shots
        records.append(Measurement(seq, p))
    base = PulseModel(model.family, model.alpha, model.beta, 0.0)
    return MeasurementSet(base, tuple(records))

"""CSV/JSON serialization of profiles, measurements and reports.

Floats are written with 17 significant digits so that a write/read round
trip is exact. Nothing time-dependent goes into the files: identical inputs
give byte-identical output.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import ValidationError
from .estimator import Measurement, MeasurementSet
from .models import PulseModel
from .profiles import Provenance, SweepProfile
from .su2 import SequenceSpec

SCHEMA_VERSION = 1
PROFILE_HEADER = ("delta", "probability", "N", "phase_mode", "model")
MEASUREMENT_HEADER = ("N", "phase_mode", "probability", "weight")


def fmt(x: float) -> str:
    """Shortest exact text for a double (17 significant digits at most)."""
    x = float(x)
    if x == 0.0:
        return "0"
    short = repr(x)
    return short if float(short) == x else format(x, ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(doc: dict) -> str:
    """Deterministic JSON text (sorted keys, fixed indent, trailing newline)."""
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def model_metadata(model: PulseModel) -> dict:
    return model.descriptor()


def model_label(model: PulseModel) -> str:
    """Compact text form used in the CSV ``model`` column, e.g. ``dk(alpha=2,beta=2)``."""
    params = ",".join(f"{k}={fmt(v)}" for k, v in model.descriptor().items() if k != "family")
    return f"{model.family}({params})"


def profile_to_csv(profile: SweepProfile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROFILE_HEADER)
    label = model_label(profile.model)
    n, mode = profile.seq.n_pulses, profile.seq.phase_mode.value
    for d, p in zip(profile.delta, profile.probability):
        w.writerow((fmt(d), fmt(p), n, mode, label))
    return buf.getvalue()


def profile_document(profile: SweepProfile, version: str, extra: Optional[dict] = None) -> dict:
    doc = {
        "schema": SCHEMA_VERSION,
        "tool_version": version,
        "model": model_metadata(profile.model),
        "sequence": {"N": profile.seq.n_pulses, "phase_mode": profile.seq.phase_mode.value},
        "provenance": profile.provenance.value,
        "profile": [{"delta": float(d), "probability": float(p)}
                    for d, p in zip(profile.delta, profile.probability)],
    }
    if extra:
        doc.update(extra)
    return doc


def profile_to_json(profile: SweepProfile, version: str, extra: Optional[dict] = None) -> str:
    return dumps(profile_document(profile, version, extra))


def _parse_descriptor(label: str) -> PulseModel:
    # inverse of model_label(): "rz(alpha=1)" / "dk(alpha=2,beta=2)"
    try:
        family, rest = label.split("(", 1)
        params = dict(kv.split("=") for kv in rest.rstrip(")").split(",") if kv)
        return PulseModel(family.strip(), float(params["alpha"]), float(params.get("beta", 0.0)))
    except (ValueError, KeyError) as exc:
        raise ValidationError(f"cannot parse model label {label!r}") from exc


def profile_from_csv(text: str) -> SweepProfile:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != PROFILE_HEADER:
        raise ValidationError(f"profile CSV must start with header {','.join(PROFILE_HEADER)}")
    body = rows[1:]
    if not body:
        raise ValidationError("profile CSV has no rows")
    n, mode, label = body[0][2], body[0][3], body[0][4]
    if any((r[2], r[3], r[4]) != (n, mode, label) for r in body):
        raise ValidationError("profile CSV mixes sequences or models")
    delta = np.array([float(r[0]) for r in body])
    prob = np.array([float(r[1]) for r in body])
    return SweepProfile(_parse_descriptor(label), SequenceSpec(int(n), mode), delta, prob)


def profile_from_json(text: str) -> SweepProfile:
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema {doc.get('schema')!r}")
    m = doc["model"]
    model = PulseModel(m["family"], m["alpha"], m.get("beta", 0.0))
    seq = SequenceSpec(doc["sequence"]["N"], doc["sequence"]["phase_mode"])
    delta = np.array([r["delta"] for r in doc["profile"]], dtype=float)
    prob = np.array([r["probability"] for r in doc["profile"]], dtype=float)
    return SweepProfile(model, seq, delta, prob, Provenance(doc.get("provenance", "closed_form")))


def measurements_to_csv(records: Iterable[Measurement]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MEASUREMENT_HEADER)
    for r in records:
        w.writerow((r.seq.n_pulses, r.seq.phase_mode.value, fmt(r.probability), fmt(r.weight)))
    return buf.getvalue()


def measurements_from_csv(text: str, model: PulseModel) -> MeasurementSet:
    """Parse ``N,phase_mode,probability[,weight]`` rows.

    Raises
    ------
    ValidationError
        On a missing/unknown header, malformed rows, or no rows at all.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValidationError("measurement file is empty")
    header = tuple(c.strip() for c in rows[0])
    if header not in (MEASUREMENT_HEADER, MEASUREMENT_HEADER[:3]):
        raise ValidationError(f"measurement header must be {','.join(MEASUREMENT_HEADER)} (weight optional)")
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) not in (3, 4):
            raise ValidationError(f"line {lineno}: expected 3 or 4 fields, got {len(row)}")
        try:
            n = int(row[0])
            prob = float(row[2])
            weight = float(row[3]) if len(row) == 4 and row[3].strip() else 1.0
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc
        records.append(Measurement(SequenceSpec(n, row[1].strip()), prob, weight))
    if not records:
        raise ValidationError("measurement file has a header but no records")
    return MeasurementSet(model, tuple(records))


def write_text(path: Path | str, text: str) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path

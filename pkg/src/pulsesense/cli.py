"""Command-line front end: ``pulsesense {sweep,hwhm,estimate,verify,figure}``.

Exit codes: 0 success, 1 failed verification, 2 invalid input, 3 compute
error, 4 no acceptable fit. Errors go to stderr as one JSON object.

Option values come from, in decreasing priority: command-line flags, a JSON
file given with ``--config``, built-in defaults. Without ``--out`` results
go to stdout, or into ``$PULSESENSE_OUTPUT_DIR`` when that is set.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import io as pio
from .errors import FeatureNotResolved, NoFit, PulseSenseError, UnsupportedCase, ValidationError
from .estimator import DEFAULT_RANGE, Measurement, estimate, simulate_measurement
from .models import FAMILIES, PulseModel
from .profiles import (
    DEFAULT_POINTS,
    Provenance,
    approx_profile,
    default_range,
    format_khz,
    hwhm,
    sweep,
)
from .su2 import SequenceSpec
from .verification import GROUPS, run_checks

OUTPUT_DIR_ENV = "PULSESENSE_OUTPUT_DIR"
EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_COMPUTE, EXIT_NOFIT = 0, 1, 2, 3, 4

DEFAULT_ALPHA = {"rz": 1.0, "rabi": math.pi, "dk": 2.0}
DEFAULTS = {
    "model": "rz",
    "alpha": None,  # per-family, see DEFAULT_ALPHA
    "beta": None,  # 2 for dk, else 0
    "N": 1,
    "phase": "same",
    "delta_min": None,
    "delta_max": None,
    "points": DEFAULT_POINTS,
    "format": "csv",
    "seed": None,
    "shots": 0,
    "pulse_width_seconds": None,
    "provenance": "closed_form",
    "workers": 1,
}

UNITS_NOTE = (
    "Physical rates are delta / T in s^-1, printed as kHz following the literal "
    "convention (0.045 / 10 us -> 4.5 kHz). If Delta is an angular frequency the "
    "ordinary frequency is that value divided by 2 pi; both are listed."
)

FIGURES = {
    "rz-even": "RZ alpha=1, N=2,4,8,16, same and alternating phases, single-pulse reference",
    "rz-odd": "RZ alpha=1, N=3,5,9,15, same and alternating phases, single-pulse reference",
    "rz-approx": "RZ alpha=1, N=8,9, exact and small-detuning approximations",
    "rabi-rz": "RZ alpha=1 and Rabi alpha=pi, N=10 alternating",
    "dk": "DK alpha=beta=2, N=2,3,8,9, exact and approximations, single-pulse reference",
}


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind = code, kind


def _model_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="JSON file of option values (flags override it)")
    p.add_argument("--model", choices=FAMILIES, default=None)
    p.add_argument("--alpha", type=float, default=None, help="Omega0*T (default: pi pulse / 2 for dk)")
    p.add_argument("--beta", type=float, default=None, help="chirp B*T, dk only (default 2)")
    p.add_argument("--pulse-width-seconds", type=float, default=None, dest="pulse_width_seconds")


def _seq_flags(p: argparse.ArgumentParser):
    p.add_argument("--N", type=int, default=None, dest="N", help="number of pulses")
    p.add_argument("--phase", choices=("same", "alternating"), default=None)


def _out_flags(p: argparse.ArgumentParser, formats=("csv", "json")):
    p.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=formats, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsesense",
        description="Detuning sensing with sequences of exactly soluble two-state pulses.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", help="excitation profile P_N(delta)")
    _model_flags(sp)
    _seq_flags(sp)
    _out_flags(sp)
    sp.add_argument("--delta-min", type=float, default=None, dest="delta_min")
    sp.add_argument("--delta-max", type=float, default=None, dest="delta_max")
    sp.add_argument("--points", type=int, default=None)
    sp.add_argument("--provenance", choices=[p.value for p in Provenance], default=None)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--measure-at", type=float, default=None, dest="measure_at", metavar="DELTA",
                    help="instead of a profile, write one measurement record at DELTA")
    sp.add_argument("--shots", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)

    hp = sub.add_parser("hwhm", help="half width of the central spike or dip")
    _model_flags(hp)
    _seq_flags(hp)
    hp.add_argument("--delta-max", type=float, default=None, dest="delta_max")
    hp.add_argument("--out", type=Path, default=None)

    ep = sub.add_parser("estimate", help="detuning from measured populations")
    _model_flags(ep)
    ep.add_argument("measurements", type=Path, help="CSV with N,phase_mode,probability[,weight]")
    ep.add_argument("--delta-min", type=float, default=None, dest="delta_min")
    ep.add_argument("--delta-max", type=float, default=None, dest="delta_max")
    ep.add_argument("--out", type=Path, default=None)

    vp = sub.add_parser("verify", help="oracle self-checks")
    vp.add_argument("--only", choices=GROUPS, default=None)
    vp.add_argument("--ode-tol", type=float, default=None, dest="ode_tol",
                    help="integrator tolerance for the ODE checks (default 1e-12)")
    vp.add_argument("--out", type=Path, default=None)

    fp = sub.add_parser("figure", help="profile bundles for the standard figures")
    fp.add_argument("--id", required=True, choices=sorted(FIGURES), dest="figure_id")
    fp.add_argument("--points", type=int, default=None)
    fp.add_argument("--pulse-width-seconds", type=float, default=None, dest="pulse_width_seconds")
    fp.add_argument("--out", type=Path, default=None)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags, config file and defaults into one option dict."""
    cfg = {}
    path = getattr(args, "config", None)
    if path is not None:
        try:
            cfg = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(EXIT_INPUT, "ConfigError", f"cannot read config {path}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise CliError(EXIT_INPUT, "ConfigError", "config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    opts = dict(DEFAULTS)
    opts.update(cfg)
    for k, v in vars(args).items():
        if v is not None:
            opts[k] = v
    if opts.get("model") not in FAMILIES:
        raise ValidationError(f"unknown model {opts.get('model')!r}")
    if opts["alpha"] is None:
        opts["alpha"] = DEFAULT_ALPHA[opts["model"]]
    if opts["beta"] is None:
        opts["beta"] = 2.0 if opts["model"] == "dk" else 0.0
    return opts


def _model(opts) -> PulseModel:
    return PulseModel(opts["model"], float(opts["alpha"]), float(opts["beta"]))


def _seq(opts) -> SequenceSpec:
    return SequenceSpec(opts["N"], opts["phase"])


def _emit(text: str, out: Optional[Path], default_name: str) -> Optional[Path]:
    if out is None:
        env = os.environ.get(OUTPUT_DIR_ENV)
        if not env:
            sys.stdout.write(text)
            return None
        out = Path(env) / default_name
    return pio.write_text(out, text)


def _rate_block(delta: float, pulse_width: float) -> dict:
    rate = abs(delta) / pulse_width
    return {
        "pulse_width_seconds": pulse_width,
        "rate_per_second": rate,
        "display": format_khz(rate),
        "if_angular_hz": rate / (2 * math.pi),
        "units_note": UNITS_NOTE,
    }


def cmd_sweep(opts) -> int:
    model, seq = _model(opts), _seq(opts)
    if opts.get("measure_at") is not None:
        p = simulate_measurement(model.with_delta(opts["measure_at"]), seq,
                                 int(opts["shots"]), opts["seed"])
        text = pio.measurements_to_csv([Measurement(seq, p)])
        _emit(text, opts.get("out"), f"measure_{model.family}_N{seq.n_pulses}_{seq.phase_mode.value}.csv")
        return EXIT_OK
    lo, hi = default_range(model.family)
    rng = (opts["delta_min"] if opts["delta_min"] is not None else lo,
           opts["delta_max"] if opts["delta_max"] is not None else hi)
    prof = sweep(model, seq, rng, int(opts["points"]), provenance=opts["provenance"],
                 workers=int(opts["workers"]))
    stem = f"sweep_{model.family}_N{seq.n_pulses}_{seq.phase_mode.value}"
    if opts["format"] == "json":
        _emit(pio.profile_to_json(prof, __version__), opts.get("out"), stem + ".json")
    else:
        _emit(pio.profile_to_csv(prof), opts.get("out"), stem + ".csv")
    return EXIT_OK


def _hwhm_doc(model, seq, pulse_width=None, delta_max=None) -> dict:
    rep = hwhm(model, seq, delta_max=delta_max)
    doc = {
        "hwhm_dimensionless": rep.hwhm_dimensionless,
        "feature_kind": rep.feature_kind.value,
        "formula_value": rep.formula_value,
        "relative_deviation": rep.relative_deviation,
    }
    if pulse_width is not None:
        doc["physical"] = _rate_block(rep.hwhm_dimensionless, pulse_width)
        if rep.formula_value is not None:
            doc["formula_physical"] = _rate_block(rep.formula_value, pulse_width)
    return doc


def cmd_hwhm(opts) -> int:
    model, seq = _model(opts), _seq(opts)
    doc = {"schema": pio.SCHEMA_VERSION, "tool_version": __version__,
           "model": model.descriptor(),
           "sequence": {"N": seq.n_pulses, "phase_mode": seq.phase_mode.value}}
    doc.update(_hwhm_doc(model, seq, opts["pulse_width_seconds"], opts["delta_max"]))
    _emit(pio.dumps(doc), opts.get("out"), f"hwhm_{model.family}_N{seq.n_pulses}_{seq.phase_mode.value}.json")
    return EXIT_OK


def cmd_estimate(opts) -> int:
    model = _model(opts)
    try:
        text = Path(opts["measurements"]).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_INPUT, "InputError", f"cannot read measurements: {exc}") from exc
    ms = pio.measurements_from_csv(text, model)
    lo = opts["delta_min"] if opts["delta_min"] is not None else DEFAULT_RANGE[0]
    hi = opts["delta_max"] if opts["delta_max"] is not None else DEFAULT_RANGE[1]
    est = estimate(ms, (lo, hi))
    doc = {
        "schema": pio.SCHEMA_VERSION,
        "tool_version": __version__,
        "model": model.descriptor(),
        "records": len(ms.records),
        "delta_hat": est.delta_hat,
        "abs_delta_hat": est.abs_delta,
        "residual": est.residual,
        "candidates": [{"delta": d, "residual": r} for d, r in est.candidates],
        "search_range": list(est.search_range),
        "ambiguous": est.ambiguous,
        "sign_ambiguous": est.sign_ambiguous,
    }
    if opts["pulse_width_seconds"] is not None:
        doc["physical"] = _rate_block(est.delta_hat, float(opts["pulse_width_seconds"]))
    _emit(pio.dumps(doc), opts.get("out"), "estimate.json")
    return EXIT_OK


def cmd_verify(opts) -> int:
    report = run_checks(opts.get("only"), opts.get("ode_tol"))
    report.update({"schema": pio.SCHEMA_VERSION, "tool_version": __version__})
    _emit(pio.dumps(report), opts.get("out"), "verify.json")
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def _figure_cases(fid: str):
    """(model, seq, with_approx) triples of a figure recipe."""
    rz = PulseModel("rz", 1.0)
    modes = ("same", "alternating")
    if fid in ("rz-even", "rz-odd"):
        ns = (2, 4, 8, 16) if fid == "rz-even" else (3, 5, 9, 15)
        cases = [(rz, SequenceSpec(1), False)]
        cases += [(rz, SequenceSpec(n, m), False) for n in ns for m in modes]
        return cases
    if fid == "rz-approx":
        return [(rz, SequenceSpec(n, m), True) for n in (8, 9) for m in modes]
    if fid == "rabi-rz":
        return [(rz, SequenceSpec(10, "alternating"), False),
                (PulseModel("rabi", math.pi), SequenceSpec(10, "alternating"), False)]
    if fid == "dk":
        dk = PulseModel("dk", 2.0, 2.0)
        cases = [(dk, SequenceSpec(1), False)]
        cases += [(dk, SequenceSpec(n, m), True) for n in (2, 3, 8, 9) for m in modes]
        return cases
    raise ValidationError(f"unknown figure id {fid!r}")


def figure_document(fid: str, n_points: int = DEFAULT_POINTS, pulse_width=None) -> dict:
    curves = []
    for model, seq, with_approx in _figure_cases(fid):
        prof = sweep(model, seq, None, n_points)
        entry = {
            "model": model.descriptor(),
            "N": seq.n_pulses,
            "phase_mode": seq.phase_mode.value,
            "p_at_zero": prof.at_zero(),
            "delta": prof.delta.tolist(),
            "probability": prof.probability.tolist(),
        }
        if seq.n_pulses > 1:
            try:
                entry["hwhm"] = _hwhm_doc(model, seq, pulse_width)
            except FeatureNotResolved as exc:
                entry["hwhm"] = {"unresolved": str(exc)}
        if with_approx:
            try:
                entry["approximation"] = np.asarray(approx_profile(model, seq, prof.delta)).tolist()
            except UnsupportedCase as exc:
                entry["approximation_unavailable"] = str(exc)
        curves.append(entry)
    return {"schema": pio.SCHEMA_VERSION, "tool_version": __version__, "figure": fid,
            "description": FIGURES[fid], "curves": curves}


def cmd_figure(opts) -> int:
    doc = figure_document(opts["figure_id"], int(opts["points"]), opts["pulse_width_seconds"])
    _emit(pio.dumps(doc), opts.get("out"), f"figure_{opts['figure_id']}.json")
    return EXIT_OK


COMMANDS = {"sweep": cmd_sweep, "hwhm": cmd_hwhm, "estimate": cmd_estimate,
            "verify": cmd_verify, "figure": cmd_figure}


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    if argv is not None:
        argv = [str(a) for a in argv]
    args = build_parser().parse_args(argv)
    try:
        opts = resolve(args)
        return COMMANDS[args.command](opts)
    except CliError as exc:
        return _fail(exc.code, exc.kind, str(exc))
    except NoFit as exc:
        return _fail(EXIT_NOFIT, type(exc).__name__, str(exc))
    except (ValidationError, UnsupportedCase, ValueError, TypeError) as exc:
        return _fail(EXIT_INPUT, type(exc).__name__, str(exc))
    except PulseSenseError as exc:
        return _fail(EXIT_COMPUTE, type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from pulsesense import io as pio
from pulsesense.cli import OUTPUT_DIR_ENV, main
from pulsesense.estimator import Measurement
from pulsesense.profiles import sweep
from pulsesense.su2 import SequenceSpec

from conftest import DK, RZ


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestSerialization:
    def test_fmt_round_trips(self):
        for x in (0.1, 1 / 3, math.pi * 1e-300, -2.5e17, 5e-324, 0.0):
            assert float(pio.fmt(x)) == x

    @pytest.mark.parametrize("model,seq", [(RZ, SequenceSpec(8, "alternating")), (DK, SequenceSpec(3))])
    def test_csv_round_trip(self, model, seq):
        prof = sweep(model, seq, n_points=301)
        back = pio.profile_from_csv(pio.profile_to_csv(prof))
        assert np.array_equal(back.delta, prof.delta)
        assert np.array_equal(back.probability, prof.probability)
        assert back.model == model and back.seq == seq

    def test_json_round_trip(self):
        prof = sweep(DK, SequenceSpec(9, "alternating"), n_points=101)
        text = pio.profile_to_json(prof, "x")
        doc = json.loads(text)
        assert doc["schema"] == 1 and doc["provenance"] == "closed_form"
        assert doc["model"] == {"family": "dk", "alpha": 2.0, "beta": 2.0}
        back = pio.profile_from_json(text)
        assert np.array_equal(back.probability, prof.probability)

    def test_csv_header(self):
        text = pio.profile_to_csv(sweep(RZ, SequenceSpec(2), n_points=51))
        assert text.splitlines()[0] == "delta,probability,N,phase_mode,model"

    def test_measurements(self):
        recs = [Measurement(SequenceSpec(4, "alternating"), 0.25, 2.0), Measurement(SequenceSpec(9), 0.9)]
        ms = pio.measurements_from_csv(pio.measurements_to_csv(recs), RZ)
        assert ms.records == tuple(recs)

    def test_measurements_weight_optional(self):
        ms = pio.measurements_from_csv("N,phase_mode,probability\n4,same,0.5\n", RZ)
        assert ms.records[0].weight == 1.0

    @pytest.mark.parametrize("text", [
        "", "N,phase_mode,probability\n", "a,b,c\n1,same,0.5\n", "N,phase_mode,probability\n4,same\n",
        "N,phase_mode,probability\nfour,same,0.5\n", "N,phase_mode,probability\n4,same,1.5\n",
    ])
    def test_measurements_invalid(self, text):
        with pytest.raises(ValueError):
            pio.measurements_from_csv(text, RZ)


class TestSweepCommand:
    def test_rz_alternating_csv(self, capsys):
        code, out, _ = run(["sweep", "--model", "rz", "--alpha", 1, "--N", 8, "--phase", "alternating"], capsys)
        lines = out.splitlines()
        assert code == 0 and len(lines) == 802
        zero = [l for l in lines[1:] if l.split(",")[0] == "0"]
        assert len(zero) == 1 and float(zero[0].split(",")[1]) == 0.0

    def test_dk_single(self, capsys):
        code, out, _ = run(["sweep", "--model", "dk", "--alpha", 2, "--beta", 2, "--N", 1], capsys)
        prof = pio.profile_from_csv(out)
        assert code == 0 and prof.at_zero() == pytest.approx(0.9926, abs=1e-4)

    def test_json_format(self, capsys):
        code, out, _ = run(["sweep", "--N", 3, "--format", "json", "--points", 51], capsys)
        doc = json.loads(out)
        assert code == 0 and len(doc["profile"]) == 51 and "tool_version" in doc

    def test_byte_determinism(self, tmp_path):
        args = ["sweep", "--model", "dk", "--N", 9, "--phase", "alternating", "--format", "json"]
        main(args + ["--out", str(tmp_path / "a.json")])
        main(args + ["--out", str(tmp_path / "b.json")])
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        m = ["sweep", "--N", 9, "--measure-at", 0.03, "--shots", 1000, "--seed", 5]
        main(m + ["--out", str(tmp_path / "m1.csv")])
        main(m + ["--out", str(tmp_path / "m2.csv")])
        assert (tmp_path / "m1.csv").read_bytes() == (tmp_path / "m2.csv").read_bytes()

    def test_output_dir_env(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
        code, out, _ = run(["sweep", "--N", 2, "--points", 51], capsys)
        assert code == 0 and out == ""
        assert (tmp_path / "sweep_rz_N2_same.csv").exists()

    def test_config_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"model": "dk", "N": 9, "points": 51, "phase": "alternating"}))
        code, out, _ = run(["sweep", "--config", cfg, "--N", 8], capsys)
        prof = pio.profile_from_csv(out)
        assert code == 0
        assert prof.model.family == "dk" and prof.seq == SequenceSpec(8, "alternating")
        assert len(prof.delta) == 51

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1, 2]")
        code, _, err = run(["sweep", "--config", cfg], capsys)
        assert code == 2 and json.loads(err)["error"] == "ConfigError"

    def test_validation_exit(self, capsys):
        code, _, err = run(["sweep", "--alpha", -1], capsys)
        assert code == 2
        assert json.loads(err) == {"error": "ValidationError", "message": "alpha must be positive", "exit_code": 2}

    def test_argparse_exit(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["sweep", "--model", "gauss"])
        assert exc.value.code == 2

    def test_degenerate_exit(self, capsys):
        # rz alpha=2 at delta=1 is the pure phase gate a = i
        code, _, err = run(["sweep", "--alpha", 2, "--N", 4, "--phase", "alternating",
                            "--delta-min", -1, "--delta-max", 1, "--points", 51], capsys)
        assert code == 3 and json.loads(err)["error"] == "DegenerateSequence"


class TestHwhmCommand:
    def test_report(self, capsys):
        code, out, _ = run(["hwhm", "--N", 10, "--phase", "alternating", "--pulse-width-seconds", 1e-5], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["feature_kind"] == "dip"
        assert doc["formula_physical"]["display"] == "4.5 kHz"
        assert doc["physical"]["rate_per_second"] == pytest.approx(doc["hwhm_dimensionless"] / 1e-5)
        assert "if_angular_hz" in doc["physical"]

    def test_unresolved_exit(self, capsys):
        code, _, err = run(["hwhm", "--N", 2], capsys)
        assert code == 3 and json.loads(err)["error"] == "FeatureNotResolved"


class TestEstimateCommand:
    def _measure(self, tmp_path, delta, ns=(4, 8, 9)):
        rows = []
        for n in ns:
            path = tmp_path / f"m{n}.csv"
            main(["sweep", "--N", n, "--phase", "alternating", "--measure-at", delta, "--out", str(path)])
            rows.append(path.read_text().splitlines()[1])
        path = tmp_path / "all.csv"
        path.write_text("N,phase_mode,probability,weight\n" + "\n".join(rows) + "\n")
        return path

    def test_round_trip(self, tmp_path, capsys):
        path = self._measure(tmp_path, 0.03)
        code, out, _ = run(["estimate", path, "--model", "rz", "--pulse-width-seconds", 1e-5], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["abs_delta_hat"] == pytest.approx(0.03, abs=1e-4)
        assert doc["sign_ambiguous"] and not doc["ambiguous"]
        assert doc["physical"]["display"] == "3.0 kHz"
        assert len(doc["candidates"]) >= 1

    def test_display_example(self, tmp_path, capsys):
        path = self._measure(tmp_path, 0.045)
        code, out, _ = run(["estimate", path, "--pulse-width-seconds", 1e-5], capsys)
        assert code == 0 and json.loads(out)["physical"]["display"] == "4.5 kHz"

    def test_empty_file(self, tmp_path, capsys):
        path = tmp_path / "empty.csv"
        path.write_text("")
        code, _, err = run(["estimate", path], capsys)
        assert code == 2 and "empty" in json.loads(err)["message"]

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run(["estimate", tmp_path / "nope.csv"], capsys)
        assert code == 2

    def test_no_fit(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("N,phase_mode,probability\n9,alternating,0\n9,alternating,1\n8,alternating,1\n")
        code, _, err = run(["estimate", path], capsys)
        assert code == 4 and json.loads(err)["error"] == "NoFit"


class TestVerifyCommand:
    def test_default_passes(self, capsys):
        code, out, _ = run(["verify"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["passed"]
        ode = [c for c in doc["checks"] if c["group"] == "ode"]
        assert ode and max(c["max_deviation"] for c in ode) < 1e-8

    def test_only_su2(self, capsys):
        code, out, _ = run(["verify", "--only", "su2"], capsys)
        doc = json.loads(out)
        assert code == 0 and {c["group"] for c in doc["checks"]} == {"su2"}

    def test_loose_ode_tolerance_fails(self, capsys):
        code, out, _ = run(["verify", "--only", "ode", "--ode-tol", 1e-3], capsys)
        doc = json.loads(out)
        assert code == 1 and not doc["passed"]
        assert any(not c["passed"] for c in doc["checks"])


class TestFigureCommand:
    @pytest.mark.parametrize("fid", ["rz-even", "rz-odd", "rz-approx", "rabi-rz", "dk"])
    def test_recipe_runs_quickly(self, fid, tmp_path, capsys):
        start = time.perf_counter()
        code, _, _ = run(["figure", "--id", fid, "--out", tmp_path / "f.json"], capsys)
        assert code == 0 and time.perf_counter() - start < 30
        doc = json.loads((tmp_path / "f.json").read_text())
        assert doc["figure"] == fid and doc["curves"]

    def test_rz_even_contents(self, tmp_path, capsys):
        run(["figure", "--id", "rz-even", "--out", tmp_path / "f.json"], capsys)
        doc = json.loads((tmp_path / "f.json").read_text())
        keys = {(c["N"], c["phase_mode"]) for c in doc["curves"]}
        assert keys == {(1, "same")} | {(n, m) for n in (2, 4, 8, 16) for m in ("same", "alternating")}


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "pulsesense.cli", "--version"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.startswith("pulsesense ")

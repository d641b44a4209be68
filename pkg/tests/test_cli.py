import json

import numpy as np
import pytest

from frilab.cli import crb_rows, main
from frilab.design import periodic_spectrum, top_n_kernels
from frilab.fisher import sampled_crb
from frilab.presets import get_preset
from frilab.sampling import NoiseSpec, SamplingScheme
from frilab.signal_model import FourierPulse, PulseStreamTheta


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCrb:
    def test_flat401(self, capsys):
        code, out, _ = _run(capsys, "crb", "--preset", "flat401", "--N", "401")
        assert code == 0
        header, row = out.strip().splitlines()
        assert header == "N,crb_sampled,crb_continuous,condition_number,ill_conditioned"
        fields = row.split(",")
        assert fields[0] == "401"
        assert float(fields[1]) == pytest.approx(4e-10, rel=1e-12)

    def test_matches_library(self, capsys):
        code, out, _ = _run(capsys, "crb", "--preset", "lorentzian41", "--N", "9", "21", "--format", "json")
        rows = json.loads(out)
        cfg = get_preset("lorentzian41")
        theta = PulseStreamTheta.from_dict(cfg["theta"])
        pulse = FourierPulse.from_dict(cfg["pulse"])
        for r in rows:
            ref = sampled_crb(theta, pulse, SamplingScheme.contiguous(r["N"]), NoiseSpec(1e-5))
            assert r["crb_sampled"] == ref.mse_bound

    def test_config_file_and_out(self, capsys, tmp_path):
        cfg = {
            "pulse": {"generator": "flat", "bandwidth": 20},
            "theta": {"model": "periodic", "amplitudes": [1.0], "delays": [0.3]},
            "noise": {"sigma_c": 1e-3},
            "N_grid": [5, 41],
        }
        path = tmp_path / "bound.json"
        path.write_text(json.dumps(cfg))
        code, out, _ = _run(capsys, "crb", "--config", str(path), "--out", str(tmp_path / "o"))
        assert code == 0
        assert (tmp_path / "o" / "crb.csv").read_bytes().decode() == out
        cols, rows = crb_rows(cfg)
        assert rows[-1]["crb_sampled"] == pytest.approx(2e-6, rel=1e-9)

    def test_unidentifiable_exit_3(self, capsys):
        code, _, err = _run(capsys, "crb", "--preset", "flat41", "--N", "1")
        assert code == 3
        payload = json.loads(err)
        assert payload["error"] == "UnidentifiableError" and "null_basis" in payload

    def test_missing_config_exit_2(self, capsys, tmp_path):
        code, _, err = _run(capsys, "crb", "--config", str(tmp_path / "none.json"))
        assert code == 2 and json.loads(err)["error"]

    def test_both_sources(self, capsys):
        code, _, _ = _run(capsys, "crb", "--preset", "flat41", "--config", "x.json")
        assert code == 2

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["crb", "--format", "xml"])
        assert exc.value.code == 2
        assert json.loads(capsys.readouterr().err)["error"] == "UsageError"


class TestDesign:
    def test_preset_pulse(self, capsys):
        code, out, _ = _run(capsys, "design", "--preset", "flat41", "--budget", "5")
        assert code == 0
        plan = json.loads(out)
        assert plan["indices"] == [0, 1, -1, 2, -2]
        ref = top_n_kernels(periodic_spectrum(FourierPulse.flat(20), 2, 1.0), 5, 1e-5)
        assert plan["shrinkage"] == ref.shrinkage.tolist()

    def test_pulse_file(self, capsys, tmp_path):
        path = tmp_path / "pulse.json"
        path.write_text(json.dumps({"coeffs": [[0, 2.0, 0.0], [1, 1.0, 0.0], [-1, 1.0, 0.0]]}))
        code, out, _ = _run(capsys, "design", "--pulse", str(path), "--budget", "1", "--sigma-c", "1", "--L", "1")
        plan = json.loads(out)
        assert plan["indices"] == [0] and plan["shrinkage"] == [0.8]

    def test_needs_pulse(self, capsys):
        assert _run(capsys, "design", "--budget", "3")[0] == 2


class TestEstimate:
    def test_noiseless_recovery(self, capsys, tmp_path):
        cfg = {
            "pulse": {"generator": "flat", "bandwidth": 20},
            "theta": {"model": "periodic", "amplitudes": [0.3204, 0.6063], "delays": [0.6678, 0.9863]},
            "N": 9,
        }
        path = tmp_path / "est.json"
        path.write_text(json.dumps(cfg))
        code, out, _ = _run(capsys, "estimate", "--config", str(path))
        rep = json.loads(out)
        assert code == 0
        assert np.allclose(rep["theta_hat"]["delays"], [0.6678, 0.9863], atol=1e-8)
        assert rep["signal_mse"] < 1e-14

    def test_preset_seeded(self, capsys):
        a = _run(capsys, "estimate", "--preset", "flat41", "--N", "21", "--seed", "4")[1]
        b = _run(capsys, "estimate", "--preset", "flat41", "--N", "21", "--seed", "4")[1]
        assert a == b

    def test_csv(self, capsys):
        code, out, _ = _run(capsys, "estimate", "--preset", "flat41", "--N", "21", "--format", "csv")
        assert out.splitlines()[0] == "delay,amplitude" and len(out.splitlines()) == 3

    def test_spectral_null_exit_3(self, capsys):
        code, _, err = _run(capsys, "estimate", "--preset", "rect401", "--N", "51")
        assert code == 3
        assert abs(json.loads(err)["index"]) == 25


class TestExperimentAndPresets:
    def test_experiment(self, capsys, tmp_path):
        code, out, _ = _run(
            capsys, "experiment", "--preset", "flat41", "--trials", "3", "--seed", "2",
            "--out", str(tmp_path), "--svg", "--threads", "2",
        )
        assert code == 0
        paths = json.loads(out)
        assert set(paths) >= {"results", "manifest", "svg", "config_hash"}
        manifest = json.loads(open(paths["manifest"]).read())
        assert manifest["seed"] == 2

    def test_presets_list(self, capsys):
        code, out, _ = _run(capsys, "presets", "list", "--format", "json")
        assert code == 0 and "flat401" in json.loads(out)
        code, out, _ = _run(capsys, "presets", "list")
        assert out.startswith("flat401\t")

import csv
import json
import math

import pytest

from flaglyap.cli import main
from flaglyap.experiment import bundled_config_names, load_bundled_config


def write_config(path, cfg):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg, fh)
    return str(path)


@pytest.fixture
def diagonal_config(tmp_path):
    cfg = {
        "version": 1,
        "base": {"cycles": [[0]]},
        "ambient": {"d": 3},
        "generators": {"matrices": [[[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0 / 3.0]]]},
        "weights": [[1, 0]],
        "gauge": {"seed": 1, "scale": 0.5},
    }
    return write_config(tmp_path / "diag.json", cfg)


class TestSpectrumCommand:
    def test_diagonal_spectrum_csv(self, tmp_path, diagonal_config):
        out = tmp_path / "out"
        assert main(["spectrum", "--config", diagonal_config, "--out", str(out)]) == 0
        with open(out / "spectrum.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:4] == ["x", "h1", "h2", "h3"]
        values = [float(v) for v in rows[1][1:4]]
        assert values == pytest.approx([math.log(3.0), 0.0, -math.log(3.0)], abs=1e-10)
        payload = json.loads((out / "spectrum.json").read_text())
        assert payload["config"]["version"] == 1

    def test_semigroup_sampled_spectrum_gap_column(self, tmp_path):
        cfg = load_bundled_config("cone_positive.json")
        cfg.pop("_bundled_name")
        path = write_config(tmp_path / "cone.json", cfg)
        out = tmp_path / "out"
        assert main(["spectrum", "--config", path, "--out", str(out)]) == 0
        with open(out / "spectrum.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        gap1_col = rows[0].index("gap1")
        assert all(float(r[gap1_col]) > 1e-8 for r in rows[1:])


class TestExitCodes:
    def test_malformed_permutation_exits_2(self, tmp_path, capsys):
        cfg = {
            "version": 1,
            "base": {"cycles": [[0, 1], [1]]},
            "ambient": {"d": 2},
            "generators": {"matrices": [[[1, 0], [0, 1]]] * 3},
        }
        path = write_config(tmp_path / "bad.json", cfg)
        assert main(["spectrum", "--config", path, "--out", str(tmp_path)]) == 2

    def test_rotation_section_exits_3(self, tmp_path):
        cfg = {
            "version": 1,
            "base": {"cycles": [[0]]},
            "ambient": {"d": 2},
            "generators": {"matrices": [[[0.0, -1.0], [1.0, 0.0]]]},
            "solver": {"max_iter": 600},
        }
        path = write_config(tmp_path / "rot.json", cfg)
        assert main(["section", "--config", path, "--out", str(tmp_path)]) == 3

    def test_inadmissible_weight_exits_4(self, tmp_path):
        cfg = load_bundled_config("cone_positive.json")
        cfg.pop("_bundled_name")
        cfg["weights"] = [[0, 1]]  # omega_2 closed for this sample's flag type
        path = write_config(tmp_path / "bad_weight.json", cfg)
        assert main(["derivative", "--config", path, "--out", str(tmp_path)]) == 4

    def test_usage_error_exits_1(self):
        with pytest.raises(SystemExit) as err:
            main(["bogus"])
        assert err.value.code == 1

    def test_unknown_version_exits_2(self, tmp_path):
        path = write_config(tmp_path / "v9.json", {"version": 9})
        assert main(["spectrum", "--config", path, "--out", str(tmp_path)]) == 2


class TestDeterminism:
    def test_byte_identical_reports(self, tmp_path):
        cfg = load_bundled_config("cone_positive.json")
        cfg.pop("_bundled_name")
        path = write_config(tmp_path / "cone.json", cfg)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            assert main(["derivative", "--config", path, "--out", str(out)]) == 0
        assert (out1 / "derivative.json").read_bytes() == (out2 / "derivative.json").read_bytes()
        assert (out1 / "scan.csv").read_bytes() == (out2 / "scan.csv").read_bytes()


class TestVerifyCommand:
    def test_bundled_config_passes(self, tmp_path):
        code = main(["verify", "--config", _bundled_path(tmp_path, "cone_positive.json"),
                     "--out", str(tmp_path)])
        assert code == 0
        payload = json.loads((tmp_path / "verify_cone_positive.json").read_text())
        assert payload["all_passed"]
        criteria = {r["criterion"] for r in payload["results"]}
        assert {"decomposition", "section-residual", "differential-agreement", "determinism"} <= criteria

    def test_corrupted_tolerance_fails_with_criterion_id(self, tmp_path, capsys):
        cfg = load_bundled_config("cone_positive.json")
        cfg.pop("_bundled_name")
        cfg["tolerances"] = {"fd_agreement": 1e-30}
        path = write_config(tmp_path / "corrupt.json", cfg)
        code = main(["verify", "--config", path, "--out", str(tmp_path)])
        assert code == 1
        out = capsys.readouterr().out
        assert "[FAIL]" in out and "differential-agreement" in out

    def test_all_bundled_configs_exist(self):
        names = bundled_config_names()
        assert {"cone_positive.json", "totally_positive.json", "minor_positive.json",
                "symplectic.json"} <= set(names)


def _bundled_path(tmp_path, name):
    cfg = load_bundled_config(name)
    cfg.pop("_bundled_name")
    return write_config(tmp_path / name, cfg)


class TestSectionCommand:
    def test_hyperbolic_constant_cocycle_residual(self, tmp_path):
        cfg = {
            "version": 1,
            "base": {"cycles": [[0]]},
            "ambient": {"d": 2},
            "generators": {"matrices": [[[2.0, 1.0], [1.0, 1.0]]]},
        }
        path = write_config(tmp_path / "hyp.json", cfg)
        out = tmp_path / "out"
        assert main(["section", "--config", path, "--out", str(out)]) == 0
        payload = json.loads((out / "section.json").read_text())
        assert payload["residual"] <= 1e-10
        assert payload["transversal"] == [True]
        assert len(payload["frames"]) == 1

    def test_totally_positive_full_type_transversal(self, tmp_path):
        path = _bundled_path(tmp_path, "totally_positive.json")
        out = tmp_path / "out"
        assert main(["section", "--config", path, "--out", str(out)]) == 0
        payload = json.loads((out / "section.json").read_text())
        assert payload["theta"] == []
        assert all(payload["transversal"])


class TestDerivativeCommand:
    def test_zero_direction_all_zero(self, tmp_path):
        cfg = {
            "version": 1,
            "base": {"cycles": [[0, 1]]},
            "ambient": {"d": 2},
            "generators": {"matrices": [[[2.0, 1.0], [1.0, 1.0]], [[1.5, 0.5], [1.0, 1.0]]]},
            "weights": [[1]],
            "gauge": {"table": [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]},
        }
        path = write_config(tmp_path / "zero.json", cfg)
        out = tmp_path / "out"
        assert main(["derivative", "--config", path, "--out", str(out)]) == 0
        payload = json.loads((out / "derivative.json").read_text())
        row = payload["derivatives"][0]
        assert row["analytic"] == 0.0
        assert row["central_difference"] == 0.0

    def test_seed_override_changes_direction_deterministically(self, tmp_path):
        path = _bundled_path(tmp_path, "cone_positive.json")
        outs = []
        for seed in ("17", "17", "23"):
            out = tmp_path / f"s{seed}_{len(outs)}"
            assert main(["derivative", "--config", path, "--out", str(out), "--seed", seed]) == 0
            outs.append((out / "derivative.json").read_bytes())
        assert outs[0] == outs[1]
        assert outs[0] != outs[2]


class TestSemigroupCommand:
    def test_report_written(self, tmp_path):
        path = _bundled_path(tmp_path, "symplectic.json")
        out = tmp_path / "out"
        assert main(["semigroup", "--config", path, "--out", str(out)]) == 0
        payload = json.loads((out / "semigroup.json").read_text())
        assert payload["report"]["verdict"] == "all predictions hold"
        assert payload["report"]["symplectic_pairing_defect"] <= 1e-8

    def test_prediction_violation_maps_to_exit_5(self, tmp_path, monkeypatch):
        from flaglyap import PredictionViolated
        from flaglyap import experiment as exp_mod

        def boom(*args, **kwargs):
            raise PredictionViolated("forced for the exit-code contract", point=0, root=1)

        monkeypatch.setattr(exp_mod, "verify_gap_predictions", boom)
        path = _bundled_path(tmp_path, "cone_positive.json")
        assert main(["semigroup", "--config", path, "--out", str(tmp_path)]) == 5

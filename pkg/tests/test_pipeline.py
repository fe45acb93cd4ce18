import csv
import json

import numpy as np
import pytest

from swextrap.errors import Degenerate, TooLarge
from swextrap.extrapolation import error_budget
from swextrap.pipeline import ExperimentConfig, run_config_file, run_experiment, zero_temperature_state


def config(**over):
    base = {
        "gadget": {"constructor": "three_to_two", "h": [{"random": 1}, {"random": 2}, {"random": 3}]},
        "mode": {"kind": "ground"},
        "observable": {"terms": [{"sites": [0], "pauli": "Z"}]},
        "plan": {"m": 6, "x_max_frac": 0.5},
    }
    base.update(over)
    return base


@pytest.fixture(scope="module")
def ground_report():
    return run_experiment(ExperimentConfig.from_dict(config()))


class TestGroundMode:
    def test_error_within_budget(self, ground_report):
        d = ground_report.data
        assert d["abs_error"] <= 0.05
        assert d["abs_error"] <= d["budget"]
        assert ground_report.passed

    def test_budget_consistency(self, ground_report):
        d = ground_report.data
        M_emp = 4 * max(abs(r["f_prime"]) for r in d["nodes"])
        assert d["M_emp"] == pytest.approx(M_emp)
        assert d["budget"] == pytest.approx(error_budget(d["delta"], M_emp, d["m"]))

    def test_report_shape(self, ground_report):
        d = ground_report.data
        assert len(d["nodes"]) == 6
        assert d["x_max"] == pytest.approx(d["x_star"] / 2)
        xs = [r["x_k"] for r in d["nodes"]]
        assert all(a < b for a, b in zip(xs, xs[1:]))
        for r in d["nodes"]:
            assert r["max_strength"] == pytest.approx(r["x_k"] ** -3)
        assert d["precision_bits"] > 53
        assert d["validation"]["is_gadget"]

    def test_zzz_example(self):
        cfg = config(gadget={"constructor": "three_to_two", "h": ["Z", "Z", "Z"]})
        d = run_experiment(ExperimentConfig.from_dict(cfg)).data
        assert d["abs_error"] <= 0.05
        assert d["abs_error"] <= d["budget"] + d["roundoff"]
        assert d["target_ground_dim"] == 4

    def test_strict_degeneracy(self):
        cfg = config(gadget={"constructor": "three_to_two", "h": ["Z", "Z", "Z"]},
                     mode={"kind": "ground", "degenerate": "strict"})
        with pytest.raises(Degenerate):
            run_experiment(ExperimentConfig.from_dict(cfg))


class TestGibbsMode:
    def test_error_trend(self):
        errs = []
        for m in (4, 6, 8):
            cfg = config(mode={"kind": "gibbs", "beta": 2.0}, plan={"m": m, "x_max_frac": 0.5})
            errs.append(run_experiment(ExperimentConfig.from_dict(cfg)).data["abs_error"])
        assert sum(b > a for a, b in zip(errs, errs[1:])) <= 1

    def test_extrapolation_beats_direct(self):
        cfg = config(mode={"kind": "gibbs", "beta": 2.0})
        d = run_experiment(ExperimentConfig.from_dict(cfg)).data
        assert d["abs_error"] < d["direct"]["abs_error"]


class TestObservables:
    def test_extensive_linearity(self):
        cfg = config(observable={"extensive": "Z"}, mode={"kind": "gibbs", "beta": 1.0})
        d = run_experiment(ExperimentConfig.from_dict(cfg)).data
        assert len(d["linearity"]["per_term"]) == 3
        assert d["linearity"]["deviation"] <= 1e-10
        assert d["pass"]["linearity"]

    def test_ancilla_observable_rejected(self):
        cfg = config(observable={"terms": [{"sites": [3], "pauli": "Z"}]})
        with pytest.raises(ValueError):
            run_experiment(ExperimentConfig.from_dict(cfg))

    def test_word_length_checked(self):
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict(config(observable={"terms": [{"sites": [0, 1], "pauli": "Z"}]}))


class TestNoiseAndDeterminism:
    def test_noise_bounded(self):
        cfg = config(noise={"kind": "uniform", "delta": 1e-3, "seed": 4})
        d = run_experiment(ExperimentConfig.from_dict(cfg)).data
        assert all(abs(r["noise"]) <= 1e-3 for r in d["nodes"])
        assert any(r["noise"] != 0 for r in d["nodes"])
        assert d["pass"]["noise_bounded"]
        assert d["abs_error"] <= d["budget"]

    def test_byte_identical(self):
        cfg = config(noise={"kind": "uniform", "delta": 1e-4, "seed": 9}, mode={"kind": "gibbs", "beta": 1.5})
        a = run_experiment(ExperimentConfig.from_dict(cfg)).to_json(timing=False)
        b = run_experiment(ExperimentConfig.from_dict(cfg)).to_json(timing=False)
        assert a == b
        assert "timing" not in json.loads(a)


class TestPlanning:
    def test_clamp(self):
        cfg = config(plan={"m": 4, "x_max": 1.0})
        with pytest.warns(UserWarning):
            d = run_experiment(ExperimentConfig.from_dict(cfg)).data
        assert d["clamped"] and d["x_max"] == d["x_star"]

    def test_epsilon_plan(self):
        probe = run_experiment(ExperimentConfig.from_dict(config(plan={"m": 2, "x_max_frac": 0.5}))).data
        R = probe["x_star"]
        cfg = config(plan={"epsilon": 0.05, "M": 1.0, "R": R})
        d = run_experiment(ExperimentConfig.from_dict(cfg)).data
        assert d["x_max"] == pytest.approx(R / 2)
        assert d["delta"] > 0
        assert d["abs_error"] <= 0.05

    def test_missing_plan(self):
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict(config(plan={"x_max": 1e-7}))

    def test_too_large(self):
        cfg = config(gadget={"constructor": "three_to_two_chain", "n_eff": 8, "h": ["Z", "Z", "Z"]})
        with pytest.raises(TooLarge):
            run_experiment(ExperimentConfig.from_dict(cfg))


class TestFiles:
    def test_json_and_csv(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(config(plan={"m": 4, "x_max_frac": 0.5})))
        out, csv_path = tmp_path / "r.json", tmp_path / "r.csv"
        rep = run_config_file(cfg_path, out, csv_path)
        assert json.loads(out.read_text())["m"] == 4
        rows = list(csv.reader(csv_path.open()))
        assert rows[0] == ["x_k", "f_prime", "noise", "max_strength"]
        assert len(rows) == 1 + 4 + 8
        assert rows[5][0] == "extrapolated"
        assert float(rows[5][1]) == rep.data["extrapolated"]


def test_zero_temperature_state_average():
    rho, k = zero_temperature_state(np.diag([0.0, 0.0, 1.0]))
    assert k == 2
    np.testing.assert_allclose(rho, np.diag([0.5, 0.5, 0.0]))

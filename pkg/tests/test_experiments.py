import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anneal1d.experiments import (
    CLASSICAL_BOUNDARIES,
    ConfigError,
    ExperimentConfig,
    QUANTUM_BOUNDARIES,
    fit_power_law,
    load_config,
    run_experiment,
)
from anneal1d.fitting import InsufficientPointsError


class TestFitPowerLaw:
    def test_exact_power_law(self):
        T = np.geomspace(10.0, 1e4, 10)
        fit = fit_power_law(zip(T, 7.0 * T**-2.0), mode="all_points")
        assert fit.exponent == pytest.approx(-2.0, abs=1e-6)
        assert fit.residual == pytest.approx(1.0, abs=1e-9)

    def test_oscillatory_fit_weak_ripple(self):
        # ripple too weak to create local maxima: crest mode falls back
        # to all points and still lands on the envelope slope
        T = np.geomspace(10.0, 1e3, 40)
        R = T**-2.0 * (1.0 + 0.3 * np.sin(5.0 * np.log(T)))
        fit = fit_power_law(zip(T, R), mode="crests")
        assert fit.exponent == pytest.approx(-2.0, abs=0.05)

    def test_oscillatory_crest_fit(self):
        # strong ripple: genuine crests; compare against an independent
        # local-max scan plus polyfit oracle
        T = np.geomspace(10.0, 1e3, 60)
        R = T**-2.0 * (1.0 + 0.5 * np.sin(8.0 * np.log(T)))
        fit = fit_power_law(zip(T, R), mode="crests")
        idx = [i for i in range(1, len(R) - 1) if R[i] >= R[i - 1] and R[i] >= R[i + 1]]
        assert len(idx) >= 3
        slope = np.polyfit(np.log10(T[idx]), np.log10(R[idx]), 1)[0]
        assert fit.exponent == pytest.approx(slope, abs=1e-12)
        assert fit.exponent == pytest.approx(-2.0, abs=0.05)

    def test_constant_samples(self):
        T = np.geomspace(1.0, 100.0, 8)
        fit = fit_power_law(zip(T, np.full(8, 3.0)), mode="all_points")
        assert fit.exponent == pytest.approx(0.0, abs=1e-12)

    def test_crest_fallback_on_monotone_data(self):
        T = np.geomspace(10.0, 1e3, 8)
        fit = fit_power_law(zip(T, 5.0 * T**-1.5), mode="crests")
        assert fit.exponent == pytest.approx(-1.5, abs=1e-9)

    def test_too_few_points(self):
        with pytest.raises(InsufficientPointsError):
            fit_power_law([(1.0, 1.0), (2.0, 0.5)])

    def test_nonpositive_residuals_rejected(self):
        with pytest.raises(ValueError):
            fit_power_law([(1.0, 1.0), (2.0, -0.5), (3.0, 0.2)])

    @given(st.floats(1e-6, 1e6))
    @settings(max_examples=30, deadline=None)
    def test_scale_invariance(self, c):
        T = np.geomspace(5.0, 500.0, 7)
        R = 0.2 * T**-1.3
        base = fit_power_law(zip(T, R), mode="all_points").exponent
        scaled = fit_power_law(zip(T, c * R), mode="all_points").exponent
        assert scaled == pytest.approx(base, abs=1e-9)


class TestBoundaryConstants:
    def test_quantum_masses(self):
        assert [QUANTUM_BOUNDARIES[k][0] for k in "abcd"] == [1e0, 1e3, 1e5, 1e6]

    def test_classical_betas(self):
        expected = [10.0**e for e in (0.29, 1.18, 1.97, 2.35)]
        assert [CLASSICAL_BOUNDARIES[k][0] for k in "abcd"] == pytest.approx(expected)

    def test_pairing(self):
        # boundary energies agree pairwise; row c runs to 1.39%, the rest
        # sit below 1%
        for k, tol in zip("abcd", (0.01, 0.01, 0.015, 0.01)):
            e0 = QUANTUM_BOUNDARIES[k][1]
            u = CLASSICAL_BOUNDARIES[k][1]
            assert abs(e0 - u) / u < tol


class TestExperimentConfig:
    def test_quantum_needs_t_list(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(kind="quantum", stage="1", schedule="linear")

    def test_bad_stage(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(kind="quantum", stage="A", schedule="linear", T_list=(10.0,))

    def test_bad_schedule(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(kind="classical", stage="A", schedule="poly9", T_list=(10.0,))

    def test_t_list_must_increase(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(kind="quantum", stage="1", schedule="linear",
                             T_list=(100.0, 50.0))

    def test_digest_stable(self):
        a = ExperimentConfig(kind="classical", stage="A", schedule="linear",
                             T_list=(10.0, 20.0), out_dir="x")
        b = ExperimentConfig(kind="classical", stage="A", schedule="linear",
                             T_list=(10.0, 20.0), out_dir="y")
        assert a.digest() == b.digest()  # out_dir excluded from identity


class TestRunExperimentClassical:
    CFG = dict(kind="classical", stage="A", schedule="linear",
               T_list=(10.0, 20.0, 40.0), n_particles=4000, step_size=1.0, seed=9)

    def test_curve_shape_and_fit(self, tmp_path):
        cfg = ExperimentConfig(out_dir=str(tmp_path / "run"), **self.CFG)
        curve = run_experiment(cfg)
        assert len(curve.T) == 3
        assert curve.fit is not None
        assert (tmp_path / "run" / "summary.csv").exists()
        assert (tmp_path / "run" / "meta.json").exists()
        assert (tmp_path / "run" / "trace" / "T10.csv").exists()

    def test_reruns_byte_identical(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            run_experiment(ExperimentConfig(out_dir=str(out), **self.CFG))
        assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()
        assert (out1 / "meta.json").read_bytes() == (out2 / "meta.json").read_bytes()

    def test_single_point_has_no_fit(self, tmp_path):
        cfg = ExperimentConfig(
            kind="classical", stage="A", schedule="linear", T_list=(10.0,),
            n_particles=2000, step_size=1.0, out_dir=str(tmp_path / "one"),
        )
        curve = run_experiment(cfg)
        assert curve.fit is None
        meta = json.loads((tmp_path / "one" / "meta.json").read_text())
        assert meta["fit"] == {"note": "insufficient points"}

    def test_metadata_contents(self, tmp_path):
        cfg = ExperimentConfig(out_dir=str(tmp_path / "m"), **self.CFG)
        run_experiment(cfg)
        meta = json.loads((tmp_path / "m" / "meta.json").read_text())
        assert meta["config_hash"] == cfg.digest()
        assert meta["seed"] == 9
        assert meta["version"]
        header = (tmp_path / "m" / "summary.csv").read_text().splitlines()[:3]
        assert header[0].startswith("# config_hash=")


class TestConfigFile:
    GOOD = """
[potential]
k = 1.0
h0 = 0.2
w0 = 0.2

[run]
kind = classical
stage = A
schedule = linear
seed = 4

[classical]
n_particles = 1000
step_size = 1.0
t_list = 10,20,40
"""

    def test_roundtrip(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(self.GOOD)
        cfg = load_config(path)
        assert cfg.kind == "classical"
        assert cfg.stage == "A"
        assert cfg.T_list == (10.0, 20.0, 40.0)
        assert cfg.seed == 4

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(self.GOOD + "\nstep_sizes = 2.0\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(self.GOOD + "\n[annealing]\nfoo = 1\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_bad_value_rejected(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(self.GOOD.replace("seed = 4", "seed = four"))
        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent/exp.cfg")

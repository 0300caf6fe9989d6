import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from contamkde.bench import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentConfig,
    build_model,
    derive_seed,
    fit_rate_exponent,
    monte_carlo_risk,
    rate_sweep,
    theory_rate,
    write_report_csv,
)
from contamkde.estimators import kde_at_zero
from contamkde.kernels import eval_kernel, make_order_kernel

PHI0 = 1.0 / math.sqrt(2.0 * math.pi)


class TestSeeds:
    def test_distinct(self):
        seeds = {derive_seed(0, c, r) for c in range(10) for r in range(100)}
        assert len(seeds) == 1000

    def test_stable(self):
        assert derive_seed(7, 3, 11) == derive_seed(7, 3, 11)
        assert 0 <= derive_seed(-1, 0, 0) < 2**64

    def test_master_matters(self):
        assert derive_seed(0, 0, 0) != derive_seed(1, 0, 0)


class TestMonteCarloRisk:
    def test_perfect_estimator(self):
        cfg = ExperimentConfig(replications=50)
        risk = monte_carlo_risk(cfg, (100, 0.0), estimator=lambda x: PHI0)
        assert risk.mse == pytest.approx(0.0, abs=1e-30)

    def test_constant_bias(self):
        cfg = ExperimentConfig(replications=50)
        risk = monte_carlo_risk(cfg, (100, 0.0), estimator=lambda x: PHI0 + 1.0)
        mse, stderr = risk
        assert mse == pytest.approx(1.0, rel=1e-14)
        assert stderr == pytest.approx(0.0, abs=1e-14)

    def test_fixed_bandwidth_matches_quadrature(self):
        k, h, n, reps = make_order_kernel(2), 0.5, 100, 10_000
        kh = lambda x: eval_kernel(k, x / h) / h
        m1, _ = integrate.quad(lambda x: kh(x) * stats.norm.pdf(x), -h, h, epsabs=1e-14)
        m2, _ = integrate.quad(lambda x: kh(x) ** 2 * stats.norm.pdf(x), -h, h, epsabs=1e-14)
        expected = (m1 - PHI0) ** 2 + (m2 - m1**2) / n
        cfg = ExperimentConfig(replications=reps, master_seed=5)
        risk = monte_carlo_risk(cfg, (n, 0.0), estimator=lambda x: kde_at_zero(x, k, h))
        assert abs(risk.mse - expected) <= 4 * risk.stderr

    def test_order_independent_of_workers(self):
        cfg = ExperimentConfig(replications=40, n_grid=(256,))
        a = monte_carlo_risk(cfg, (256, 0.0), cell_index=2)
        b = monte_carlo_risk(ExperimentConfig(replications=40, n_grid=(256,), n_jobs=2), (256, 0.0),
                             cell_index=2)
        assert (a.mse, a.stderr, a.mean_h_hat) == (b.mse, b.stderr, b.mean_h_hat)

    def test_adaptive_records_bandwidth(self):
        cfg = ExperimentConfig(estimator="lepski-standard", replications=5, n_grid=(128,))
        risk = monte_carlo_risk(cfg, (128, 0.0))
        assert 0 < risk.mean_h_hat <= 1


class TestFitRateExponent:
    def test_exact_power_law(self):
        x = np.array([10.0, 100.0, 1000.0, 1e4])
        slope, se = fit_rate_exponent(list(zip(x, x**-0.8)))
        assert slope == pytest.approx(-0.8, abs=1e-12)
        assert se == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1e-6, 1e6))
    def test_scale_invariance(self, c):
        x = np.array([512.0, 1024, 2048, 4096, 8192])
        y = np.array([0.03, 0.02, 0.008, 0.005, 0.0031])
        a = fit_rate_exponent(list(zip(x, y)))
        b = fit_rate_exponent(list(zip(x, c * y)))
        assert b[0] == pytest.approx(a[0], abs=1e-10)
        assert b[1] == pytest.approx(a[1], abs=1e-10)

    def test_noisy(self):
        rng = np.random.default_rng(0)
        x = 2.0 ** np.arange(9, 15)
        for _ in range(50):
            y = x**-0.8 * np.exp(0.01 * rng.standard_normal(x.size))
            assert abs(fit_rate_exponent(list(zip(x, y)))[0] + 0.8) <= 0.02

    def test_rejects(self):
        with pytest.raises(ValueError):
            fit_rate_exponent([(1, 1), (2, 0.5)])
        with pytest.raises(ValueError):
            fit_rate_exponent([(1, 1), (2, 0.0), (3, 0.1)])


rate_params = st.tuples(st.integers(2, 10**8), st.floats(0.0, 0.5), st.floats(0.2, 6),
                        st.floats(0.2, 6), st.floats(0.0, 5.0))


class TestTheoryRate:
    def test_no_contamination(self):
        assert theory_rate("structured", 1e4, 0.0, 2.0, 1.0, 1.0) == pytest.approx(1e4 ** -0.8)

    def test_zero_level(self):
        n, e = 1e4, 0.1
        expected = max(n**-0.8, n ** (-2 / 3) * e ** (2 / 3))
        assert theory_rate("structured", n, e, 2.0, 1.0, 0.0) == pytest.approx(expected)

    def test_arbitrary_value(self):
        assert theory_rate("arbitrary", 1e6, 1e-2, 1.0) == pytest.approx(1e-2)

    def test_arbitrary_adapt_one(self):
        n, e = 1e4, 1e-3
        expected = max((math.log(n) / n) ** (2 / 3), e)
        assert theory_rate("arbitrary_adapt_one", n, e, 1.0) == pytest.approx(expected)

    def test_adapt_both(self):
        n, e = 8192, 0.05
        expected = max((n / math.log(n)) ** -0.8, e**2)
        assert theory_rate("structured_adapt_both", n, e, 2.0, 2.0) == pytest.approx(expected)

    def test_adapt_eps_replaces_level(self):
        assert theory_rate("structured_adapt_eps", 1e6, 0.1, 1.0, 1.0) == pytest.approx(0.01)

    def test_adapt_smooth_uses_log(self):
        n = 1e4
        assert theory_rate("structured_adapt_smooth", n, 0.0, 1.0, 1.0, 1.0) == pytest.approx(
            (n / math.log(n)) ** (-2 / 3))

    def test_missing(self):
        with pytest.raises(ValueError):
            theory_rate("structured", 100, 0.1, 1.0, None, 1.0)
        with pytest.raises(ValueError):
            theory_rate("structured", 100, 0.1, 1.0, 1.0, None)
        with pytest.raises(ValueError):
            theory_rate("unknown", 100, 0.1, 1.0)
        with pytest.raises(ValueError):
            theory_rate("structured_adapt_both", 1, 0.1, 1.0, 1.0)

    @settings(max_examples=300, deadline=None)
    @given(rate_params, st.floats(1.0, 10.0), st.floats(0.0, 0.5), st.floats(0.0, 5.0))
    def test_monotone(self, params, nf, de, dm):
        n, e, b0, b1, m = params
        base = theory_rate("structured", n, e, b0, b1, m)
        assert theory_rate("structured", n, min(e + de, 0.5), b0, b1, m) >= base * (1 - 1e-12)
        assert theory_rate("structured", n, e, b0, b1, m + dm) >= base * (1 - 1e-12)
        assert theory_rate("structured", n * nf, e, b0, b1, m) <= base * (1 + 1e-12)

    def test_monotone_and_sandwich_random_draws(self):
        rng = np.random.default_rng(1)
        for _ in range(10_000):
            n = float(rng.integers(2, 10**7))
            e = float(rng.uniform(0, 0.5))
            b0, b1 = rng.uniform(0.2, 6, 2)
            m = float(rng.uniform(0, 3))
            r = theory_rate("structured", n, e, b0, b1, m)
            first = n ** (-2 * b0 / (2 * b0 + 1))
            lower = max(first, (e * min(1.0, m)) ** 2)
            upper = max(first, e**2)
            assert lower * (1 - 1e-12) <= r <= upper * (1 + 1e-12)
            assert theory_rate("structured", n, min(0.5, e * 1.5), b0, b1, m) >= r * (1 - 1e-12)
            assert theory_rate("structured", n, e, b0, b1, m * 1.5) >= r * (1 - 1e-12)
            assert theory_rate("structured", n * 2, e, b0, b1, m) <= r * (1 + 1e-12)


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.n_grid == tuple(2**k for k in range(9, 15))
        assert cfg.replications == 200

    @pytest.mark.parametrize("kw", [
        dict(n_grid=(1024, 512)),
        dict(n_grid=()),
        dict(regime="other"),
        dict(estimator="magic"),
        dict(sweep_axis="epsilon"),
        dict(sweep_axis="path", epsilon_grid=(0.1,), n_grid=(10, 20)),
        dict(epsilon=0.7),
        dict(replications=0),
        dict(target="cauchy:1"),
        dict(contamination="level"),
        dict(estimator="lepski-reverse-cons"),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            ExperimentConfig(**kw)

    def test_from_mapping(self):
        cfg = ExperimentConfig.from_mapping({"n_grid": "512, 1024 2048", "epsilon_grid": "0.1,0.2",
                                             "replications": "30", "c1": "none", "beta0": "1.5",
                                             "sweep_axis": "epsilon"})
        assert cfg.n_grid == (512, 1024, 2048) and cfg.epsilon_grid == (0.1, 0.2)
        assert cfg.c1 is None and cfg.beta0 == 1.5 and cfg.replications == 30

    def test_from_mapping_rejects(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping({"nope": "1"})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping({"replications": "many"})


class TestBuildModel:
    def test_level_spec(self):
        cfg = ExperimentConfig(contamination="level:1", epsilon=0.1, m=1.0)
        model = build_model(cfg, 100, 0.1)
        assert model.contamination(0.0) == pytest.approx(1.0, rel=1e-12)
        assert model.structured

    def test_level_exceeding_m(self):
        with pytest.raises(ValueError):
            build_model(ExperimentConfig(contamination="level:2", m=1.0), 100, 0.1)

    def test_spike_oracle(self):
        cfg = ExperimentConfig(contamination="spike:oracle", beta0=1.0)
        model = build_model(cfg, 4096, 0.08)
        x = model.contamination(np.random.default_rng(0), 1000)
        assert np.max(np.abs(x)) <= 0.08**0.5
        assert np.max(np.abs(x)) > 0.9 * 0.08**0.5

    def test_none_requires_zero(self):
        with pytest.raises(ConfigError):
            build_model(ExperimentConfig(), 100, 0.1)

    def test_laplace_target(self):
        model = build_model(ExperimentConfig(target="laplace:2"), 10, 0.0)
        assert model.target(0.0) == pytest.approx(0.25)


def _csv_text(report):
    buf = io.StringIO()
    write_report_csv(report, buf)
    return buf.getvalue()


class TestRateSweep:
    def test_single_cell(self):
        report = rate_sweep(ExperimentConfig(n_grid=(256,), replications=40))
        assert len(report.cells) == 1 and report.slope is None and report.slope_note

    def test_perfect_estimator_flagged(self):
        cfg = ExperimentConfig(contamination="point:5", n_grid=(128,), epsilon_grid=(0.1, 0.2, 0.3),
                               sweep_axis="epsilon", replications=30)
        report = rate_sweep(cfg, estimator=lambda x: PHI0)
        assert np.all(report.mses() == 0.0)
        assert report.slope is None and "nonpositive" in report.slope_note

    def test_few_replications_flagged(self):
        report = rate_sweep(ExperimentConfig(n_grid=(64, 128, 256), replications=10))
        assert report.slope is None and "replications" in report.slope_note

    def test_classical_slope(self):
        report = rate_sweep(ExperimentConfig(n_grid=(512, 1024, 2048, 4096), replications=100))
        assert abs(report.slope + 0.8) <= 0.3

    def test_csv_schema_and_file(self, tmp_path):
        out = tmp_path / "sub" / "sweep.csv"
        cfg = ExperimentConfig(estimator="lepski-standard", n_grid=(64, 128), replications=5,
                               output_path=str(out), master_seed=3)
        report = rate_sweep(cfg)
        rows = list(csv.reader(out.open()))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 3
        row = dict(zip(rows[0], rows[1]))
        assert row["estimator"] == "lepski-standard" and row["kernel_order"] == "6"
        assert float(row["c1"]) == pytest.approx(4 * make_order_kernel(6).sup_norm_bound)
        assert row["seed"] == "3"
        assert out.read_text() == _csv_text(report)

    def test_byte_identical_across_workers(self):
        base = dict(contamination="spike:0.01", epsilon=0.05, estimator="lepski-reverse", beta0=2.0,
                    n_grid=(128, 256, 512), replications=30, master_seed=11)
        a = _csv_text(rate_sweep(ExperimentConfig(**base)))
        b = _csv_text(rate_sweep(ExperimentConfig(**base)))
        c = _csv_text(rate_sweep(ExperimentConfig(n_jobs=2, **base)))
        assert a == b == c

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError):
            rate_sweep(ExperimentConfig(n_grid=(16,), replications=2, output_path=str(blocker / "a.csv")))

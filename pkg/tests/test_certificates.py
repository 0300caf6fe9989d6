import math

import numpy as np
import pytest
from scipy import integrate, stats

from contamkde.certificates import (
    ModulusSearch,
    chi_squared,
    constrained_risk_bound,
    density_difference_decompose,
    is_density_difference,
    le_cam_bound,
    modulus_of_continuity,
    modulus_search,
    risk_inequality_bound,
    support_mismatch,
    total_variation,
)
from contamkde.densities import (
    PerturbationPair,
    SmoothDensity,
    gaussian_baseline,
    pair_level,
    pair_neighborhood,
    pair_proportion,
    pair_unidentifiable,
    scaled_bump_a,
)


def normal(mu, sigma=1.0):
    return SmoothDensity(lambda x: stats.norm.pdf(x, mu, sigma), (mu - 12 * sigma, mu + 12 * sigma),
                         2.0, np.inf, f"N({mu},{sigma})", feature_scale=sigma)


def uniform(lo, hi):
    return SmoothDensity(lambda x: np.where((x >= lo) & (x <= hi), 1.0 / (hi - lo), 0.0), (lo, hi),
                         0.5, np.inf, "U", (lo, hi), (hi - lo) / 4)


def trivial_pair(p, q, separation=0.0):
    return PerturbationPair("test", p, q, p, q, 0.0, 0.0, math.inf, separation)


PHI = gaussian_baseline(1.0)


class TestChiSquared:
    def test_identical(self):
        assert chi_squared(PHI, PHI) == 0.0

    def test_gaussian_shift_closed_form(self):
        val = chi_squared(normal(0.5), normal(0.0))
        assert val == pytest.approx(math.exp(0.25) - 1, abs=1e-10)
        assert val == pytest.approx(0.284025, abs=1e-6)
        ref, _ = integrate.quad(lambda x: stats.norm.pdf(x, 0.5) ** 2 / stats.norm.pdf(x), -15, 15,
                                epsabs=1e-13)
        assert val == pytest.approx(ref - 1, abs=1e-9)

    def test_support_mismatch(self):
        assert support_mismatch(PHI, scaled_bump_a(1.0, beta=1.0, holder_radius=np.inf))
        assert chi_squared(PHI, scaled_bump_a(1.0, beta=1.0, holder_radius=np.inf)) == math.inf

    def test_no_mismatch_when_nested(self):
        assert not support_mismatch(uniform(-0.5, 0.5), uniform(-1, 1))
        # chi^2(U[-1/2,1/2], U[-1,1]) = int p^2/q - 1 = 2 - 1
        assert chi_squared(uniform(-0.5, 0.5), uniform(-1, 1)) == pytest.approx(1.0, abs=1e-10)

    def test_dominates_squared_tv(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            mu_p, mu_q = rng.uniform(-1.5, 1.5, 2)
            s_q = rng.uniform(0.6, 2.0)
            s_p = s_q * rng.uniform(0.5, 1.2)
            p, q = normal(mu_p, s_p), normal(mu_q, s_q)
            chi2 = chi_squared(p, q)
            assert chi2 >= 0
            assert chi2 >= 4 * total_variation(p, q) ** 2 - 1e-10


class TestTotalVariation:
    def test_identical(self):
        assert total_variation(PHI, PHI) == 0.0

    def test_disjoint(self):
        assert total_variation(uniform(-2, -1), uniform(1, 2)) == pytest.approx(1.0, abs=1e-12)

    def test_gaussian_shift(self):
        val = total_variation(normal(0.0), normal(3.0))
        assert val == pytest.approx(2 * stats.norm.cdf(1.5) - 1, abs=1e-10)
        assert val == pytest.approx(0.86639, abs=1e-5)
        assert val == pytest.approx(math.erf(1.5 / math.sqrt(2)), abs=1e-10)


class TestLeCam:
    def test_identical_zero_separation(self):
        cert = le_cam_bound(trivial_pair(PHI, PHI, 0.0), 100)
        assert cert.lecam_bound == 0.0 and cert.chi2_joint == 0.0

    def test_unit_separation(self):
        cert = le_cam_bound(trivial_pair(PHI, PHI, 1.0), 100)
        assert cert.lecam_bound == 0.125 and cert.feasible

    def test_tensorization_two_samples(self):
        p, q = uniform(-1, 1), SmoothDensity(
            lambda x: np.where(np.abs(x) <= 1, 0.5 + 0.3 * x, 0.0), (-1.0, 1.0), 0.5, np.inf, "tilt",
            (-1.0, 1.0), 0.5)
        cert = le_cam_bound(trivial_pair(p, q), 2)
        joint, _ = integrate.dblquad(lambda y, x: (q(x) * q(y)) ** 2 / (p(x) * p(y)), -1, 1, -1, 1,
                                     epsabs=1e-12)
        assert cert.chi2_joint == pytest.approx(joint - 1, abs=1e-6)
        # chi^2 of the tilt against uniform: int (0.3x)^2 / 0.5 = 0.12
        assert cert.chi2_single == pytest.approx(0.12, abs=1e-10)

    def test_support_violation(self):
        cert = le_cam_bound(trivial_pair(scaled_bump_a(1.0, beta=1.0, holder_radius=np.inf), PHI, 1.0), 10)
        assert not cert.feasible and cert.lecam_bound == 0.0 and cert.support_violation

    @pytest.mark.parametrize("make", [
        lambda: pair_level(0.1, 1.0),
        lambda: pair_proportion(0.2, 0.1),
        lambda: pair_unidentifiable(0.01),
    ])
    def test_identical_mixture_pairs(self, make):
        pair = make()
        cert = le_cam_bound(pair, 1000)
        assert cert.chi2_single <= 1e-10
        assert cert.lecam_bound == pytest.approx(pair.separation**2 / 8, rel=1e-8)

    def test_neighborhood_rate(self):
        pair = pair_neighborhood(0.1, 10_000, 2.0, 1.0)
        cert = le_cam_bound(pair, 10_000)
        theory = 0.1 ** (2 / 3) * 10_000 ** (-2 / 3)
        assert cert.chi2_joint <= 3
        assert 1e-3 <= cert.lecam_bound / theory <= 1e3


class TestConstrainedRisk:
    def test_formula(self):
        res = risk_inequality_bound(0.2, 0.1, 1.0)
        assert res.bound == pytest.approx(0.01) and res.applicable

    def test_not_applicable(self):
        res = risk_inequality_bound(0.2, 0.3, 1.0)
        assert res.bound == 0.0 and not res.applicable

    def test_proportion_pair(self):
        pair = pair_proportion(0.2, 0.1)
        res = constrained_risk_bound(pair, 1000, 0.01)
        assert res.I == pytest.approx(1.0, abs=1e-10)
        assert res.bound == pytest.approx((pair.separation - 0.01) ** 2, rel=1e-8)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            risk_inequality_bound(-1.0, 0.1, 1.0)


def phi_diff(scale=1.0):
    return lambda x: scale * (stats.norm.pdf(x) - stats.norm.pdf(x, 3.0))


class TestDensityDifference:
    def test_zero(self):
        ok, ints = is_density_difference(lambda x: np.zeros_like(np.asarray(x, dtype=float)))
        assert ok and ints["abs_integral"] == 0.0

    def test_gaussian_difference(self):
        ok, ints = is_density_difference(phi_diff())
        assert ok
        assert abs(ints["integral"]) <= 1e-10
        assert ints["abs_integral"] == pytest.approx(2 * (2 * stats.norm.cdf(1.5) - 1), abs=1e-9)
        assert ints["abs_integral"] == pytest.approx(1.73277, abs=1e-5)

    def test_doubled_fails(self):
        ok, ints = is_density_difference(phi_diff(2.0))
        assert not ok
        # closed form 4 (2 Phi(1.5) - 1); the rounded 3.46556 is twice a rounded 1.73278
        assert ints["abs_integral"] == pytest.approx(4 * (2 * stats.norm.cdf(1.5) - 1), abs=1e-9)
        assert ints["abs_integral"] > 2

    def test_decompose_zero(self):
        base = gaussian_baseline(5.0)
        gp, gm = density_difference_decompose(lambda x: np.zeros_like(np.asarray(x, dtype=float)), base)
        x = np.linspace(-30, 30, 1001)
        np.testing.assert_allclose(gp.evaluate(x), base.evaluate(x), atol=1e-16)
        np.testing.assert_allclose(gm.evaluate(x), base.evaluate(x), atol=1e-16)

    def test_decompose_full_mass(self):
        # disjoint uniforms: int|d| = 2 so the base weight vanishes
        d = lambda x: uniform(-2, -1).evaluate(np.asarray(x, dtype=float)) - uniform(1, 2).evaluate(
            np.asarray(x, dtype=float))
        gp, gm = density_difference_decompose(d, PHI, support=(-3, 3), breakpoints=(-2, -1, 1, 2))
        x = np.linspace(-2.9, 2.9, 2001)
        np.testing.assert_allclose(gp.evaluate(x), np.maximum(d(x), 0), atol=1e-10)
        np.testing.assert_allclose(gm.evaluate(x), np.maximum(-d(x), 0), atol=1e-10)

    def test_decompose_gaussian(self):
        d = phi_diff()
        base = gaussian_baseline(5.0)
        gp, gm = density_difference_decompose(d, base)
        x = np.linspace(-40, 40, 10_000)
        assert np.max(np.abs(gp.evaluate(x) - gm.evaluate(x) - d(x))) <= 1e-8
        assert np.all(gp.evaluate(x) >= 0) and np.all(gm.evaluate(x) >= 0)
        for g in (gp, gm):
            val, _ = integrate.quad(g, -45, 45, points=[0, 3], limit=400, epsabs=1e-12)
            assert val == pytest.approx(1.0, abs=1e-8)

    def test_decompose_rejects(self):
        with pytest.raises(ValueError):
            density_difference_decompose(phi_diff(2.0), gaussian_baseline(5.0))


class TestModulus:
    def test_zero_epsilon(self):
        assert modulus_of_continuity(1.0, 5.0, 0.0) == 0.0

    def test_vanishes_with_epsilon(self):
        vals = [modulus_of_continuity(1.0, 5.0, e) for e in (1e-2, 1e-4, 1e-6)]
        assert vals[0] > vals[1] > vals[2] > 0
        assert vals[2] < 1e-5

    def test_slope_beta_one(self):
        eps = np.array([0.01, 0.02, 0.04, 0.08])
        vals = [modulus_of_continuity(1.0, 5.0, e) for e in eps]
        slope = stats.linregress(np.log(eps), np.log(vals)).slope
        assert abs(slope - 1.0) <= 0.1

    def test_monotone_in_radius(self):
        vals = [modulus_of_continuity(1.0, L, 0.05) for L in (2.0, 5.0, 20.0, 100.0)]
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_diagnostics(self):
        res = modulus_search(1.0, 5.0, 0.04, ModulusSearch(iterations=40))
        assert res.binding in ("holder", "tv", "nonneg")
        assert res.value == max(v for _, v in res.profile)
        hs = [h for h, _ in res.profile]
        assert min(hs) >= 0.04**2 * (1 - 1e-12) and max(hs) <= 1.0 + 1e-12

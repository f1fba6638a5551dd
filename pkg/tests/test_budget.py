import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from piezobridge.bridge import ALL_CONFIGS, P_SILICON, PiezoCoefficients
from piezobridge.budget import (
    MC_BLOCK,
    DeviationMode,
    DeviationModel,
    NoiseSpec,
    directional_noise,
    max_eigenvalue_2x2,
    max_nonlinearity_over_direction,
    min_eigenvalue_2x2,
    noise_psd_matrix,
    noise_unit,
    nonlinearity_error_analytic,
    nonlinearity_error_numeric,
    offset_samples,
    offset_variance_analytic,
    offset_variance_linearized,
    offset_variance_monte_carlo,
    optimize_sensitivity_angle,
    worst_case_noise,
)
from piezobridge.mechanics import MechanicalParams

PL, PT = P_SILICON.pi_l, P_SILICON.pi_t
QUARTER = MechanicalParams(1e6, math.pi / 4)
SYMMETRIC = PiezoCoefficients(70e-11, -70e-11)
alphas = st.floats(0.05 * math.pi, 0.45 * math.pi)


class TestNonlinearity:
    def test_config_a_value(self):
        got = nonlinearity_error_analytic("A", QUARTER, P_SILICON, 1.0, math.pi / 4)
        # -(h/4)(pl+pt) sqrt(2) with h = 1e6
        np.testing.assert_allclose(got, [-1.9445436482630058e-05] * 2, rtol=1e-12)

    def test_b_d_identical_to_a(self):
        theta = np.linspace(0, 2 * math.pi, 50)
        a = nonlinearity_error_analytic("A", QUARTER, P_SILICON, 1.3, theta)
        for config in "BD":
            np.testing.assert_array_equal(
                nonlinearity_error_analytic(config, QUARTER, P_SILICON, 1.3, theta), a)

    @given(st.floats(0, 2 * math.pi))
    def test_vanishes_for_symmetric_coefficients(self, theta):
        got = nonlinearity_error_analytic("A", QUARTER, SYMMETRIC, 1.0, theta)
        np.testing.assert_allclose(got, 0.0, atol=1e-25)

    @given(alphas)
    def test_config_c_where_sum_term_vanishes(self, alpha):
        mech = MechanicalParams(1e6, alpha)
        theta = math.pi / 2 - alpha
        got = nonlinearity_error_analytic("C", mech, P_SILICON, 1.0, theta)[1]
        expected = -(1e6 / 4) * PL * math.cos(theta - alpha) ** 2 / math.sin(alpha)
        assert got == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("config", ALL_CONFIGS)
    @pytest.mark.parametrize("alpha_frac", [0.15, 0.25, 0.35, 0.45])
    def test_numeric_oracle(self, config, alpha_frac):
        mech = MechanicalParams(1e6, alpha_frac * math.pi)
        theta = np.linspace(0, 2 * math.pi, 32, endpoint=False)
        ana = nonlinearity_error_analytic(config, mech, P_SILICON, 1.0, theta)
        num = nonlinearity_error_numeric(config, mech, P_SILICON, 1.0, 1.0, theta)
        rel = np.linalg.norm(num - ana, axis=-1) / np.linalg.norm(ana, axis=-1)
        assert np.max(rel) < 1e-3

    @pytest.mark.parametrize("config", ALL_CONFIGS)
    def test_numeric_quadratic_scaling(self, config):
        theta = np.linspace(0, 2 * math.pi, 16, endpoint=False)
        one = nonlinearity_error_numeric(config, QUARTER, P_SILICON, 1.0, 1.0, theta)
        two = nonlinearity_error_numeric(config, QUARTER, P_SILICON, 1.0, 2.0, theta)
        np.testing.assert_allclose(two, 4 * one, rtol=1e-3, atol=1e-3 * np.max(np.abs(4 * one)))

    def test_numeric_zero_acceleration(self):
        np.testing.assert_array_equal(
            nonlinearity_error_numeric("C", QUARTER, P_SILICON, 1.0, 0.0, 0.7), [0.0, 0.0])

    def test_max_over_direction_config_a(self):
        expected = 1e6 * (PL + PT) / 2  # 2.75e-5 g
        assert max_nonlinearity_over_direction("A", QUARTER, P_SILICON, 1.0) == pytest.approx(
            expected, rel=1e-9)

    @pytest.mark.parametrize("config", ALL_CONFIGS)
    @pytest.mark.parametrize("alpha", [0.17 * math.pi, 0.31 * math.pi, 0.44 * math.pi])
    def test_max_against_brute_force(self, config, alpha):
        mech = MechanicalParams(1e6, alpha)
        theta = np.linspace(0, 2 * math.pi, 200_001)
        brute = np.max(np.linalg.norm(
            nonlinearity_error_analytic(config, mech, P_SILICON, 1.0, theta), axis=-1))
        got = max_nonlinearity_over_direction(config, mech, P_SILICON, 1.0)
        assert got == pytest.approx(brute, rel=1e-8)
        assert got >= brute * (1 - 1e-12)

    def test_max_zero_for_symmetric(self):
        for config in "ABD":
            assert max_nonlinearity_over_direction(config, QUARTER, SYMMETRIC, 1.0) == 0.0


class TestOffset:
    def test_independent_config_a_value(self):
        model = DeviationModel(DeviationMode.INDEPENDENT, 0.01)
        assert offset_variance_analytic("A", QUARTER, P_SILICON, model) == pytest.approx(
            104.86791623780059, rel=1e-12)

    def test_per_proof_mass_zero_for_single_mass_bridges(self):
        model = DeviationModel("per-proof-mass", 0.01)
        for config in "ABD":
            assert offset_variance_analytic(config, QUARTER, P_SILICON, model) == 0.0

    def test_c_to_b_ratio_symmetric_coefficients(self):
        model = DeviationModel("independent", 0.01)
        mech = MechanicalParams(1e6, 0.3)
        c = offset_variance_analytic("C", mech, SYMMETRIC, model)
        b = offset_variance_analytic("B", mech, SYMMETRIC, model)
        assert c / b == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("config", ALL_CONFIGS)
    @pytest.mark.parametrize("mode", list(DeviationMode))
    @pytest.mark.parametrize("alpha", [0.2, 0.7854, 1.3])
    def test_first_order_propagation_matches_closed_form(self, config, mode, alpha):
        mech = MechanicalParams(1e6, alpha)
        model = DeviationModel(mode, 0.01)
        linear = offset_variance_linearized(config, mech, P_SILICON, model)
        closed = offset_variance_analytic(config, mech, P_SILICON, model)
        if config == "C" and mode is DeviationMode.PER_PROOF_MASS:
            # The network gives half of the printed closed form.
            assert linear == pytest.approx(2e-4 / (1e6 * PL * math.sin(2 * alpha)) ** 2, rel=1e-7)
            assert linear == pytest.approx(closed / 2, rel=1e-7)
        else:
            assert linear == pytest.approx(closed, rel=1e-7, abs=1e-9)

    @pytest.mark.parametrize("config", ALL_CONFIGS)
    @pytest.mark.parametrize("mode", list(DeviationMode))
    def test_monte_carlo_matches_propagation(self, config, mode):
        model = DeviationModel(mode, 0.01)
        mc = offset_variance_monte_carlo(config, QUARTER, P_SILICON, 1.0, model, 40_000, seed=7)
        linear = offset_variance_linearized(config, QUARTER, P_SILICON, model)
        assert abs(mc.mean - linear) <= 3 * mc.stderr + 1e-12

    def test_zero_spread_gives_zero(self):
        model = DeviationModel("independent", 0.0)
        mc = offset_variance_monte_carlo("B", QUARTER, P_SILICON, 1.0, model, 1000, seed=1)
        assert mc.mean == 0.0 and mc.stderr == 0.0

    def test_seed_determinism(self):
        model = DeviationModel("independent", 0.01)
        a = offset_variance_monte_carlo("C", QUARTER, P_SILICON, 1.0, model, 5000, seed=3)
        b = offset_variance_monte_carlo("C", QUARTER, P_SILICON, 1.0, model, 5000, seed=3)
        c = offset_variance_monte_carlo("C", QUARTER, P_SILICON, 1.0, model, 5000, seed=4)
        assert a == b
        assert a.mean != c.mean

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 3 * MC_BLOCK), st.integers(1, 3 * MC_BLOCK))
    def test_partitioned_samples_identical(self, split, length):
        model = DeviationModel("per-orientation", 0.02)
        args = ("D", QUARTER, P_SILICON, 1.0, model, 11)
        stop = split + length
        whole = offset_samples(*args, 0, stop)
        parts = np.concatenate([offset_samples(*args, 0, split), offset_samples(*args, split, stop)])
        np.testing.assert_array_equal(whole, parts)

    @pytest.mark.parametrize("workers", [2, 3, 7])
    def test_workers_reproduce_single_thread(self, workers):
        model = DeviationModel("independent", 0.01)
        single = offset_variance_monte_carlo("A", QUARTER, P_SILICON, 1.0, model, 20_001, 5)
        multi = offset_variance_monte_carlo("A", QUARTER, P_SILICON, 1.0, model, 20_001, 5,
                                            workers=workers)
        assert single == multi

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValueError):
            offset_variance_monte_carlo("A", QUARTER, P_SILICON, 1.0,
                                        DeviationModel("independent", 0.01), 99, 0)

    def test_negative_spread_rejected(self):
        with pytest.raises(ValueError):
            DeviationModel("independent", -0.1)


class TestNoise:
    spec = NoiseSpec(s_r=2e-16, v_ex=1.5)

    def test_config_a_diagonal(self):
        mech = MechanicalParams(1e6, 0.3)
        S = noise_psd_matrix("A", mech, P_SILICON, self.spec)
        D2 = (1e6 * 1.5 * (PL - PT)) ** 2
        expected = 2 * 2e-16 / D2 * np.diag([1 / math.cos(0.3) ** 2, 1 / math.sin(0.3) ** 2])
        np.testing.assert_allclose(S, expected, rtol=1e-12, atol=1e-12 * np.max(expected))

    @given(alphas)
    def test_b_and_d_double_a(self, alpha):
        mech = MechanicalParams(1e6, alpha)
        A = noise_psd_matrix("A", mech, P_SILICON, self.spec)
        for config in "BD":
            S = noise_psd_matrix(config, mech, P_SILICON, self.spec)
            np.testing.assert_allclose(S, 2 * A, rtol=1e-12, atol=1e-12 * np.max(A))

    def test_c_cross_spectral_density(self):
        S = noise_psd_matrix("C", QUARTER, P_SILICON, self.spec)
        assert abs(S[0, 1]) > 1e-3 * S[0, 0]

    def test_c_matches_direct_algebra(self):
        # elementwise inverse of the lower-triangular scale factor
        mech = MechanicalParams(1e6, 0.5)
        c, s = math.cos(0.5), math.sin(0.5)
        k = (PL - PT) ** 2
        unit = 4 * noise_unit(1e6, P_SILICON, self.spec)
        expected = unit * np.array([
            [k / (4 * PL**2 * c**2), -(PL**2 - PT**2) / (4 * PL**2 * s * c)],
            [-(PL**2 - PT**2) / (4 * PL**2 * s * c), (4 * PL**2 + (PL + PT) ** 2) / (4 * PL**2 * s**2)],
        ])
        np.testing.assert_allclose(noise_psd_matrix("C", mech, P_SILICON, self.spec), expected,
                                   rtol=1e-12)

    @given(st.sampled_from(ALL_CONFIGS), alphas)
    def test_symmetric_positive_semidefinite(self, config, alpha):
        S = noise_psd_matrix(config, MechanicalParams(1e6, alpha), P_SILICON, self.spec)
        assert S[0, 1] == S[1, 0]
        assert np.all(np.linalg.eigvalsh(S) >= 0)

    def test_directional_constant_for_a(self):
        S = noise_psd_matrix("A", QUARTER, P_SILICON, self.spec)
        theta = np.linspace(0, 2 * math.pi, 97)
        unit = noise_unit(1e6, P_SILICON, self.spec)
        np.testing.assert_allclose(directional_noise(S, theta) / unit, 4.0, rtol=1e-12)

    def test_directional_at_zero_is_first_element(self):
        S = np.array([[3.0, 0.5], [0.5, 1.0]])
        assert directional_noise(S, 0.0) == 3.0

    @given(st.sampled_from(ALL_CONFIGS), alphas)
    def test_directional_extremes_are_eigenvalues(self, config, alpha):
        S = noise_psd_matrix(config, MechanicalParams(1e6, alpha), P_SILICON, self.spec)
        theta = np.linspace(0, math.pi, 20_001)
        d = directional_noise(S, theta)
        lo, hi = np.linalg.eigvalsh(S)
        assert min_eigenvalue_2x2(S) == pytest.approx(lo, rel=1e-9)
        assert max_eigenvalue_2x2(S) == pytest.approx(hi, rel=1e-9)
        assert np.max(d) == pytest.approx(hi, rel=1e-6)
        assert np.min(d) == pytest.approx(lo, rel=1e-6)
        assert np.all(d <= hi * (1 + 1e-12))

    def test_worst_case_a(self):
        unit = noise_unit(1e6, P_SILICON, self.spec)
        assert worst_case_noise("A", QUARTER, P_SILICON, self.spec) / unit == pytest.approx(4.0, rel=1e-12)

    def test_diverges_near_guard_band(self):
        unit = noise_unit(1e6, P_SILICON, self.spec)
        for config in ALL_CONFIGS:
            low = worst_case_noise(config, MechanicalParams(1e6, 1e-4), P_SILICON, self.spec) / unit
            high = worst_case_noise(config, MechanicalParams(1e6, math.pi / 2 - 1e-4), P_SILICON,
                                    self.spec) / unit
            assert low > 1e7 and high > 1e7

    @given(alphas)
    def test_b_is_twice_a(self, alpha):
        mech = MechanicalParams(1e6, alpha)
        assert worst_case_noise("B", mech, P_SILICON, self.spec) == pytest.approx(
            2 * worst_case_noise("A", mech, P_SILICON, self.spec), rel=1e-12)

    def test_optimize_a(self):
        alpha, s0 = optimize_sensitivity_angle("A", P_SILICON, self.spec, 1e6)
        assert alpha == pytest.approx(math.pi / 4, abs=1e-3)
        assert s0 / noise_unit(1e6, P_SILICON, self.spec) == pytest.approx(4.0, rel=1e-6)

    def test_optimize_b(self):
        alpha, s0 = optimize_sensitivity_angle("B", P_SILICON, self.spec, 1e6)
        assert alpha == pytest.approx(math.pi / 4, abs=1e-3)
        assert s0 / noise_unit(1e6, P_SILICON, self.spec) == pytest.approx(8.0, rel=1e-6)

    def test_optimize_c_beats_grid(self):
        alpha, s0 = optimize_sensitivity_angle("C", P_SILICON, self.spec, 1e6)
        grid = np.linspace(0.1, 1.4, 2000)
        brute = min(worst_case_noise("C", MechanicalParams(1e6, a), P_SILICON, self.spec) for a in grid)
        assert s0 <= brute * (1 + 1e-9)

    @given(st.floats(0.05, 0.45))
    def test_a_objective_symmetric(self, frac):
        a = frac * math.pi
        lhs = worst_case_noise("A", MechanicalParams(1e6, a), P_SILICON, self.spec)
        rhs = worst_case_noise("A", MechanicalParams(1e6, math.pi / 2 - a), P_SILICON, self.spec)
        assert lhs == pytest.approx(rhs, rel=1e-10)

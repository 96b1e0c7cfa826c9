"""
Tests for the stationarity condition and closed-form moments.
"""

import math
import unittest

import numpy as np

from src.errors import NonStationaryError
from src.marks import MarkDistribution, MarkKind
from src.model import ModelParams
from src.stationarity import (ExcitationMatrix, check_c2, excitation_matrix, moment_report, spectral_radius,
                              stationary_mean, stationary_second_moments, stationary_variance_correlation,
                              sum_form_radius, table_coefficients)
from tests.params import asymmetric, explosive, point_mass_symmetric, random_stationary, shot_noise, \
    symmetric_benchmark


def _power_iteration(matrix: np.ndarray, steps: int = 2000) -> float:
    x = np.ones(2)
    estimate = 0.0
    for _ in range(steps):
        y = matrix @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        estimate = norm / np.linalg.norm(x)
        x = y / norm
    return estimate


def _scaled_mark(dist: MarkDistribution, c: float) -> MarkDistribution:
    if dist.kind == MarkKind.EXPONENTIAL:
        return MarkDistribution.exponential(dist.rate / c)
    if dist.kind == MarkKind.GAMMA:
        return MarkDistribution.gamma(dist.shape, dist.scale * c)
    if dist.kind == MarkKind.POINT_MASS:
        return MarkDistribution.point_mass(dist.value * c)
    return dist


def _time_rescaled(params: ModelParams, c: float) -> ModelParams:
    marks = {name: _scaled_mark(getattr(params, name), c) for name in ('h1', 'h2', 'g11', 'g12', 'g21', 'g22')}
    return params.replace(delta1=c * params.delta1, delta2=c * params.delta2,
                          rho1=c * params.rho1, rho2=c * params.rho2, **marks)



class TestSpectralRadius(unittest.TestCase):

    def test_shot_noise_radius_is_zero(self):
        ok, radius = check_c2(shot_noise())
        self.assertTrue(ok)
        self.assertEqual(radius, 0.0)

    def test_symmetric_benchmark_radius(self):
        self.assertAlmostEqual(check_c2(symmetric_benchmark())[1], 0.5, places=14)

    def test_matches_eigenvalues_and_power_iteration(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            entries = rng.uniform(0.0, 1.0, 4)
            matrix = ExcitationMatrix(*entries)
            expected = max(abs(np.linalg.eigvals(matrix.as_array())))
            self.assertAlmostEqual(spectral_radius(matrix), expected, places=12)
            self.assertAlmostEqual(spectral_radius(matrix), _power_iteration(matrix.as_array()), places=8)

    def test_classification_matches_power_iteration(self):
        rng = np.random.default_rng(1000)
        for _ in range(1000):
            entries = rng.uniform(0.0, 1.0, 4)
            matrix = ExcitationMatrix(*entries)
            oracle = _power_iteration(matrix.as_array(), steps=300)
            if abs(oracle - 1.0) < 1e-6:
                continue
            self.assertEqual(spectral_radius(matrix) < 1.0, oracle < 1.0, f"{entries}")

    def test_sum_form_bounds_the_radius(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            matrix = ExcitationMatrix(*rng.uniform(0.0, 1.0, 4))
            self.assertGreaterEqual(sum_form_radius(matrix) + 1e-15, spectral_radius(matrix))
        diagonal_free = ExcitationMatrix(0.0, 0.3, 0.4, 0.5)
        self.assertAlmostEqual(sum_form_radius(diagonal_free), spectral_radius(diagonal_free), places=15)

    def test_boundary_and_explosive(self):
        ok, radius = check_c2(point_mass_symmetric(0.5))
        self.assertFalse(ok)
        self.assertAlmostEqual(radius, 1.0, places=15)
        ok, radius = check_c2(explosive())
        self.assertFalse(ok)
        self.assertAlmostEqual(radius, 1.2, places=14)

    def test_matrix_layout(self):
        matrix = excitation_matrix(asymmetric())
        self.assertAlmostEqual(matrix.a11, 0.2 / 1.0)
        self.assertAlmostEqual(matrix.a12, 0.2 / 1.0)
        self.assertAlmostEqual(matrix.a21, 0.2 / 1.5)
        self.assertAlmostEqual(matrix.a22, 0.25 / 1.5)


class TestStationaryMoments(unittest.TestCase):

    def test_shot_noise_mean_and_variance(self):
        params = shot_noise(beta=2.0, rho=1.5, delta=1.0)
        m1, m2 = stationary_mean(params)
        self.assertAlmostEqual(m1, 1.5 * 0.5 / 1.0, places=14)
        self.assertEqual(m2, 0.0)
        v1, v2, correlation = stationary_variance_correlation(params)
        self.assertAlmostEqual(v1, 1.5 * 0.5 / 2.0, places=14)
        self.assertEqual(v2, 0.0)
        self.assertTrue(math.isnan(correlation))

    def test_symmetric_benchmark_closed_form(self):
        report = moment_report(symmetric_benchmark())
        self.assertAlmostEqual(report.mean[0], 1.0, places=13)
        self.assertAlmostEqual(report.mean[1], 1.0, places=13)
        self.assertAlmostEqual(report.second[0], 2.1875, places=12)
        self.assertAlmostEqual(report.second[2], 1.5625, places=12)
        self.assertAlmostEqual(report.variance[0], 1.1875, places=12)
        self.assertAlmostEqual(report.covariance, 0.5625, places=12)
        self.assertAlmostEqual(report.correlation, 0.5625 / 1.1875, places=12)

    def test_univariate_variance(self):
        g = MarkDistribution.exponential(2.5)
        h = MarkDistribution.gamma(2.0, 0.5)
        params = ModelParams.univariate(delta=1.2, rho=0.7, h=h, g=g)
        m1, _ = stationary_mean(params)
        delta = 1.2 - g.mean
        self.assertAlmostEqual(m1, 0.7 * h.mean / delta, places=14)
        v1, _, _ = stationary_variance_correlation(params)
        self.assertAlmostEqual(v1, (g.second_moment * m1 + 0.7 * h.second_moment) / (2 * delta), places=12)

    def test_second_moments_solve_the_table(self):
        for params in (asymmetric(), symmetric_benchmark()):
            table = table_coefficients(params)
            m1, m2 = stationary_mean(params)
            s1, s2, s12 = stationary_second_moments(params)
            for row in table.values():
                residual = (row['X11'] * s1 + row['X22'] * s2 + row['X12'] * s12
                            + row['X1'] * m1 + row['X2'] * m2 + row['X0'])
                self.assertAlmostEqual(residual, 0.0, places=11)

    def test_variance_coefficients_agree_with_cramer(self):
        rng = np.random.default_rng(99)
        for params in [asymmetric()] + [random_stationary(rng) for _ in range(100)]:

            m1, m2 = stationary_mean(params)
            s1, s2, _ = stationary_second_moments(params)
            v1, v2, correlation = stationary_variance_correlation(params)
            self.assertAlmostEqual(v1, s1 - m1 ** 2, delta=1e-10 * max(1.0, s1))
            self.assertAlmostEqual(v2, s2 - m2 ** 2, delta=1e-10 * max(1.0, s2))
            self.assertGreaterEqual(correlation, -1.0)
            self.assertLessEqual(correlation, 1.0)

    def test_mean_and_variance_are_additive_in_rho(self):
        base = asymmetric()
        parts = [base.replace(rho1=0.3, rho2=0.9), base.replace(rho1=0.5, rho2=0.1)]
        whole = base.replace(rho1=0.8, rho2=1.0)
        means = [stationary_mean(p) for p in parts]
        variances = [stationary_variance_correlation(p)[:2] for p in parts]
        np.testing.assert_allclose(np.sum(means, axis=0), stationary_mean(whole), rtol=1e-12)
        np.testing.assert_allclose(np.sum(variances, axis=0), stationary_variance_correlation(whole)[:2],
                                   rtol=1e-11)

    def test_time_rescaling(self):
        # rates and jump sizes scaled by c: intensities scale by c
        rng = np.random.default_rng(17)
        for params in (asymmetric(), symmetric_benchmark(), random_stationary(rng)):
            for c in (0.25, 3.0):
                scaled = _time_rescaled(params, c)
                self.assertTrue(np.allclose(excitation_matrix(scaled).as_array(),
                                            excitation_matrix(params).as_array(), rtol=1e-13, atol=0.0))
                self.assertAlmostEqual(check_c2(scaled)[1], check_c2(params)[1], places=12)
                np.testing.assert_allclose(stationary_mean(scaled), np.multiply(c, stationary_mean(params)),
                                           rtol=1e-12)
                v1, v2, correlation = stationary_variance_correlation(params)
                w1, w2, scaled_correlation = stationary_variance_correlation(scaled)
                np.testing.assert_allclose((w1, w2), (c * c * v1, c * c * v2), rtol=1e-11)
                self.assertAlmostEqual(scaled_correlation, correlation, places=11)

    def test_non_stationary_raises(self):

        for call in (stationary_mean, stationary_second_moments, stationary_variance_correlation, moment_report):
            with self.assertRaises(NonStationaryError) as ctx:
                call(explosive())
            self.assertAlmostEqual(ctx.exception.radius, 1.2, places=12)

    def test_report_serializes_nan_as_none(self):
        data = moment_report(shot_noise()).to_dict()
        self.assertIsNone(data['correlation'])
        self.assertEqual(set(data['table']), {'A', 'B', 'C'})


if __name__ == '__main__':
    unittest.main()

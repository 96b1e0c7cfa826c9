"""
Tests for the Monte Carlo estimators and the verification reports.
"""

import logging
import math
import os
import unittest
from unittest.mock import Mock

import numpy as np

from src.analysis import (MonteCarloAnalyzer, VerifyConfig, _z_row, laplace_estimate_from_samples,
                          moment_estimate_from_samples)
from src.errors import DomainError
from src.laplace import LaplaceSettings, LaplaceSolver, finite_T_laplace
from src.marks import MarkDistribution
from src.model import ModelParams
from src.stationarity import moment_report
from tests.params import (SLOW, asymmetric, explosive, near_critical, random_stationary, shot_noise,
                          symmetric_benchmark)

ZERO = MarkDistribution.zero()


def _poisson_only() -> ModelParams:
    """External arrivals with zero jumps: both counting processes are Poisson."""
    return ModelParams(delta1=1.0, delta2=1.0, rho1=2.0, rho2=1.0, h1=ZERO, h2=ZERO,
                       g11=ZERO, g12=ZERO, g21=ZERO, g22=ZERO)


class TestSampleEstimators(unittest.TestCase):

    def test_estimates_match_numpy(self):
        rng = np.random.default_rng(0)
        samples = rng.gamma(2.0, 1.0, size=(500, 2))
        estimate = moment_estimate_from_samples(samples, 10.0, 5.0)
        self.assertAlmostEqual(estimate.mean[0].est, float(samples[:, 0].mean()), places=12)
        self.assertAlmostEqual(estimate.variance[1].est, float(samples[:, 1].var(ddof=1)), places=12)
        self.assertAlmostEqual(estimate.cross_moment.est, float((samples[:, 0] * samples[:, 1]).mean()), places=12)
        self.assertAlmostEqual(estimate.correlation.est, float(np.corrcoef(samples.T)[0, 1]), places=12)
        self.assertAlmostEqual(estimate.mean[0].stderr, float(samples[:, 0].std(ddof=1) / math.sqrt(500)),
                               places=12)
        self.assertTrue(all(e.stderr > 0 for e in estimate.variance))

    def test_constant_samples(self):
        estimate = moment_estimate_from_samples(np.zeros((20, 2)), 10.0, 5.0)
        self.assertEqual(estimate.mean[0].est, 0.0)
        self.assertEqual(estimate.mean[0].stderr, 0.0)
        self.assertEqual(estimate.variance[1].stderr, 0.0)
        self.assertTrue(math.isnan(estimate.correlation.est))
        self.assertIsNone(estimate.to_dict()['correlation']['est'])

    def test_laplace_of_zero_argument(self):
        samples = np.random.default_rng(1).exponential(size=(50, 2))
        estimate = laplace_estimate_from_samples(samples, 0.0, 0.0)
        self.assertEqual(estimate.est, 1.0)
        self.assertEqual(estimate.stderr, 0.0)


class TestZRow(unittest.TestCase):

    def test_regular_score(self):
        row = _z_row('mean1', 1.0, 1.3, 0.1, 4.0)
        self.assertAlmostEqual(row.z_score, 3.0, places=12)
        self.assertTrue(row.passed)
        self.assertFalse(_z_row('mean1', 1.0, 1.5, 0.1, 4.0).passed)

    def test_zero_stderr(self):
        self.assertEqual(_z_row('variance2', 0.0, 0.0, 0.0, 4.0).z_score, 0.0)
        row = _z_row('variance2', 0.0, 0.1, 0.0, 4.0)
        self.assertEqual(row.z_score, math.inf)
        self.assertFalse(row.passed)

    def test_non_finite_fails(self):
        row = _z_row('correlation', 0.5, math.nan, 0.1, 4.0)
        self.assertIsNone(row.z_score)
        self.assertFalse(row.passed)
        self.assertEqual(set(row.to_dict()), {'name', 'analytic', 'empirical', 'stderr', 'z_score', 'pass'})
        self.assertIsNone(row.to_dict()['empirical'])


class TestMonteCarloAnalyzer(unittest.TestCase):

    def setUp(self):
        self.logger = Mock(spec=logging.Logger)
        self.analyzer = MonteCarloAnalyzer(self.logger)

    def test_invalid_arguments(self):
        with self.assertRaises(DomainError):
            MonteCarloAnalyzer(self.logger, threads=0)
        with self.assertRaises(DomainError):
            self.analyzer.estimate_moments(shot_noise(), 1, 10.0, 5.0, 0)
        with self.assertRaises(DomainError):
            self.analyzer.estimate_moments(shot_noise(), 10, 5.0, 5.0, 0)
        with self.assertRaises(DomainError):
            self.analyzer.sample_stationary(shot_noise(), 10, 5.0, 0, algorithm='euler')

    def test_zero_model(self):
        params = ModelParams(delta1=1.0, delta2=1.0, rho1=0.0, rho2=0.0, h1=ZERO, h2=ZERO,
                             g11=ZERO, g12=ZERO, g21=ZERO, g22=ZERO)
        estimate = self.analyzer.estimate_moments(params, 20, 5.0, 1.0, 0)
        for component in (0, 1):
            self.assertEqual(estimate.mean[component].est, 0.0)
            self.assertEqual(estimate.mean[component].stderr, 0.0)
        value, stderr = self.analyzer.empirical_laplace(params, 1.0, 1.0, 20, 5.0, 1.0, 0)
        self.assertEqual((value, stderr), (1.0, 0.0))

    def test_same_seed_any_thread_count(self):
        params = asymmetric()
        single = self.analyzer.sample_stationary(params, 24, 10.0, 7)
        pooled = MonteCarloAnalyzer(self.logger, threads=2).sample_stationary(params, 24, 10.0, 7)
        np.testing.assert_array_equal(single, pooled)
        self.assertEqual(single.shape, (24, 2))

    def test_shot_noise_moments(self):
        params = shot_noise(beta=2.0, rho=1.5, delta=1.0)
        estimate = self.analyzer.estimate_moments(params, 2000, 25.0, 20.0, 11)
        self.assertTrue(estimate.stationary)
        self.assertEqual(estimate.warnings, [])
        self.assertLess(abs(estimate.mean[0].est - 0.75), 4 * estimate.mean[0].stderr)
        self.assertLess(abs(estimate.variance[0].est - 0.375), 4 * estimate.variance[0].stderr)
        self.assertEqual(estimate.mean[1].est, 0.0)

    def test_stderr_shrinks_with_paths(self):
        params = shot_noise()
        small = self.analyzer.estimate_moments(params, 400, 25.0, 20.0, 1)
        large = self.analyzer.estimate_moments(params, 1600, 25.0, 20.0, 2)
        ratio = large.mean[0].stderr / small.mean[0].stderr
        self.assertGreater(ratio, 0.35)
        self.assertLess(ratio, 0.65)

    def test_non_stationary_estimate_is_flagged(self):
        estimate = self.analyzer.estimate_moments(explosive(), 10, 6.0, 1.0, 0)
        self.assertFalse(estimate.stationary)
        self.assertAlmostEqual(estimate.spectral_radius, 1.2, places=12)
        self.assertEqual(len(estimate.warnings), 1)
        self.logger.warning.assert_called_once()

    def test_thinning_and_cluster_agree(self):
        n = 20000 if SLOW else 600
        parameter_sets = [symmetric_benchmark(), asymmetric(), random_stationary(np.random.default_rng(12))]
        for index, params in enumerate(parameter_sets):
            thinning = self.analyzer.sample_stationary(params, n, 15.0, 5 + index)
            cluster = self.analyzer.sample_stationary(params, n, 15.0, 50 + index, algorithm='cluster',
                                                      generations=30)
            for component in (0, 1):
                a, b = thinning[:, component], cluster[:, component]
                spread = math.sqrt(a.var(ddof=1) / n + b.var(ddof=1) / n)
                self.assertLess(abs(a.mean() - b.mean()), 4 * spread)
                sq_a, sq_b = (a - a.mean()) ** 2, (b - b.mean()) ** 2
                var_spread = math.sqrt(sq_a.var(ddof=1) / n + sq_b.var(ddof=1) / n)
                self.assertLess(abs(a.var(ddof=1) - b.var(ddof=1)), 4 * var_spread)

    def test_finite_horizon_transform(self):
        exp_half = MarkDistribution.exponential(2.0)
        unit_excitation = ModelParams(delta1=1.0, delta2=1.0, rho1=1.0, rho2=1.0, h1=exp_half, h2=exp_half,
                                      g11=exp_half, g12=exp_half, g21=exp_half, g22=exp_half, lambda0=(1.0, 1.0))
        cases = [
            (symmetric_benchmark().replace(lambda0=(1.0, 0.5)), [0.5, 0.3, 0.4, 0.2]),
            (unit_excitation, [1.0, 1.0, 1.0, 1.0]),
        ]
        T = 5.0
        for params, v in cases:
            analytic = finite_T_laplace(params, v, T, LaplaceSettings().grid(params, T))
            estimate, stderr = self.analyzer.empirical_finite_laplace(params, v, T, 100000 if SLOW else 1500, 9)
            self.assertLess(abs(estimate - analytic), 4 * stderr + 1e-5)
        with self.assertRaises(DomainError):
            self.analyzer.empirical_finite_laplace(shot_noise(), [0.5, 0.3, 0.4], T, 10, 9)

    def test_samples_frame(self):
        frame = MonteCarloAnalyzer.samples_frame(np.array([[1.0, 2.0], [3.0, 4.0]]))
        self.assertEqual(list(frame.columns), ['path', 'lambda1', 'lambda2'])
        self.assertEqual(frame['path'].tolist(), [0, 1])


class TestVerify(unittest.TestCase):

    def setUp(self):
        self.logger = Mock(spec=logging.Logger)
        self.analyzer = MonteCarloAnalyzer(self.logger)

    def test_shot_noise_passes(self):
        config = VerifyConfig(n_paths=2000, seed=3, v_panel=((0.5, 0.0), (1.0, 0.0), (0.0, 1.0)))
        report = self.analyzer.verify(shot_noise(), config)
        self.assertTrue(report.passed, report.to_text())
        self.assertFalse(report.non_stationary)
        names = [row.name for row in report.rows]
        self.assertEqual(names[:5], ['mean1', 'mean2', 'variance1', 'variance2', 'cross_moment'])
        self.assertNotIn('correlation', names)
        self.assertIn('laplace(0.5,0)', names)
        self.assertEqual(report.t_sample, 20.0)

    def test_non_stationary_report(self):
        report = self.analyzer.verify(explosive(), VerifyConfig(n_paths=10))
        self.assertTrue(report.non_stationary)
        self.assertFalse(report.passed)
        self.assertEqual(report.rows, [])
        self.assertIn('not stationary', report.to_text())
        self.assertFalse(report.to_dict()['pass'])

    def test_near_critical_doubles_burn_in(self):
        config = VerifyConfig(n_paths=3, burn_in=5.0, v_panel=(), z_threshold=1e9)
        report = self.analyzer.verify(near_critical(), config)
        self.assertAlmostEqual(report.burn_in, 10.0)
        self.assertAlmostEqual(report.t_sample, 10.0)
        self.assertTrue(any(w.startswith('Slow mixing near criticality') for w in report.warnings))

    def test_report_text_lists_every_row(self):
        config = VerifyConfig(n_paths=200, seed=1, v_panel=((1.0, 1.0),))
        report = self.analyzer.verify(asymmetric(), config)
        text = report.to_text()
        for row in report.rows:
            self.assertIn(row.name, text)
        self.assertEqual(len(report.to_dict()['rows']), len(report.rows))

    def test_benchmark_passes_with_fewer_paths(self):
        params = symmetric_benchmark()
        config = VerifyConfig(n_paths=4000, seed=11)
        report = self.analyzer.verify(params, config)
        self.assertTrue(report.passed, report.to_text())
        self.assertEqual(report.samples.shape, (4000, 2))
        solver = LaplaceSolver(Mock(spec=logging.Logger))
        rows = {row.name: row for row in report.rows}
        for v1, v2 in config.v_panel:
            expected = solver.evaluate(params, v1, v2, tol=config.tol).value
            self.assertAlmostEqual(rows[f'laplace({v1:g},{v2:g})'].analytic, expected, places=14)

    @unittest.skipUnless(SLOW, "set CONTAGION_SLOW_TESTS=1 for full-scale verification")

    def test_benchmark_passes_at_full_scale(self):
        params = symmetric_benchmark()
        analyzer = MonteCarloAnalyzer(self.logger, threads=os.cpu_count() or 1)
        report = analyzer.verify(params, VerifyConfig(n_paths=100000, seed=0))
        self.assertTrue(report.passed, report.to_text())
        analytic = moment_report(params)
        self.assertAlmostEqual(report.rows[0].analytic, analytic.mean[0], places=12)


class TestIncrementStationarity(unittest.TestCase):

    def setUp(self):
        self.logger = Mock(spec=logging.Logger)
        self.analyzer = MonteCarloAnalyzer(self.logger)

    def test_poisson_counts_pass(self):
        report = self.analyzer.increment_stationarity_test(_poisson_only(), [25.0, 40.0], [1.0, 2.0], 300, 4,
                                                           include_external=True)
        self.assertTrue(report.passed)
        self.assertFalse(report.non_stationary)
        self.assertEqual(len(report.rows), 4)
        self.assertAlmostEqual(report.corrected_alpha, 0.01 / 4)

    def test_explosive_counts_fail(self):
        report = self.analyzer.increment_stationarity_test(explosive(), [0.0, 15.0], [2.0], 200, 4)
        self.assertTrue(report.non_stationary)
        self.assertFalse(report.passed)
        self.assertTrue(report.warnings)

    def test_early_window_warns(self):
        report = self.analyzer.increment_stationarity_test(_poisson_only(), [1.0, 30.0], [1.0], 50, 0,
                                                           include_external=True)
        self.assertTrue(any('burn-in' in w for w in report.warnings))
        self.assertEqual(set(report.to_dict()), {'pass', 'alpha', 'corrected_alpha', 'n_paths',
                                                 'non_stationary', 'warnings', 'rows'})

    def test_argument_checks(self):
        with self.assertRaises(DomainError):
            self.analyzer.increment_stationarity_test(_poisson_only(), [10.0], [1.0], 50, 0)
        with self.assertRaises(DomainError):
            self.analyzer.increment_stationarity_test(_poisson_only(), [10.0, 20.0], [], 50, 0)


if __name__ == '__main__':
    unittest.main()

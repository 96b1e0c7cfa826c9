"""
Monte Carlo estimators and analytic-versus-empirical verification.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import ks_2samp

from .errors import DomainError
from .laplace import LaplaceSettings, LaplaceSolver
from .model import ModelParams
from .simulator import (counts_at, default_burn_in, intensity_at, layer_intensities_at,
                        simulate_cluster, simulate_thinning)
from .stationarity import check_c2, moment_report

ALGORITHMS = ('thinning', 'cluster')
DEFAULT_V_PANEL = ((0.5, 0.5), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0))
NEAR_CRITICAL_RADIUS = 0.8
MAX_BATCHES = 100


@dataclass(frozen=True)
class _Chunk:
    params: ModelParams
    algorithm: str
    generations: int
    horizon: float
    seed: int
    path_ids: Tuple[int, ...]
    observe: str = 'intensity'
    times: Tuple[float, ...] = ()
    include_external: bool = False


def _simulate(chunk: _Chunk, path_id: int):
    if chunk.algorithm == 'cluster':
        return simulate_cluster(chunk.params, chunk.horizon, chunk.generations, chunk.seed, path_id)
    return simulate_thinning(chunk.params, chunk.horizon, chunk.seed, path_id)


def _external_counts(history, t: float) -> Tuple[int, int]:
    external = [e.kind.component for e in history.events if e.kind.is_external and e.time <= t]
    return external.count(1), external.count(2)


def _run_chunk(chunk: _Chunk) -> np.ndarray:
    """Simulate the paths of one chunk and return one row of observations per path."""
    rows = []
    for path_id in chunk.path_ids:
        history = _simulate(chunk, path_id)
        if chunk.observe == 'layers':
            rows.append(layer_intensities_at(history, chunk.params, chunk.horizon))
        elif chunk.observe == 'counts':
            row = []
            for t in chunk.times:
                n1, n2 = counts_at(history, t)
                if chunk.include_external:
                    e1, e2 = _external_counts(history, t)
                    n1, n2 = n1 + e1, n2 + e2
                row.extend((n1, n2))
            rows.append(row)
        else:
            rows.append(intensity_at(history, chunk.params, chunk.horizon))
    return np.asarray(rows, dtype=float)


@dataclass(frozen=True)
class Estimate:
    est: float
    stderr: float

    def to_dict(self) -> Dict[str, Optional[float]]:
        return {'est': _json_float(self.est), 'stderr': _json_float(self.stderr)}


def _json_float(value: float) -> Optional[float]:
    return float(value) if value is not None and math.isfinite(value) else None


@dataclass(frozen=True)
class MomentEstimate:
    mean: Tuple[Estimate, Estimate]
    variance: Tuple[Estimate, Estimate]
    cross_moment: Estimate
    correlation: Estimate
    n_paths: int
    t_sample: float
    burn_in: float
    stationary: bool = True
    spectral_radius: float = 0.0
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mean': [e.to_dict() for e in self.mean],
            'variance': [e.to_dict() for e in self.variance],
            'cross_moment': self.cross_moment.to_dict(),
            'correlation': self.correlation.to_dict(),
            'n_paths': self.n_paths,
            't_sample': self.t_sample,
            'burn_in': self.burn_in,
            'stationary': self.stationary,
            'spectral_radius': self.spectral_radius,
            'warnings': list(self.warnings),
        }


@dataclass(frozen=True)
class VerificationRow:
    name: str
    analytic: float
    empirical: float
    stderr: float
    z_score: Optional[float]
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'analytic': _json_float(self.analytic),
            'empirical': _json_float(self.empirical),
            'stderr': _json_float(self.stderr),
            'z_score': _json_float(self.z_score) if self.z_score is not None else None,
            'pass': self.passed,
        }


@dataclass(frozen=True)
class VerificationReport:
    rows: List[VerificationRow]
    passed: bool
    non_stationary: bool
    spectral_radius: float
    n_paths: int
    t_sample: float
    burn_in: float
    z_threshold: float
    warnings: List[str] = field(default_factory=list)
    samples: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'pass': self.passed,
            'non_stationary': self.non_stationary,
            'spectral_radius': self.spectral_radius,
            'n_paths': self.n_paths,
            't_sample': self.t_sample,
            'burn_in': self.burn_in,
            'z_threshold': self.z_threshold,
            'warnings': list(self.warnings),
            'rows': [row.to_dict() for row in self.rows],
        }

    def to_text(self) -> str:
        lines = [f"Verification {'PASSED' if self.passed else 'FAILED'} "
                 f"(radius {self.spectral_radius:.6g}, {self.n_paths} paths, T = {self.t_sample:.6g})"]
        if self.non_stationary:
            lines.append("Model is not stationary: no comparisons were made")
        for warning in self.warnings:
            lines.append(f"warning: {warning}")
        if self.rows:
            lines.append(f"{'quantity':<22}{'analytic':>14}{'empirical':>14}{'stderr':>12}{'z':>9}  pass")
            for row in self.rows:
                z = f"{row.z_score:9.3f}" if row.z_score is not None else f"{'-':>9}"
                lines.append(f"{row.name:<22}{row.analytic:14.6g}{row.empirical:14.6g}"
                             f"{row.stderr:12.4g}{z}  {'yes' if row.passed else 'NO'}")
        return '\n'.join(lines)


@dataclass(frozen=True)
class VerifyConfig:
    n_paths: int = 10000
    horizon: Optional[float] = None
    burn_in: Optional[float] = None
    v_panel: Tuple[Tuple[float, float], ...] = DEFAULT_V_PANEL
    z_threshold: float = 4.0
    seed: int = 0
    algorithm: str = 'thinning'
    generations: int = 30
    tol: float = 1e-8


@dataclass(frozen=True)
class IncrementRow:
    window: float
    reference_window: float
    lag: float
    component: int
    statistic: float
    p_value: float
    passed: bool


@dataclass(frozen=True)
class IncrementTestReport:
    rows: List[IncrementRow]
    alpha: float
    corrected_alpha: float
    passed: bool
    n_paths: int
    non_stationary: bool = False
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'pass': self.passed,
            'alpha': self.alpha,
            'corrected_alpha': self.corrected_alpha,
            'n_paths': self.n_paths,
            'non_stationary': self.non_stationary,
            'warnings': list(self.warnings),
            'rows': [asdict(row) for row in self.rows],
        }


def _batches(n: int) -> int:
    return min(MAX_BATCHES, max(2, n // 10))


def _batch_stderr(values: np.ndarray) -> float:
    finite = values[np.isfinite(values)]
    if finite.size < 2:
        return math.nan
    return float(np.std(finite, ddof=1) / math.sqrt(finite.size))


def _correlation(x: np.ndarray, y: np.ndarray) -> float:
    sx, sy = np.std(x), np.std(y)
    if sx == 0.0 or sy == 0.0:
        return math.nan
    return float(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sy))


def moment_estimate_from_samples(samples: np.ndarray, t_sample: float, burn_in: float,
                                 stationary: bool = True, radius: float = 0.0,
                                 warnings: Optional[List[str]] = None) -> MomentEstimate:
    """
    Moment estimates from an (n_paths, 2) array of intensities.

    Means use the i.i.d. standard error of independent paths; variances,
    the cross moment and the correlation use batch means over contiguous
    groups of paths.
    """
    n = samples.shape[0]
    x, y = samples[:, 0], samples[:, 1]
    groups = np.array_split(np.arange(n), _batches(n))
    batch_var1 = np.array([np.var(x[g]) for g in groups])
    batch_var2 = np.array([np.var(y[g]) for g in groups])
    batch_cross = np.array([np.mean(x[g] * y[g]) for g in groups])
    batch_corr = np.array([_correlation(x[g], y[g]) for g in groups])

    def mean_estimate(values: np.ndarray) -> Estimate:
        return Estimate(float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(n)))

    return MomentEstimate(
        mean=(mean_estimate(x), mean_estimate(y)),
        variance=(Estimate(float(np.var(x, ddof=1)), _batch_stderr(batch_var1)),
                  Estimate(float(np.var(y, ddof=1)), _batch_stderr(batch_var2))),
        cross_moment=Estimate(float(np.mean(x * y)), _batch_stderr(batch_cross)),
        correlation=Estimate(_correlation(x, y), _batch_stderr(batch_corr)),
        n_paths=n,
        t_sample=t_sample,
        burn_in=burn_in,
        stationary=stationary,
        spectral_radius=radius,
        warnings=list(warnings or []),
    )


def laplace_estimate_from_samples(samples: np.ndarray, v1: float, v2: float) -> Estimate:
    values = np.exp(-v1 * samples[:, 0] - v2 * samples[:, 1])
    return Estimate(float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(len(values))))


def _z_row(name: str, analytic: float, empirical: float, stderr: float, threshold: float) -> VerificationRow:
    if not math.isfinite(analytic) or not math.isfinite(empirical) or not math.isfinite(stderr):
        return VerificationRow(name, analytic, empirical, stderr, None, False)
    diff = empirical - analytic
    if stderr == 0.0:
        z = 0.0 if abs(diff) <= 1e-12 * max(1.0, abs(analytic)) else math.inf
    else:
        z = diff / stderr
    return VerificationRow(name, analytic, empirical, stderr, z, abs(z) <= threshold)


class MonteCarloAnalyzer:
    """
    Ensemble estimators over independent simulated paths.

    Path ``i`` of a run seeded with ``seed`` always uses the stream derived
    from (seed, i), so results do not depend on ``threads``.
    """

    def __init__(self, logger: logging.Logger, threads: int = 1,
                 laplace_settings: Optional[LaplaceSettings] = None):
        if threads < 1:
            raise DomainError(f"threads must be >= 1, got {threads}")
        self.logger = logger
        self.threads = threads
        self.laplace_settings = laplace_settings or LaplaceSettings()

    def _collect(self, template: _Chunk, n_paths: int) -> np.ndarray:
        chunk_count = max(1, min(n_paths, self.threads * 4))
        ids = np.array_split(np.arange(n_paths), chunk_count)
        chunks = [replace(template, path_ids=tuple(int(i) for i in part)) for part in ids]
        self.logger.debug(f"Simulating {n_paths} paths in {len(chunks)} chunks on {self.threads} worker(s)")
        if self.threads == 1:
            results = [_run_chunk(chunk) for chunk in chunks]
        else:
            with ProcessPoolExecutor(max_workers=self.threads) as executor:
                results = list(executor.map(_run_chunk, chunks))
        return np.vstack([r for r in results if r.size]) if any(r.size for r in results) else np.empty((0, 2))

    def sample_stationary(self, params: ModelParams, n_paths: int, horizon: float, seed: int,
                          algorithm: str = 'thinning', generations: int = 30) -> np.ndarray:
        """(lambda1, lambda2) at ``horizon`` for ``n_paths`` independent paths."""
        if algorithm not in ALGORITHMS:
            raise DomainError(f"Unknown algorithm '{algorithm}' (expected one of: {', '.join(ALGORITHMS)})")
        template = _Chunk(params, algorithm, generations, float(horizon), int(seed), ())
        return self._collect(template, n_paths)

    def estimate_moments(self, params: ModelParams, n_paths: int, horizon: float, burn_in: float, seed: int,
                         algorithm: str = 'thinning', generations: int = 30) -> MomentEstimate:
        """
        Estimate stationary moments from intensities sampled at T = horizon.

        Non-stationary models are simulated all the same; the estimate is
        flagged and carries a warning.

        Raises:
            DomainError: If horizon <= burn_in or n_paths < 2
        """
        samples = self._stationary_samples(params, n_paths, horizon, burn_in, seed, algorithm, generations)
        ok, radius = check_c2(params)
        warnings = [] if ok else [f"Model is not stationary (radius {radius:.6g}); moments diverge with T"]
        for warning in warnings:
            self.logger.warning(warning)
        return moment_estimate_from_samples(samples, float(horizon), float(burn_in), ok, radius, warnings)

    def empirical_laplace(self, params: ModelParams, v1: float, v2: float, n_paths: int, horizon: float,
                          burn_in: float, seed: int, algorithm: str = 'thinning',
                          generations: int = 30) -> Tuple[float, float]:
        """Sample mean of exp(-v1 lambda1_T - v2 lambda2_T) and its standard error."""
        samples = self._stationary_samples(params, n_paths, horizon, burn_in, seed, algorithm, generations)
        estimate = laplace_estimate_from_samples(samples, v1, v2)
        return estimate.est, estimate.stderr

    def _stationary_samples(self, params: ModelParams, n_paths: int, horizon: float, burn_in: float, seed: int,
                            algorithm: str, generations: int) -> np.ndarray:
        if n_paths < 2:
            raise DomainError(f"n_paths must be >= 2, got {n_paths}")
        if horizon <= burn_in:
            raise DomainError(f"horizon ({horizon}) must exceed burn_in ({burn_in})")
        self.logger.info(f"Sampling {n_paths} {algorithm} paths at T={horizon:.6g} (burn-in {burn_in:.6g})")
        return self.sample_stationary(params, n_paths, horizon, seed, algorithm, generations)

    def empirical_finite_laplace(self, params: ModelParams, v: Sequence[float], horizon: float, n_paths: int,
                                 seed: int) -> Tuple[float, float]:
        """
        Monte Carlo counterpart of finite_T_laplace from cluster paths.

        Returns:
            (estimate, stderr) of E[exp(-sum_j v_j Lambda_j(horizon))]
        """
        vec = np.asarray(v, dtype=float)
        if vec.ndim != 1 or len(vec) == 0 or len(vec) % 2:
            raise DomainError(f"v must have even length, got {vec.size}")
        template = _Chunk(params, 'cluster', len(vec) // 2, float(horizon), int(seed), (), observe='layers')
        layers = self._collect(template, n_paths)
        values = np.exp(-layers @ vec)
        return float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(n_paths))

    def verify(self, params: ModelParams, config: VerifyConfig) -> VerificationReport:
        """
        Compare closed-form stationary quantities with Monte Carlo estimates.

        Rows cover both means, both variances, the cross moment, the
        correlation and the Laplace transform at every panel point. The
        sampled intensities are kept on the report as ``samples``.
        """
        ok, radius = check_c2(params)
        burn_in = config.burn_in if config.burn_in is not None else default_burn_in(params)
        if not ok:
            message = f"Model is not stationary (radius {radius:.6g}); intensities diverge, no comparisons made"
            self.logger.warning(message)
            return VerificationReport([], False, True, radius, config.n_paths, burn_in, burn_in,
                                      config.z_threshold, [message])

        warnings = []
        if radius > NEAR_CRITICAL_RADIUS:
            burn_in *= 2.0
            warnings.append(f"Slow mixing near criticality (radius {radius:.4g}); burn-in doubled to {burn_in:.6g}")
            self.logger.warning(warnings[-1])

        t_sample = max(config.horizon or 0.0, burn_in)
        try:
            report = moment_report(params)
            self.logger.info(f"Verifying against closed forms with {config.n_paths} paths at T={t_sample:.6g}")
            samples = self.sample_stationary(params, config.n_paths, t_sample, config.seed,
                                             config.algorithm, config.generations)
            estimate = moment_estimate_from_samples(samples, t_sample, burn_in, True, radius)

            z = config.z_threshold
            rows = [
                _z_row('mean1', report.mean[0], estimate.mean[0].est, estimate.mean[0].stderr, z),
                _z_row('mean2', report.mean[1], estimate.mean[1].est, estimate.mean[1].stderr, z),
                _z_row('variance1', report.variance[0], estimate.variance[0].est, estimate.variance[0].stderr, z),
                _z_row('variance2', report.variance[1], estimate.variance[1].est, estimate.variance[1].stderr, z),
                _z_row('cross_moment', report.second[2], estimate.cross_moment.est, estimate.cross_moment.stderr, z),
            ]
            if math.isfinite(report.correlation):
                rows.append(_z_row('correlation', report.correlation, estimate.correlation.est,
                                   estimate.correlation.stderr, z))
            solver = LaplaceSolver(self.logger, self.laplace_settings)
            for v1, v2 in config.v_panel:
                analytic = solver.evaluate(params, v1, v2, tol=config.tol).value
                empirical = laplace_estimate_from_samples(samples, v1, v2)
                rows.append(_z_row(f'laplace({v1:g},{v2:g})', analytic, empirical.est, empirical.stderr, z))
        except Exception as e:
            self.logger.error(f"Verification failed: {str(e)}")
            raise

        passed = all(row.passed for row in rows)
        self.logger.info(f"Verification {'passed' if passed else 'failed'}: "
                         f"{sum(r.passed for r in rows)}/{len(rows)} rows within |z| <= {config.z_threshold}")
        return VerificationReport(rows, passed, False, radius, config.n_paths, t_sample, burn_in,
                                  config.z_threshold, warnings, samples)

    def increment_stationarity_test(self, params: ModelParams, windows: Sequence[float], lags: Sequence[float],
                                    n_paths: int, seed: int, alpha: float = 0.01,
                                    include_external: bool = False,
                                    burn_in: Optional[float] = None) -> IncrementTestReport:
        """
        Two-sample KS tests of N_{t+h} - N_t across window starts t.

        Every later window is compared with the first one, per lag and per
        component, on independent path sets. Integer increments are jittered
        by U(0, 1) to break ties, and the level is Bonferroni-corrected.
        """
        windows = sorted(float(w) for w in windows)
        lags = [float(h) for h in lags]
        if len(windows) < 2 or not lags:
            raise DomainError("Need at least two windows and one lag")
        if n_paths < 2:
            raise DomainError(f"n_paths must be >= 2, got {n_paths}")

        ok, radius = check_c2(params)
        warnings = []
        if not ok:
            warnings.append(f"Model is not stationary (radius {radius:.6g}); increments are expected to drift")
        burn_in = burn_in if burn_in is not None else default_burn_in(params)
        if ok and windows[0] < burn_in:
            warnings.append(f"First window {windows[0]:.6g} starts before the burn-in {burn_in:.6g}")
        for warning in warnings:
            self.logger.warning(warning)

        increments = []
        for index, start in enumerate(windows):
            window_seed = int(np.random.SeedSequence([int(seed), index]).generate_state(1)[0])
            times = (start,) + tuple(start + h for h in lags)
            template = _Chunk(params, 'thinning', 0, start + max(lags), window_seed, (),
                              observe='counts', times=times, include_external=include_external)
            counts = self._collect(template, n_paths).reshape(n_paths, len(times), 2)
            increments.append(counts[:, 1:, :] - counts[:, :1, :])

        jitter = np.random.default_rng(np.random.SeedSequence([int(seed), len(windows)]))
        tests = (len(windows) - 1) * len(lags) * 2
        corrected = alpha / tests
        rows = []
        for index in range(1, len(windows)):
            for j, lag in enumerate(lags):
                for component in (0, 1):
                    reference = increments[0][:, j, component] + jitter.random(n_paths)
                    current = increments[index][:, j, component] + jitter.random(n_paths)
                    result = ks_2samp(reference, current)
                    rows.append(IncrementRow(windows[index], windows[0], lag, component + 1,
                                             float(result.statistic), float(result.pvalue),
                                             bool(result.pvalue >= corrected)))

        passed = all(row.passed for row in rows)
        self.logger.info(f"Increment stationarity {'passed' if passed else 'failed'} over {tests} KS tests")
        return IncrementTestReport(rows, alpha, corrected, passed, n_paths, not ok, warnings)

    @staticmethod
    def samples_frame(samples: np.ndarray) -> pd.DataFrame:
        return pd.DataFrame({'path': np.arange(len(samples)), 'lambda1': samples[:, 0], 'lambda2': samples[:, 1]})

"""
Contagion toolkit - stationarity, moments, Laplace
transforms, simulation and Monte Carlo verification.
"""

from .analysis import (IncrementTestReport, MomentEstimate, MonteCarloAnalyzer, VerificationReport,
                       VerificationRow, VerifyConfig)
from .contagion_runner import ContagionRunner, SimulationOutput
from .errors import (ContagionError, ConvergenceError, DomainError, ModelValidationError, NonStationaryError,
                     SingularSystemError)
from .file_processor import FileProcessor
from .laplace import (LaplaceGrid, LaplaceResult, LaplaceSettings, LaplaceSolver, TimeGrid, finite_T_laplace,
                      limiting_laplace, limiting_laplace_finite, limiting_laplace_general, solve_l,
                      stationarity_residual)
from .logger import LoggerFactory
from .marks import MarkDistribution, MarkKind, laplace_complement, mark_laplace, mark_moments, sample_mark
from .model import ModelParams, ValidationReport, validate
from .run_config import RunConfig
from .simulator import (EventHistory, EventKind, EventRecord, IntensityPath, intensity_at, simulate_cluster,
                        simulate_thinning)
from .stationarity import (ExcitationMatrix, check_c2, excitation_matrix, moment_report, spectral_radius,
                           stationary_mean, stationary_second_moments, stationary_variance_correlation)

__all__ = [
    'ContagionError',
    'ContagionRunner',
    'SimulationOutput',
    'ConvergenceError',
    'DomainError',
    'EventHistory',
    'EventKind',
    'EventRecord',
    'ExcitationMatrix',
    'FileProcessor',
    'IncrementTestReport',
    'IntensityPath',
    'LaplaceGrid',
    'LaplaceResult',
    'LaplaceSettings',
    'LaplaceSolver',
    'LoggerFactory',
    'MarkDistribution',
    'MarkKind',
    'ModelParams',
    'ModelValidationError',
    'MomentEstimate',
    'MonteCarloAnalyzer',
    'NonStationaryError',
    'RunConfig',
    'SingularSystemError',
    'TimeGrid',
    'ValidationReport',
    'VerificationReport',
    'VerificationRow',
    'VerifyConfig',
    'check_c2',
    'excitation_matrix',
    'finite_T_laplace',
    'intensity_at',
    'laplace_complement',
    'limiting_laplace',
    'limiting_laplace_finite',
    'limiting_laplace_general',
    'mark_laplace',
    'mark_moments',
    'moment_report',
    'sample_mark',
    'simulate_cluster',
    'simulate_thinning',
    'solve_l',
    'spectral_radius',
    'stationarity_residual',
    'stationary_mean',
    'stationary_second_moments',
    'stationary_variance_correlation',
    'validate',
]

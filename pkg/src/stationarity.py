"""
Stationarity condition and closed-form stationary moments.

The excitation matrix collects mean-mark-to-decay ratios; the model admits a
stationary law when its spectral radius is strictly below one. Under that
condition the first two stationary moments of (lambda1, lambda2) solve small
linear systems that are evaluated here in closed form.
"""

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, Tuple

import numpy as np

from .errors import DomainError, NonStationaryError, SingularSystemError

if TYPE_CHECKING:
    from .model import ModelParams

# Radii closer to one than this are treated as the boundary.
C2_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class ExcitationMatrix:
    """[[mu_G22/delta2, mu_G12/delta2], [mu_G21/delta1, mu_G11/delta1]]"""

    a11: float
    a12: float
    a21: float
    a22: float

    def __post_init__(self):
        for name in ('a11', 'a12', 'a21', 'a22'):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise DomainError(f"Excitation entry {name} must be finite and >= 0, got {value}")

    @property
    def entries(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        return (self.a11, self.a12), (self.a21, self.a22)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    @property
    def determinant(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21


def excitation_matrix(params: 'ModelParams') -> ExcitationMatrix:
    return ExcitationMatrix(
        a11=params.g22.mean / params.delta2,
        a12=params.g12.mean / params.delta2,
        a21=params.g21.mean / params.delta1,
        a22=params.g11.mean / params.delta1,
    )


def spectral_radius(m: ExcitationMatrix) -> float:
    """
    Largest eigenvalue of a non-negative 2x2 matrix.

    Evaluates (tr + sqrt(tr^2 - 4 det)) / 2 with the discriminant rewritten as
    (a11 - a22)^2 + 4 a12 a21, which is non-negative for these matrices.
    """
    discriminant = (m.a11 - m.a22) ** 2 + 4.0 * m.a12 * m.a21
    return 0.5 * (m.trace + math.sqrt(discriminant))


def sum_form_radius(m: ExcitationMatrix) -> float:
    """
    The alternative closed form (x + y + sqrt((x + y)^2 + 4uv)) / 2.

    Reported next to the true radius for comparison; it bounds the radius
    from above and coincides with it only when one diagonal entry is zero.
    """
    x, y = m.a22, m.a11
    u, v = m.a12, m.a21
    return 0.5 * (x + y + math.sqrt((x + y) ** 2 + 4.0 * u * v))


def check_c2(params: 'ModelParams') -> Tuple[bool, float]:
    radius = spectral_radius(excitation_matrix(params))
    return radius < 1.0 - C2_BOUNDARY_TOL, radius


def near_boundary(radius: float) -> bool:
    return abs(1.0 - radius) <= C2_BOUNDARY_TOL


def require_stationary(params: 'ModelParams') -> float:
    """Return the spectral radius or raise NonStationaryError."""
    ok, radius = check_c2(params)
    if not ok:
        raise NonStationaryError(radius)
    return radius


def _deltas(params: 'ModelParams') -> Tuple[float, float, float]:
    d1 = params.delta1 - params.g11.mean
    d2 = params.delta2 - params.g22.mean
    d = d1 * d2 - params.g12.mean * params.g21.mean
    if d1 <= 0 or d2 <= 0 or d <= 0:
        raise NonStationaryError(
            spectral_radius(excitation_matrix(params)),
            f"Degenerate moment denominators: Delta1={d1}, Delta2={d2}, Delta={d}",
        )
    return d1, d2, d


def mean_coefficients(params: 'ModelParams') -> np.ndarray:
    """
    Coefficients mu_ij with (m1, m2) = mu @ (rho1, rho2).

    Raises:
        NonStationaryError: If the stationarity condition fails
    """
    require_stationary(params)
    d1, d2, d = _deltas(params)
    mu_h1, mu_h2 = params.h1.mean, params.h2.mean
    return np.array([
        [d2 * mu_h1 / d, params.g12.mean * mu_h2 / d],
        [params.g21.mean * mu_h1 / d, d1 * mu_h2 / d],
    ])


def stationary_mean(params: 'ModelParams') -> Tuple[float, float]:
    mu = mean_coefficients(params)
    m1, m2 = mu @ np.array([params.rho1, params.rho2])
    return float(m1), float(m2)


def table_coefficients(params: 'ModelParams') -> Dict[str, Dict[str, float]]:
    """
    Coefficients of the three stationary second-moment equations.

    Row A is the equation for E[lambda1^2], row B for E[lambda2^2] and row C
    for E[lambda1 lambda2]. Each row reads
    X11 * m2_1 + X22 * m2_2 + X12 * m12 + X1 * m1 + X2 * m2 + X0 = 0.
    """
    require_stationary(params)
    d1, d2, _ = _deltas(params)
    g11, g12, g21, g22 = params.g11, params.g12, params.g21, params.g22
    h1, h2 = params.h1, params.h2
    rho1, rho2 = params.rho1, params.rho2
    return {
        'A': {
            'X11': -2.0 * d1, 'X22': 0.0, 'X12': 2.0 * g12.mean,
            'X1': 2.0 * h1.mean * rho1 + g11.second_moment,
            'X2': g12.second_moment,
            'X0': h1.second_moment * rho1,
        },
        'B': {
            'X11': 0.0, 'X22': -2.0 * d2, 'X12': 2.0 * g21.mean,
            'X1': g21.second_moment,
            'X2': 2.0 * h2.mean * rho2 + g22.second_moment,
            'X0': h2.second_moment * rho2,
        },
        'C': {
            'X11': g21.mean, 'X22': g12.mean, 'X12': -d1 - d2,
            'X1': h2.mean * rho2 + g11.mean * g21.mean,
            'X2': h1.mean * rho1 + g12.mean * g22.mean,
            'X0': 0.0,
        },
    }


def _det3(m: np.ndarray) -> float:
    return float(
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )


def stationary_second_moments(params: 'ModelParams') -> Tuple[float, float, float]:
    """
    Solve for (E[lambda1^2], E[lambda2^2], E[lambda1 lambda2]) by Cramer's rule.

    Raises:
        NonStationaryError: If the stationarity condition fails
        SingularSystemError: If the system determinant vanishes
    """
    table = table_coefficients(params)
    m1, m2 = stationary_mean(params)

    matrix = np.array([[table[row]['X11'], table[row]['X22'], table[row]['X12']] for row in 'ABC'])
    rhs = np.array([
        -(table[row]['X1'] * m1 + table[row]['X2'] * m2 + table[row]['X0']) for row in 'ABC'
    ])

    det = _det3(matrix)
    scale = float(np.max(np.abs(matrix))) ** 3
    if scale == 0.0 or abs(det) <= 1e-14 * scale:
        raise SingularSystemError(
            spectral_radius(excitation_matrix(params)),
            f"Second-moment system is singular (det={det})",
        )

    solution = []
    for column in range(3):
        replaced = matrix.copy()
        replaced[:, column] = rhs
        solution.append(_det3(replaced) / det)
    return solution[0], solution[1], solution[2]


def variance_coefficients(params: 'ModelParams') -> np.ndarray:
    """
    Coefficients gamma_ij with (v1, v2) = gamma @ (rho1, rho2).

    The stationary variances and covariance are linear in the source terms
    S1, S2, S3 below, and each source is linear in (rho1, rho2) through the
    mean coefficients.
    """
    mu = mean_coefficients(params)
    d1, d2, d = _deltas(params)
    g11, g12, g21, g22 = params.g11, params.g12, params.g21, params.g22
    cross = g12.mean * g21.mean
    total = d1 + d2

    gamma = np.zeros((2, 2))
    for j in range(2):
        s1 = g11.second_moment * mu[0, j] + g12.second_moment * mu[1, j] + (params.h1.second_moment if j == 0 else 0.0)
        s2 = g22.second_moment * mu[1, j] + g21.second_moment * mu[0, j] + (params.h2.second_moment if j == 1 else 0.0)
        s3 = g11.mean * g21.mean * mu[0, j] + g12.mean * g22.mean * mu[1, j]

        gamma[0, j] = (
            (d2 - cross / total) / (2.0 * d) * s1
            + g12.mean ** 2 / (2.0 * d * total) * s2
            + g12.mean * d2 / (d * total) * s3
        )
        gamma[1, j] = (
            (d1 - cross / total) / (2.0 * d) * s2
            + g21.mean ** 2 / (2.0 * d * total) * s1
            + g21.mean * d1 / (d * total) * s3
        )
    return gamma


def stationary_variance_correlation(params: 'ModelParams') -> Tuple[float, float, float]:
    """
    Stationary variances from the gamma coefficients and the correlation.

    Returns:
        (v1, v2, rho12); rho12 is NaN when either variance is zero
    """
    gamma = variance_coefficients(params)
    v1, v2 = gamma @ np.array([params.rho1, params.rho2])
    m1, m2 = stationary_mean(params)
    _, _, m12 = stationary_second_moments(params)
    if v1 <= 0.0 or v2 <= 0.0:
        return float(v1), float(v2), math.nan
    rho12 = (m12 - m1 * m2) / math.sqrt(v1 * v2)
    return float(v1), float(v2), float(min(1.0, max(-1.0, rho12)))


def _finite_or_none(value: float):
    return value if math.isfinite(value) else None


@dataclass(frozen=True)
class MomentReport:
    """All closed-form stationary quantities with their intermediates."""

    mean: Tuple[float, float]
    second: Tuple[float, float, float]
    variance: Tuple[float, float]
    correlation: float
    delta1: float
    delta2: float
    delta: float
    mu_coefficients: Tuple[Tuple[float, float], Tuple[float, float]]
    gamma_coefficients: Tuple[Tuple[float, float], Tuple[float, float]]
    table: Dict[str, Dict[str, float]] = field(default_factory=dict)
    excitation: Tuple[Tuple[float, float], Tuple[float, float]] = ((0.0, 0.0), (0.0, 0.0))
    spectral_radius: float = 0.0

    @property
    def covariance(self) -> float:
        return self.second[2] - self.mean[0] * self.mean[1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mean': {'m1': self.mean[0], 'm2': self.mean[1]},
            'second': {'m2_1': self.second[0], 'm2_2': self.second[1], 'm12': self.second[2]},
            'variance': {'v1': self.variance[0], 'v2': self.variance[1]},
            'covariance': self.covariance,
            'correlation': _finite_or_none(self.correlation),
            'deltas': {'Delta1': self.delta1, 'Delta2': self.delta2, 'Delta': self.delta},
            'mu_coefficients': [list(row) for row in self.mu_coefficients],
            'gamma_coefficients': [list(row) for row in self.gamma_coefficients],
            'table': self.table,
            'excitation_matrix': [list(row) for row in self.excitation],
            'spectral_radius': self.spectral_radius,
        }


def moment_report(params: 'ModelParams') -> MomentReport:
    """
    Build the full stationary moment report.

    Raises:
        NonStationaryError: If the stationarity condition fails
    """
    radius = require_stationary(params)
    d1, d2, d = _deltas(params)
    mu = mean_coefficients(params)
    gamma = variance_coefficients(params)
    v1, v2, rho12 = stationary_variance_correlation(params)
    matrix = excitation_matrix(params)
    return MomentReport(
        mean=stationary_mean(params),
        second=stationary_second_moments(params),
        variance=(v1, v2),
        correlation=rho12,
        delta1=d1,
        delta2=d2,
        delta=d,
        mu_coefficients=tuple(tuple(float(x) for x in row) for row in mu),
        gamma_coefficients=tuple(tuple(float(x) for x in row) for row in gamma),
        table=table_coefficients(params),
        excitation=matrix.entries,
        spectral_radius=radius,
    )

"""
Laplace transforms of the intensity through the recursive l-function system.

For a generation-stacked vector of length m = 2n the functions l_1 .. l_m obey

    l_1(t)      = v_{2n}   exp(-delta2 t)
    l_2(t)      = v_{2n-1} exp(-delta1 t)
    l_{2k+1}'   = -delta2 l_{2k+1} + 1 - g12^(l_{2k}) g22^(l_{2k-1})
    l_{2k+2}'   = -delta1 l_{2k+2} + 1 - g11^(l_{2k}) g21^(l_{2k-1})

with l_j(0) = v_{2n+1-j}. Odd indices belong to component 2 and even indices
to component 1. An event of component k moves both intensities at the same
instant, so its two jumps enter through the product of their transforms.
Each l_{k} is obtained from the previous pair through the variation-of-constants
integral, evaluated with composite trapezoids on a TimeGrid, and

    c(T) = rho1 int_0^T (1 - h1^(l_{2n})) + rho2 int_0^T (1 - h2^(l_{2n-1})).
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid, trapezoid

from .errors import ConvergenceError, DomainError
from .marks import ArrayLike, MarkDistribution
from .model import ModelParams
from .stationarity import require_stationary

# exp(_SEGMENT) bounds the growth factor inside one convolution block.
_SEGMENT = 50.0
_EPS = np.finfo(float).eps


class GridScheme(str, Enum):
    UNIFORM = 'uniform'
    GEOMETRIC = 'geometric'


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing time points from 0 to t_max."""

    t_max: float
    points: np.ndarray
    scheme: GridScheme
    dt: float = 0.0
    dt0: float = 0.0
    ratio: float = 1.0
    max_dt: Optional[float] = None

    @classmethod
    def uniform(cls, t_max: float, dt: float) -> 'TimeGrid':
        if t_max < 0 or dt <= 0:
            raise DomainError(f"Uniform grid needs t_max >= 0 and dt > 0, got {t_max}, {dt}")
        steps = max(1, int(math.ceil(t_max / dt - 1e-9))) if t_max > 0 else 0
        points = np.linspace(0.0, t_max, steps + 1) if steps else np.zeros(1)
        return cls(t_max=float(t_max), points=points, scheme=GridScheme.UNIFORM, dt=float(dt))

    @classmethod
    def geometric(cls, t_max: float, dt0: float, ratio: float = 1.02,
                  max_dt: Optional[float] = None) -> 'TimeGrid':
        """
        Steps dt0, dt0*ratio, dt0*ratio^2, ... optionally capped at max_dt.

        The final step is shortened to land exactly on t_max; a sliver
        shorter than a tenth of its predecessor is merged into it.
        """
        if t_max < 0 or dt0 <= 0 or ratio < 1:
            raise DomainError("Geometric grid needs t_max >= 0, dt0 > 0 and ratio >= 1")
        if t_max == 0:
            return cls(t_max=0.0, points=np.zeros(1), scheme=GridScheme.GEOMETRIC,
                       dt0=dt0, ratio=ratio, max_dt=max_dt)

        cap = max_dt if max_dt is not None else math.inf
        if ratio == 1.0:
            n_geo = int(math.ceil(t_max / dt0)) + 1
        else:
            n_geo = int(math.ceil(math.log1p(t_max * (ratio - 1.0) / dt0) / math.log(ratio))) + 1
            if math.isfinite(cap) and cap > dt0:
                n_geo = min(n_geo, int(math.ceil(math.log(cap / dt0) / math.log(ratio))) + 1)
        steps = np.minimum(dt0 * ratio ** np.arange(n_geo), cap)
        covered = float(steps.sum())
        if covered < t_max:
            extra = int(math.ceil((t_max - covered) / cap))
            steps = np.concatenate([steps, np.full(extra, cap)])

        points = np.concatenate([[0.0], np.cumsum(steps)])
        last = int(np.searchsorted(points, t_max, side='left'))
        points = points[:last + 1]
        points[-1] = t_max
        if len(points) > 2 and points[-1] - points[-2] < 0.1 * (points[-2] - points[-3]):
            points = np.delete(points, -2)
        return cls(t_max=float(t_max), points=points, scheme=GridScheme.GEOMETRIC,
                   dt0=dt0, ratio=ratio, max_dt=max_dt)

    def __len__(self) -> int:
        return len(self.points)

    def coarsened(self) -> 'TimeGrid':
        """Every other point, always keeping both end points."""
        points = self.points[::2]
        if points[-1] != self.t_max:
            points = np.append(points, self.t_max)
        return TimeGrid(t_max=self.t_max, points=points, scheme=self.scheme, dt=2 * self.dt,
                        dt0=2 * self.dt0, ratio=self.ratio, max_dt=self.max_dt)

    def refined(self) -> 'TimeGrid':
        """Insert every midpoint, halving each step."""
        mids = 0.5 * (self.points[1:] + self.points[:-1])
        points = np.empty(len(self.points) + len(mids))
        points[0::2] = self.points
        points[1::2] = mids
        return TimeGrid(t_max=self.t_max, points=points, scheme=self.scheme, dt=0.5 * self.dt,
                        dt0=0.5 * self.dt0, ratio=self.ratio, max_dt=self.max_dt)


@dataclass(frozen=True)
class LaplaceSettings:
    """Numerical controls; grid step factors are divided by max(delta1, delta2)."""

    tail_tol: float = 1e-8
    max_generations: int = 64
    max_horizon: float = 1e4
    dt0_factor: float = 1e-4
    ratio: float = 1.02
    max_dt_factor: float = 1e-3
    fd_step: float = 1e-5

    def grid(self, params: ModelParams, t_max: float) -> TimeGrid:
        scale = max(params.delta1, params.delta2)
        return TimeGrid.geometric(t_max, self.dt0_factor / scale, self.ratio, self.max_dt_factor / scale)

    def initial_horizon(self, params: ModelParams, v_max: float) -> float:
        slowest = min(params.delta1, params.delta2)
        if v_max <= self.tail_tol:
            return 1.0 / slowest
        return max(1.0 / slowest, math.log(v_max / self.tail_tol) / slowest)


@dataclass(frozen=True, eq=False)
class LaplaceGrid:
    """l_1 .. l_m and c on a TimeGrid; ``l[j - 1]`` holds l_j."""

    n: int
    v: np.ndarray
    grid: TimeGrid
    l: np.ndarray
    c: np.ndarray

    @property
    def m(self) -> int:
        return 2 * self.n

    def l_function(self, j: int) -> np.ndarray:
        if not 1 <= j <= self.m:
            raise DomainError(f"l-function index must lie in 1..{self.m}, got {j}")
        return self.l[j - 1]

    def at(self, j: int, t: float) -> float:
        """Linear interpolation of l_j between grid points."""
        return float(np.interp(t, self.grid.points, self.l_function(j)))

    def to_frame(self) -> pd.DataFrame:
        data = {'t': self.grid.points}
        for j in range(1, self.m + 1):
            data[f'l_{j}'] = self.l[j - 1]
        data['c'] = self.c
        return pd.DataFrame(data)


@dataclass(frozen=True)
class LaplaceResult:
    v1: float
    v2: float
    value: float
    error_estimate: float
    n_used: int
    horizon: float
    gap: Optional[float] = None
    values_by_generation: List[float] = field(default_factory=list)

    def as_row(self, n_requested: Optional[int]) -> dict:
        return {
            'v1': self.v1,
            'v2': self.v2,
            'n': n_requested if n_requested is not None else '',
            'value': self.value,
            'error_estimate': self.error_estimate,
            'n_used': self.n_used,
        }


def _check_vector(v: Sequence[float]) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or len(arr) == 0 or len(arr) % 2:
        raise DomainError(f"v must be a vector of even length m = 2n, got length {arr.size}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("v must be finite and componentwise >= 0")
    return arr


def _relax(t: np.ndarray, source: np.ndarray, rate: float, y0: float) -> np.ndarray:
    """
    y(t) = exp(-rate t) (y0 + int_0^t exp(rate s) source(s) ds) by trapezoids.

    The exponential weight is re-based every _SEGMENT/rate time units.
    """
    out = np.empty_like(t)
    out[0] = y0
    start, last = 0, len(t) - 1
    while start < last:
        stop = int(np.searchsorted(t, t[start] + _SEGMENT / rate, side='right')) - 1
        stop = min(max(stop, start + 1), last)
        tau = t[start:stop + 1] - t[start]
        growth = np.exp(np.minimum(rate * tau, 700.0))
        acc = cumulative_trapezoid(growth * source[start:stop + 1], tau, initial=0.0)
        out[start:stop + 1] = (out[start] + acc) / growth
        start = stop
    return out


def _joint_complement(to_first: MarkDistribution, x_first: ArrayLike,
                      to_second: MarkDistribution, x_second: ArrayLike) -> ArrayLike:
    """1 - E[exp(-x_first Z1 - x_second Z2)] for the two independent jumps of one event."""
    a = to_first.laplace_complement(x_first)
    b = to_second.laplace_complement(x_second)
    return a + b - a * b


def _layer_sources(params: ModelParams, odd: ArrayLike, even: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Sources of the next (component 2, component 1) pair given the previous pair."""
    return (_joint_complement(params.g12, even, params.g22, odd),
            _joint_complement(params.g11, even, params.g21, odd))


def _next_pair(params: ModelParams, t: np.ndarray, odd: np.ndarray, even: np.ndarray,
               odd0: float, even0: float) -> Tuple[np.ndarray, np.ndarray]:
    """(l_{2k+1}, l_{2k+2}) from (l_{2k-1}, l_{2k})."""
    odd_source, even_source = _layer_sources(params, odd, even)
    return _relax(t, odd_source, params.delta2, odd0), _relax(t, even_source, params.delta1, even0)


def _external_source(params: ModelParams, odd: np.ndarray, even: np.ndarray) -> np.ndarray:
    return params.rho1 * params.h1.laplace_complement(even) + params.rho2 * params.h2.laplace_complement(odd)


def solve_l(params: ModelParams, v: Sequence[float], grid: TimeGrid) -> LaplaceGrid:
    """
    Solve the l-function system for an initial vector v of length m = 2n.

    Args:
        params: Model parameters
        v: Initial vector (v_1, ..., v_m), componentwise >= 0
        grid: Time grid

    Returns:
        LaplaceGrid with l_1 .. l_m and c on the grid

    Raises:
        DomainError: If m is odd or v has negative entries
    """
    vec = _check_vector(v)
    m = len(vec)
    n = m // 2
    t = grid.points

    l = np.empty((m, len(t)))
    l[0] = vec[m - 1] * np.exp(-params.delta2 * t)
    l[1] = vec[m - 2] * np.exp(-params.delta1 * t)
    for k in range(1, n):
        odd0 = vec[2 * (n - k) - 1]
        even0 = vec[2 * (n - k) - 2]
        l[2 * k], l[2 * k + 1] = _next_pair(params, t, l[2 * k - 2], l[2 * k - 1], odd0, even0)

    if len(t) > 1:
        c = cumulative_trapezoid(_external_source(params, l[m - 2], l[m - 1]), t, initial=0.0)
    else:
        c = np.zeros(1)
    return LaplaceGrid(n=n, v=vec, grid=grid, l=l, c=c)


def finite_T_laplace(params: ModelParams, v: Sequence[float], T: float, grid: TimeGrid) -> float:
    """
    Transform of the generation-stacked intensity vector at time T.

    The process starts from (lambda0_1, lambda0_2, 0, ..., 0); the result is
    exp(-l_{2n}(T) lambda0_1 - l_{2n-1}(T) lambda0_2 - c(T)).

    Raises:
        DomainError: If T differs from the grid end point, or as solve_l
    """
    if abs(grid.t_max - T) > 1e-12 * max(1.0, abs(T)):
        raise DomainError(f"T must equal the grid end point {grid.t_max}, got {T}")
    lg = solve_l(params, v, grid)
    m = lg.m
    exponent = lg.l[m - 1, -1] * params.lambda0[0] + lg.l[m - 2, -1] * params.lambda0[1] + lg.c[-1]
    return float(math.exp(-exponent))


def limiting_laplace_general(params: ModelParams, v: Sequence[float], grid: TimeGrid) -> float:
    """
    Limiting transform of the finite 2n-dimensional system for an arbitrary v.

    The integrals are taken over the whole grid, so the grid must reach far
    enough for every l-function to have decayed.
    """
    lg = solve_l(params, v, grid)
    exponent = trapezoid(_external_source(params, lg.l[lg.m - 2], lg.l[lg.m - 1]), grid.points)
    return float(math.exp(-exponent))


def _generation_pairs(params: ModelParams, v1: float, v2: float,
                      t: np.ndarray) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (l_{2k-1}, l_{2k}) for k = 1, 2, ... under the repeated (v1, v2) pattern."""
    odd = v2 * np.exp(-params.delta2 * t)
    even = v1 * np.exp(-params.delta1 * t)
    yield odd, even
    while True:
        odd, even = _next_pair(params, t, odd, even, v2, v1)
        yield odd, even


def _tail_decay_rate(t: np.ndarray, values: np.ndarray) -> float:
    window = t >= t[-1] - 0.1 * t[-1]
    if np.count_nonzero(window) < 3:
        window = slice(-3, None)
    tt, yy = t[window], values[window]
    positive = yy > 0
    if np.count_nonzero(positive) < 2:
        return math.inf
    slope = np.polyfit(tt[positive], np.log(yy[positive]), 1)[0]
    return -slope if slope < 0 else 0.0


def _tail_bound(params: ModelParams, t: np.ndarray, odd: np.ndarray, even: np.ndarray) -> float:
    """rho * mu_H * int_T^inf l, with l continued by its fitted exponential decay."""
    bound = 0.0
    for rho, mark, values in ((params.rho1, params.h1, even), (params.rho2, params.h2, odd)):
        weight = rho * mark.mean
        if weight == 0.0 or values[-1] == 0.0:
            continue
        kappa = _tail_decay_rate(t, values)
        if kappa == 0.0:
            return math.inf
        bound += weight * values[-1] / kappa
    return bound


class _TailNotResolved(Exception):
    pass


def _iterate(params: ModelParams, v1: float, v2: float, settings: LaplaceSettings, horizon: float,
             n_fixed: Optional[int], tol: Optional[float],
             on_generation: Optional[Callable[[int, float], None]]) -> LaplaceResult:
    grid = settings.grid(params, horizon)
    fine_t = grid.points
    coarse_t = grid.coarsened().points
    fine = _generation_pairs(params, v1, v2, fine_t)
    coarse = _generation_pairs(params, v1, v2, coarse_t)

    cap = n_fixed if n_fixed is not None else settings.max_generations
    values: List[float] = []
    previous = None
    for k in range(1, cap + 1):
        odd, even = next(fine)
        c_odd, c_even = next(coarse)
        if max(odd[-1], even[-1]) >= settings.tail_tol:
            raise _TailNotResolved()

        exponent = trapezoid(_external_source(params, odd, even), fine_t)
        coarse_exponent = trapezoid(_external_source(params, c_odd, c_even), coarse_t)
        value = math.exp(-exponent)
        values.append(value)
        if on_generation is not None:
            on_generation(k, value)

        if n_fixed is None and previous is not None:
            gap = abs(previous[0] - value)
            if gap < tol:
                return _result(params, v1, v2, previous, k - 1, horizon, gap, values, fine_t)
        previous = (value, exponent, coarse_exponent, odd, even)

    if n_fixed is not None:
        return _result(params, v1, v2, previous, n_fixed, horizon, None, values, fine_t)

    gap = abs(values[-1] - values[-2]) if len(values) > 1 else math.nan
    raise ConvergenceError(
        f"Limiting transform at ({v1}, {v2}) did not converge within {cap} generations (gap {gap:.3e})",
        gap=gap, horizon=horizon,
    )


def _result(params: ModelParams, v1: float, v2: float, state, n_used: int, horizon: float,
            gap: Optional[float], values: List[float], t: np.ndarray) -> LaplaceResult:
    value, exponent, coarse_exponent, odd, even = state
    exponent_error = (abs(exponent - coarse_exponent) / 3.0
                      + _tail_bound(params, t, odd, even)
                      + 64 * _EPS * (1.0 + exponent))
    return LaplaceResult(
        v1=v1, v2=v2, value=value, error_estimate=value * exponent_error, n_used=n_used,
        horizon=horizon, gap=gap, values_by_generation=values[:max(n_used, 1)],
    )


def _limiting(params: ModelParams, v1: float, v2: float, settings: LaplaceSettings,
              n_fixed: Optional[int] = None, tol: Optional[float] = None,
              on_generation: Optional[Callable[[int, float], None]] = None) -> LaplaceResult:
    for name, value in (('v1', v1), ('v2', v2)):
        if not math.isfinite(value) or value < 0:
            raise DomainError(f"{name} must be finite and >= 0, got {value}")
    if n_fixed is not None and n_fixed < 1:
        raise DomainError(f"Generation count must be >= 1, got {n_fixed}")

    horizon = settings.initial_horizon(params, max(v1, v2))
    while True:
        try:
            return _iterate(params, v1, v2, settings, horizon, n_fixed, tol, on_generation)
        except _TailNotResolved:
            horizon *= 2.0
            if horizon > settings.max_horizon:
                raise ConvergenceError(
                    f"l-functions did not decay below {settings.tail_tol} within horizon {settings.max_horizon}",
                    horizon=horizon,
                )


def limiting_laplace_finite(params: ModelParams, v1: float, v2: float, n: int,
                            tail_tol: float = 1e-8, settings: Optional[LaplaceSettings] = None) -> float:
    """
    Limiting transform of the intensity truncated to n generations.

    Raises:
        ConvergenceError: If the tails do not decay within the maximal horizon
    """
    settings = settings or LaplaceSettings(tail_tol=tail_tol)
    if settings.tail_tol != tail_tol:
        settings = replace(settings, tail_tol=tail_tol)
    return _limiting(params, v1, v2, settings, n_fixed=n).value


def limiting_laplace(params: ModelParams, v1: float, v2: float, tol: float = 1e-8,
                     settings: Optional[LaplaceSettings] = None) -> Tuple[float, int]:
    """
    Limiting (stationary) transform E[exp(-v1 lambda1 - v2 lambda2)].

    Generations are added until two successive truncations differ by less
    than ``tol``.

    Returns:
        (value, n_used)

    Raises:
        NonStationaryError: If the stationarity condition fails
        ConvergenceError: If the generation cap is reached first
    """
    require_stationary(params)
    result = _limiting(params, v1, v2, settings or LaplaceSettings(), tol=tol)
    return result.value, result.n_used


def distance_integrals(params: ModelParams, v1: float, v2: float, n: int,
                       settings: Optional[LaplaceSettings] = None) -> np.ndarray:
    """
    Integrals of the generation increments of the l-functions.

    Row k - 1 holds (int d1_k, int d2_k) with d1_1 = l_1, d2_1 = l_2,
    d1_k = l_{2k-1} - l_{2k-3} and d2_k = l_{2k} - l_{2k-2}. Under the
    stationarity condition consecutive rows contract through the
    excitation matrix.
    """
    settings = settings or LaplaceSettings()
    horizon = settings.initial_horizon(params, max(v1, v2))
    while True:
        t = settings.grid(params, horizon).points
        pairs = _generation_pairs(params, v1, v2, t)
        rows = []
        prev_odd = prev_even = np.zeros_like(t)
        last = (prev_odd, prev_even)
        for _ in range(n):
            odd, even = next(pairs)
            rows.append((trapezoid(odd - prev_odd, t), trapezoid(even - prev_even, t)))
            prev_odd, prev_even = odd, even
            last = (odd, even)
        if max(last[0][-1], last[1][-1]) < settings.tail_tol:
            return np.array(rows)
        horizon *= 2.0
        if horizon > settings.max_horizon:
            raise ConvergenceError("Distance functions did not decay within the maximal horizon", horizon=horizon)


def _initial_slopes(params: ModelParams, v: np.ndarray) -> np.ndarray:
    """l_j'(0) for j = 1..m from the right-hand side of the ODE system."""
    m = len(v)
    l0 = v[::-1]
    slopes = np.empty(m)
    slopes[0] = -params.delta2 * l0[0]
    slopes[1] = -params.delta1 * l0[1]
    for k in range(1, m // 2):
        odd_source, even_source = _layer_sources(params, l0[2 * k - 2], l0[2 * k - 1])
        slopes[2 * k] = -params.delta2 * l0[2 * k] + odd_source
        slopes[2 * k + 1] = -params.delta1 * l0[2 * k + 1] + even_source
    return slopes


def _stationary_grid(params: ModelParams, v: np.ndarray, settings: LaplaceSettings,
                     dt: Optional[float]) -> TimeGrid:
    horizon = settings.initial_horizon(params, float(v.max()) if len(v) else 0.0)
    while True:
        grid = TimeGrid.uniform(horizon, dt) if dt is not None else settings.grid(params, horizon)
        lg = solve_l(params, v, grid)
        if float(lg.l[:, -1].max()) < settings.tail_tol:
            return grid
        horizon *= 2.0
        if horizon > settings.max_horizon:
            raise ConvergenceError("l-functions did not decay within the maximal horizon", horizon=horizon)


def stationarity_residual(params: ModelParams, v: Sequence[float], n: int,
                          settings: Optional[LaplaceSettings] = None, dt: Optional[float] = None) -> float:
    """
    Residual of the stationary equation of the finite 2n-dimensional system.

    Evaluates sum_j l'_{2n+1-j}(0) d(pi)/d(v_j)
              - rho1 (1 - h1^(v_1)) pi - rho2 (1 - h2^(v_2)) pi
    at pi = limiting_laplace_general(v); partial derivatives are central
    differences on a fixed grid (one-sided near v_j = 0).

    Args:
        params: Model parameters
        v: Vector of length 2n
        n: Generation count
        settings: Numerical controls (tail tolerance, finite-difference step)
        dt: Use a uniform grid with this step instead of the geometric default

    Returns:
        The residual, zero up to quadrature and differencing error
    """
    settings = settings or LaplaceSettings()
    vec = _check_vector(v)
    if len(vec) != 2 * n:
        raise DomainError(f"v must have length 2n = {2 * n}, got {len(vec)}")
    if not np.any(vec):
        return 0.0

    reach = vec + settings.fd_step * np.maximum(vec, 1.0) * 2.0
    grid = _stationary_grid(params, reach, settings, dt)

    def transform(x: np.ndarray) -> float:
        return limiting_laplace_general(params, x, grid)

    pi = transform(vec)
    slopes = _initial_slopes(params, vec)
    total = 0.0
    for j in range(len(vec)):
        slope = slopes[len(vec) - 1 - j]
        if slope == 0.0:
            continue
        h = settings.fd_step * max(vec[j], 1.0)
        step = np.zeros_like(vec)
        step[j] = h
        if vec[j] >= h:
            derivative = (transform(vec + step) - transform(vec - step)) / (2.0 * h)
        else:
            derivative = (-3.0 * pi + 4.0 * transform(vec + step) - transform(vec + 2.0 * step)) / (2.0 * h)
        total += slope * derivative

    total -= params.rho1 * params.h1.laplace_complement(vec[0]) * pi
    total -= params.rho2 * params.h2.laplace_complement(vec[1]) * pi
    return float(total)


class LaplaceSolver:
    """Logged front end for limiting transforms over a panel of arguments."""

    def __init__(self, logger: logging.Logger, settings: Optional[LaplaceSettings] = None):
        self.logger = logger
        self.settings = settings or LaplaceSettings()

    def evaluate(self, params: ModelParams, v1: float, v2: float, n: Optional[int] = None,
                 tol: float = 1e-8) -> LaplaceResult:
        """
        Truncated transform when ``n`` is given, otherwise the limiting one.

        Raises:
            NonStationaryError: If ``n`` is None and the model is not stationary
            ConvergenceError: As limiting_laplace
        """
        def log_generation(k: int, value: float) -> None:
            self.logger.debug(f"({v1}, {v2}) generation {k}: {value:.12g}")

        try:
            if n is None:
                require_stationary(params)
                result = _limiting(params, v1, v2, self.settings, tol=tol, on_generation=log_generation)
            else:
                result = _limiting(params, v1, v2, self.settings, n_fixed=n, on_generation=log_generation)
            self.logger.info(
                f"Transform at ({v1}, {v2}) = {result.value:.12g} "
                f"(error {result.error_estimate:.2e}, n_used {result.n_used}, horizon {result.horizon:.4g})"
            )
            return result
        except Exception as e:
            self.logger.error(f"Laplace evaluation at ({v1}, {v2}) failed: {str(e)}")
            raise

    def evaluate_panel(self, params: ModelParams, points: Sequence[Tuple[float, float]],
                       n: Optional[int] = None, tol: float = 1e-8) -> pd.DataFrame:
        rows = [self.evaluate(params, v1, v2, n=n, tol=tol).as_row(n) for v1, v2 in points]
        return pd.DataFrame(rows, columns=['v1', 'v2', 'n', 'value', 'error_estimate', 'n_used'])

    def dump_grid(self, params: ModelParams, v1: float, v2: float, n: int) -> LaplaceGrid:
        """Repeated-pattern LaplaceGrid of n generations on the adaptive horizon."""
        vec = np.tile([v1, v2], n)
        grid = _stationary_grid(params, vec, self.settings, None)
        self.logger.info(f"Solving l-functions for n={n} on {len(grid)} grid points up to t={grid.t_max:.4g}")
        return solve_l(params, vec, grid)

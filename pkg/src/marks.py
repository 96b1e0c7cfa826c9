"""
Mark distributions for external (Y) and internal (Z) intensity jumps.

The catalogue is closed: Zero, PointMass, Exponential and Gamma all have
closed-form Laplace transforms and finite first and second moments.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Tuple, Union

import numpy as np

from .errors import DomainError, ModelValidationError

ArrayLike = Union[float, np.ndarray]


class MarkKind(str, Enum):
    ZERO = 'zero'
    POINT_MASS = 'point_mass'
    EXPONENTIAL = 'exponential'
    GAMMA = 'gamma'


_PARAM_NAMES = {
    MarkKind.ZERO: (),
    MarkKind.POINT_MASS: ('value',),
    MarkKind.EXPONENTIAL: ('rate',),
    MarkKind.GAMMA: ('shape', 'scale'),
}


def _scalar_or_array(result: np.ndarray) -> ArrayLike:
    return float(result) if result.ndim == 0 else result


def _check_argument(u: ArrayLike) -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"Laplace argument must be non-negative, got {u!r}")
    return arr


@dataclass(frozen=True)
class MarkDistribution:
    """
    A non-negative jump-size law.

    Use the named constructors rather than building instances directly:
    ``MarkDistribution.exponential(2.0)`` has mean 0.5.
    """

    kind: MarkKind
    value: float = 0.0
    rate: float = 1.0
    shape: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind == MarkKind.POINT_MASS:
            if not np.isfinite(self.value) or self.value < 0:
                raise ModelValidationError(f"Point mass must be finite and >= 0, got {self.value}")
        elif self.kind == MarkKind.EXPONENTIAL:
            if not np.isfinite(self.rate) or self.rate <= 0:
                raise ModelValidationError(f"Exponential rate must be > 0, got {self.rate}")
        elif self.kind == MarkKind.GAMMA:
            if not (np.isfinite(self.shape) and self.shape > 0):
                raise ModelValidationError(f"Gamma shape must be > 0, got {self.shape}")
            if not (np.isfinite(self.scale) and self.scale > 0):
                raise ModelValidationError(f"Gamma scale must be > 0, got {self.scale}")

    @classmethod
    def zero(cls) -> 'MarkDistribution':
        return cls(MarkKind.ZERO)

    @classmethod
    def point_mass(cls, value: float) -> 'MarkDistribution':
        return cls(MarkKind.POINT_MASS, value=float(value))

    @classmethod
    def exponential(cls, rate: float) -> 'MarkDistribution':
        return cls(MarkKind.EXPONENTIAL, rate=float(rate))

    @classmethod
    def gamma(cls, shape: float, scale: float) -> 'MarkDistribution':
        return cls(MarkKind.GAMMA, shape=float(shape), scale=float(scale))

    @property
    def is_zero(self) -> bool:
        return self.kind == MarkKind.ZERO or (self.kind == MarkKind.POINT_MASS and self.value == 0.0)

    @property
    def mean(self) -> float:
        if self.kind == MarkKind.ZERO:
            return 0.0
        if self.kind == MarkKind.POINT_MASS:
            return self.value
        if self.kind == MarkKind.EXPONENTIAL:
            return 1.0 / self.rate
        return self.shape * self.scale

    @property
    def second_moment(self) -> float:
        if self.kind == MarkKind.ZERO:
            return 0.0
        if self.kind == MarkKind.POINT_MASS:
            return self.value ** 2
        if self.kind == MarkKind.EXPONENTIAL:
            return 2.0 / self.rate ** 2
        return self.shape * (self.shape + 1.0) * self.scale ** 2

    def moments(self) -> Tuple[float, float]:
        return self.mean, self.second_moment

    def laplace(self, u: ArrayLike) -> ArrayLike:
        """
        Evaluate E[exp(-u X)].

        Args:
            u: Non-negative scalar or array

        Returns:
            Transform values with the shape of ``u``

        Raises:
            DomainError: If any entry of ``u`` is negative
        """
        arr = _check_argument(u)
        return _scalar_or_array(1.0 - self._complement(arr))

    def laplace_complement(self, u: ArrayLike) -> ArrayLike:
        """Evaluate 1 - E[exp(-u X)] without cancellation for small u."""
        arr = _check_argument(u)
        return _scalar_or_array(self._complement(arr))

    def _complement(self, u: np.ndarray) -> np.ndarray:
        if self.is_zero:
            return np.zeros_like(u)
        if self.kind == MarkKind.POINT_MASS:
            return -np.expm1(-self.value * u)
        if self.kind == MarkKind.EXPONENTIAL:
            return u / (self.rate + u)
        return -np.expm1(-self.shape * np.log1p(self.scale * u))

    def sample(self, rng: np.random.Generator) -> float:
        """Draw one mark; Zero and PointMass do not consume randomness."""
        if self.is_zero:
            return 0.0
        if self.kind == MarkKind.POINT_MASS:
            return self.value
        if self.kind == MarkKind.EXPONENTIAL:
            return float(rng.exponential(1.0 / self.rate))
        return float(rng.gamma(self.shape, self.scale))

    def sample_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if size == 0 or self.is_zero:
            return np.zeros(size)
        if self.kind == MarkKind.POINT_MASS:
            return np.full(size, self.value)
        if self.kind == MarkKind.EXPONENTIAL:
            return rng.exponential(1.0 / self.rate, size)
        return rng.gamma(self.shape, self.scale, size)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind.value,
            'params': {name: getattr(self, name) for name in _PARAM_NAMES[self.kind]},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], key: str = 'mark') -> 'MarkDistribution':
        """
        Build a distribution from ``{"kind": ..., "params": {...}}``.

        Raises:
            ModelValidationError: On unknown kinds, missing or extra parameters
        """
        if not isinstance(data, dict) or 'kind' not in data:
            raise ModelValidationError("Mark must be a table with a 'kind' entry", key=key)
        try:
            kind = MarkKind(str(data['kind']).lower())
        except ValueError:
            allowed = ', '.join(k.value for k in MarkKind)
            raise ModelValidationError(f"Unknown mark kind '{data['kind']}' (expected one of: {allowed})", key=key)

        params = data.get('params', {}) or {}
        if not isinstance(params, dict):
            raise ModelValidationError("Mark 'params' must be a table", key=key)
        expected = set(_PARAM_NAMES[kind])
        missing = expected - set(params)
        extra = set(params) - expected
        if missing:
            raise ModelValidationError(f"Missing mark parameters: {', '.join(sorted(missing))}", key=key)
        if extra:
            raise ModelValidationError(f"Unexpected mark parameters: {', '.join(sorted(extra))}", key=key)
        try:
            values = {name: float(params[name]) for name in expected}
        except (TypeError, ValueError):
            raise ModelValidationError("Mark parameters must be numbers", key=key)
        try:
            return cls(kind, **values)
        except ModelValidationError as e:
            raise ModelValidationError(e.detail, key=key)


def mark_laplace(dist: MarkDistribution, u: ArrayLike) -> ArrayLike:
    return dist.laplace(u)


def laplace_complement(dist: MarkDistribution, u: ArrayLike) -> ArrayLike:
    return dist.laplace_complement(u)


def mark_moments(dist: MarkDistribution) -> Tuple[float, float]:
    return dist.moments()


def sample_mark(dist: MarkDistribution, rng: np.random.Generator) -> float:
    return dist.sample(rng)

"""
Model parameters of the bivariate dynamic contagion process and their validation.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

from .errors import ModelValidationError
from .marks import MarkDistribution
from .stationarity import check_c2, excitation_matrix, near_boundary, sum_form_radius

MARK_KEYS = ('h1', 'h2', 'g11', 'g12', 'g21', 'g22')
RATE_KEYS = ('delta1', 'delta2', 'rho1', 'rho2')


def _as_float(data: Dict[str, Any], name: str, key: str) -> float:
    if name not in data:
        raise ModelValidationError("Missing required model entry", key=key)
    value = data[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelValidationError(f"Expected a number, got {value!r}", key=key)
    return float(value)


@dataclass(frozen=True)
class ModelParams:
    """
    Parameters of a bivariate dynamic contagion process.

    Attributes:
        delta1, delta2: Exponential decay rates of the two intensities
        rho1, rho2: Rates of the external Poisson arrivals
        h1, h2: External mark laws (jumps of lambda1 and lambda2)
        g11, g12, g21, g22: Internal mark laws; gij is the jump of lambda_i
            caused by an event of component j
        lambda0: Initial intensities
    """

    delta1: float
    delta2: float
    rho1: float
    rho2: float
    h1: MarkDistribution
    h2: MarkDistribution
    g11: MarkDistribution
    g12: MarkDistribution
    g21: MarkDistribution
    g22: MarkDistribution
    lambda0: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for name in ('delta1', 'delta2'):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ModelValidationError(f"Decay rate must be strictly positive, got {value}", key=name)
        for name in ('rho1', 'rho2'):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ModelValidationError(f"External rate must be >= 0, got {value}", key=name)
        for name in MARK_KEYS:
            if not isinstance(getattr(self, name), MarkDistribution):
                raise ModelValidationError("Expected a MarkDistribution", key=name)

        lambda0 = tuple(float(x) for x in self.lambda0)
        if len(lambda0) != 2 or any(not math.isfinite(x) or x < 0 for x in lambda0):
            raise ModelValidationError(f"lambda0 must be two values >= 0, got {self.lambda0}", key='lambda0')
        object.__setattr__(self, 'lambda0', lambda0)

    @property
    def deltas(self) -> Tuple[float, float]:
        return self.delta1, self.delta2

    @property
    def rhos(self) -> Tuple[float, float]:
        return self.rho1, self.rho2

    @property
    def external_marks(self) -> Tuple[MarkDistribution, MarkDistribution]:
        return self.h1, self.h2

    def internal_marks(self, source: int) -> Tuple[MarkDistribution, MarkDistribution]:
        """Marks (to lambda1, to lambda2) carried by an event of component ``source`` (1 or 2)."""
        if source == 1:
            return self.g11, self.g21
        return self.g12, self.g22

    @classmethod
    def univariate(cls, delta: float, rho: float, h: MarkDistribution, g: MarkDistribution,
                   lambda0: float = 0.0) -> 'ModelParams':
        """Embed a one-dimensional dynamic contagion process as component 1."""
        zero = MarkDistribution.zero()
        return cls(
            delta1=delta, delta2=delta, rho1=rho, rho2=0.0,
            h1=h, h2=zero, g11=g, g12=zero, g21=zero, g22=zero,
            lambda0=(lambda0, 0.0),
        )

    def replace(self, **changes) -> 'ModelParams':
        data = {name: getattr(self, name) for name in RATE_KEYS + MARK_KEYS + ('lambda0',)}
        data.update(changes)
        return ModelParams(**data)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {name: getattr(self, name) for name in RATE_KEYS}
        data['lambda0'] = list(self.lambda0)
        for name in MARK_KEYS:
            data[name] = getattr(self, name).to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], prefix: str = 'model') -> 'ModelParams':
        """
        Parse the ``model`` block of a run configuration.

        Raises:
            ModelValidationError: On missing, unknown or invalid entries
        """
        if not isinstance(data, dict):
            raise ModelValidationError("Model block must be a table", key=prefix)
        unknown = set(data) - set(RATE_KEYS) - set(MARK_KEYS) - {'lambda0'}
        if unknown:
            raise ModelValidationError(f"Unknown model entries: {', '.join(sorted(unknown))}", key=prefix)

        rates = {name: _as_float(data, name, f"{prefix}.{name}") for name in RATE_KEYS}
        marks = {}
        for name in MARK_KEYS:
            if name not in data:
                raise ModelValidationError("Missing mark distribution", key=f"{prefix}.{name}")
            marks[name] = MarkDistribution.from_dict(data[name], key=f"{prefix}.{name}")

        lambda0 = data.get('lambda0', [0.0, 0.0])
        if not isinstance(lambda0, (list, tuple)) or len(lambda0) != 2:
            raise ModelValidationError("lambda0 must be a pair [a, b]", key=f"{prefix}.lambda0")
        try:
            lambda0 = (float(lambda0[0]), float(lambda0[1]))
        except (TypeError, ValueError):
            raise ModelValidationError("lambda0 entries must be numbers", key=f"{prefix}.lambda0")

        try:
            return cls(lambda0=lambda0, **rates, **marks)
        except ModelValidationError as e:
            key = f"{prefix}.{e.key}" if e.key else prefix
            raise ModelValidationError(e.detail, key=key)

    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]


@dataclass(frozen=True)
class ValidationReport:
    c1_ok: bool
    c2_ok: bool
    spectral_radius: float
    messages: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    second_moments_ok: bool = True
    sum_form_radius: float = 0.0

    @property
    def stationary(self) -> bool:
        return self.c1_ok and self.c2_ok

    def to_dict(self) -> Dict[str, Any]:
        return {
            'c1_ok': self.c1_ok,
            'c2_ok': self.c2_ok,
            'stationary': self.stationary,
            'second_moments_ok': self.second_moments_ok,
            'spectral_radius': self.spectral_radius,
            'sum_form_radius': self.sum_form_radius,
            'messages': list(self.messages),
            'warnings': list(self.warnings),
        }


def validate(params: ModelParams) -> ValidationReport:
    """
    Check the standing assumptions of the model.

    Args:
        params: Model parameters

    Returns:
        ValidationReport with the first-moment condition, the spectral-radius
        condition and the radius itself

    Raises:
        ModelValidationError: If a decay rate is not strictly positive
    """
    for name in ('delta1', 'delta2'):
        value = getattr(params, name)
        if not (math.isfinite(value) and value > 0):
            raise ModelValidationError(f"Decay rate must be strictly positive, got {value}", key=name)

    marks = {name: getattr(params, name) for name in MARK_KEYS}
    messages = []
    warnings = []

    bad_means = [name for name, dist in marks.items() if not (math.isfinite(dist.mean) and dist.mean >= 0)]
    c1_ok = not bad_means
    if c1_ok:
        messages.append("C1 satisfied: all mark distributions have finite first moments")
    else:
        messages.append(f"C1 violated: infinite or negative mean for {', '.join(bad_means)}")

    bad_second = [name for name, dist in marks.items() if not math.isfinite(dist.second_moment)]
    second_ok = not bad_second
    if not second_ok:
        warnings.append(f"Second moments are not finite for {', '.join(bad_second)}")

    c2_ok, radius = check_c2(params)
    matrix = excitation_matrix(params)
    if c2_ok:
        messages.append(f"C2 satisfied: spectral radius {radius:.12g} < 1")
    else:
        messages.append(f"C2 violated: spectral radius {radius:.12g} >= 1")
    if near_boundary(radius):
        warnings.append(f"Spectral radius {radius:.15g} lies on the stationarity boundary; moments diverge")

    return ValidationReport(
        c1_ok=c1_ok,
        c2_ok=c2_ok,
        spectral_radius=radius,
        messages=messages,
        warnings=warnings,
        second_moments_ok=second_ok,
        sum_form_radius=sum_form_radius(matrix),
    )

"""
Exact path simulation of the bivariate dynamic contagion process.

Two independent generators are provided: thinning on the intensity dynamics
and the branching (cluster) construction, truncated after a fixed number of
generations. Both return an EventHistory; IntensityPath evaluates the
intensities of a history exactly.
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import DomainError
from .model import ModelParams
from .stationarity import check_c2


class EventKind(str, Enum):
    EXTERNAL1 = 'External1'
    EXTERNAL2 = 'External2'
    INTERNAL1 = 'Internal1'
    INTERNAL2 = 'Internal2'

    @property
    def order(self) -> int:
        return _KIND_ORDER[self]

    @property
    def component(self) -> int:
        return 1 if self in (EventKind.EXTERNAL1, EventKind.INTERNAL1) else 2

    @property
    def is_external(self) -> bool:
        return self in (EventKind.EXTERNAL1, EventKind.EXTERNAL2)


_KIND_ORDER = {EventKind.EXTERNAL1: 0, EventKind.EXTERNAL2: 1, EventKind.INTERNAL1: 2, EventKind.INTERNAL2: 3}

THINNING_GENERATION = -1


@dataclass(frozen=True)
class EventRecord:
    """
    One event of the history.

    External events carry the single jump Y of their own component. Internal
    events of component k carry (Z^{1,k}, Z^{2,k}), the jumps they cause in
    lambda1 and lambda2.
    """

    time: float
    kind: EventKind
    marks: Tuple[float, ...]
    generation: int = THINNING_GENERATION

    def __post_init__(self):
        expected = 1 if self.kind.is_external else 2
        if len(self.marks) != expected:
            raise DomainError(f"{self.kind.value} events carry {expected} mark(s), got {len(self.marks)}")
        if any(x < 0 for x in self.marks):
            raise DomainError(f"Marks must be >= 0, got {self.marks}")
        if self.time < 0:
            raise DomainError(f"Event time must be >= 0, got {self.time}")

    @property
    def jumps(self) -> Tuple[float, float]:
        """Jumps applied to (lambda1, lambda2)."""
        if self.kind == EventKind.EXTERNAL1:
            return self.marks[0], 0.0
        if self.kind == EventKind.EXTERNAL2:
            return 0.0, self.marks[0]
        return self.marks[0], self.marks[1]


@dataclass(frozen=True, eq=False)
class EventHistory:
    """
    Time-ordered events of one path on [0, horizon].

    ``generations`` is set for cluster histories truncated after n offspring
    generations; events of generation n then do not excite further.
    """

    params_hash: str
    horizon: float
    events: Tuple[EventRecord, ...]
    seed: Optional[int]
    path_id: int = 0
    algorithm: str = 'thinning'
    generations: Optional[int] = None

    def __len__(self) -> int:
        return len(self.events)

    @cached_property
    def times(self) -> np.ndarray:
        return np.fromiter((e.time for e in self.events), dtype=float, count=len(self.events))

    @cached_property
    def jump_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(times, jumps to lambda1, jumps to lambda2) of the exciting events."""
        active = [e for e in self.events
                  if self.generations is None or e.kind.is_external or e.generation < self.generations]
        times = np.array([e.time for e in active], dtype=float)
        jumps = np.array([e.jumps for e in active], dtype=float).reshape(-1, 2)
        return times, jumps[:, 0], jumps[:, 1]

    @cached_property
    def internal_times(self) -> Tuple[np.ndarray, np.ndarray]:
        first = np.array([e.time for e in self.events if e.kind == EventKind.INTERNAL1], dtype=float)
        second = np.array([e.time for e in self.events if e.kind == EventKind.INTERNAL2], dtype=float)
        return first, second

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for e in self.events:
            rows.append({
                'time': e.time,
                'kind': e.kind.value,
                'mark_y': e.marks[0] if e.kind.is_external else np.nan,
                'mark_z1': e.marks[0] if not e.kind.is_external else np.nan,
                'mark_z2': e.marks[1] if not e.kind.is_external else np.nan,
                'generation': e.generation,
            })
        return pd.DataFrame(rows, columns=['time', 'kind', 'mark_y', 'mark_z1', 'mark_z2', 'generation'])


def path_rng(seed: Optional[int], path_id: int = 0) -> np.random.Generator:
    """Independent generator for (seed, path_id)."""
    if seed is None:
        return np.random.default_rng()
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(path_id)]))


def default_burn_in(params: ModelParams) -> float:
    """20 / (1 - radius) * max(1/delta1, 1/delta2); the factor 1/(1 - radius) is dropped when radius >= 1."""
    _, radius = check_c2(params)
    slowest = max(1.0 / params.delta1, 1.0 / params.delta2)
    if radius >= 1.0:
        return 20.0 * slowest
    return 20.0 / (1.0 - radius) * slowest


def _sorted_history(params: ModelParams, horizon: float, records: List[EventRecord], seed: Optional[int],
                    path_id: int, algorithm: str, generations: Optional[int] = None) -> EventHistory:
    ordered = sorted(enumerate(records), key=lambda item: (item[1].time, item[1].kind.order, item[0]))
    return EventHistory(
        params_hash=params.fingerprint(),
        horizon=float(horizon),
        events=tuple(record for _, record in ordered),
        seed=seed,
        path_id=path_id,
        algorithm=algorithm,
        generations=generations,
    )


def simulate_thinning(params: ModelParams, horizon: float, seed: Optional[int],
                      path_id: int = 0) -> EventHistory:
    """
    Simulate one path by thinning.

    From the current time s the total rate lambda1(s) + lambda2(s) + rho1 + rho2
    dominates until the next event, because intensities only decay between
    events. A candidate at time t is external k with probability rho_k / bound,
    internal k with probability lambda_k(t-) / bound, and rejected otherwise.

    Args:
        params: Model parameters
        horizon: Simulation end time, >= 0
        seed: Top-level seed
        path_id: Path index used to derive the random stream

    Returns:
        EventHistory with internal events tagged by generation -1
    """
    if horizon < 0:
        raise DomainError(f"Horizon must be >= 0, got {horizon}")
    rng = path_rng(seed, path_id)
    delta1, delta2 = params.deltas
    rho1, rho2 = params.rhos
    lam1, lam2 = params.lambda0
    internal = {1: params.internal_marks(1), 2: params.internal_marks(2)}

    records: List[EventRecord] = []
    s = 0.0
    while True:
        bound = lam1 + lam2 + rho1 + rho2
        if bound <= 0.0:
            break
        t = s + rng.exponential(1.0 / bound)
        if t > horizon:
            break
        lam1 *= math.exp(-delta1 * (t - s))
        lam2 *= math.exp(-delta2 * (t - s))
        s = t

        u = rng.random() * bound
        if u < rho1:
            y = params.h1.sample(rng)
            lam1 += y
            records.append(EventRecord(t, EventKind.EXTERNAL1, (y,), 0))
        elif u < rho1 + rho2:
            y = params.h2.sample(rng)
            lam2 += y
            records.append(EventRecord(t, EventKind.EXTERNAL2, (y,), 0))
        elif u < rho1 + rho2 + lam1 + lam2:
            source = 1 if u < rho1 + rho2 + lam1 else 2
            to_first, to_second = internal[source]
            z1 = to_first.sample(rng)
            z2 = to_second.sample(rng)
            lam1 += z1
            lam2 += z2
            kind = EventKind.INTERNAL1 if source == 1 else EventKind.INTERNAL2
            records.append(EventRecord(t, kind, (z1, z2), THINNING_GENERATION))

    return _sorted_history(params, horizon, records, seed, path_id, 'thinning')


def _offspring(rng: np.random.Generator, params: ModelParams, horizon: float, starts: np.ndarray,
               amplitudes: np.ndarray, kinds: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Births from kernels a * exp(-delta_k (t - s)) on (s, horizon].

    Each kernel is thinned against its own maximum a: proposals arrive at
    rate a and survive with probability exp(-delta_k (t - s)).
    """
    span = horizon - starts
    counts = rng.poisson(amplitudes * span)
    parent = np.repeat(np.arange(len(starts)), counts)
    if parent.size == 0:
        return np.empty(0), np.empty(0, dtype=int)
    times = starts[parent] + (1.0 - rng.random(parent.size)) * span[parent]
    rates = np.where(kinds[parent] == 1, params.delta1, params.delta2)
    keep = rng.random(parent.size) < np.exp(-rates * (times - starts[parent]))
    return times[keep], kinds[parent][keep]


def simulate_cluster(params: ModelParams, horizon: float, generations: int, seed: Optional[int],
                     path_id: int = 0) -> EventHistory:
    """
    Simulate one path through the branching construction.

    External arrivals and the initial intensities form the generation-0
    kernels. Every internal event of generation g is born from a generation
    g-1 kernel and, for g < n, opens two kernels of its own (one per
    component) with amplitudes Z^{1,k} and Z^{2,k}.

    Args:
        params: Model parameters
        horizon: Simulation end time, >= 0
        generations: Number n >= 1 of internal generations kept
        seed: Top-level seed
        path_id: Path index used to derive the random stream

    Returns:
        EventHistory of the truncated process; externals have generation 0
    """
    if horizon < 0:
        raise DomainError(f"Horizon must be >= 0, got {horizon}")
    if generations < 1:
        raise DomainError(f"Generation count must be >= 1, got {generations}")
    rng = path_rng(seed, path_id)
    records: List[EventRecord] = []

    starts = [np.zeros(2)]
    amplitudes = [np.array(params.lambda0)]
    kinds = [np.array([1, 2])]
    for component, (rho, mark, kind) in enumerate(
            ((params.rho1, params.h1, EventKind.EXTERNAL1), (params.rho2, params.h2, EventKind.EXTERNAL2)), start=1):
        count = rng.poisson(rho * horizon) if horizon > 0 else 0
        times = np.sort(rng.random(count) * horizon)
        marks = mark.sample_many(rng, count)
        records.extend(EventRecord(float(t), kind, (float(y),), 0) for t, y in zip(times, marks))
        starts.append(times)
        amplitudes.append(marks)
        kinds.append(np.full(count, component))

    starts_arr = np.concatenate(starts)
    amps_arr = np.concatenate(amplitudes)
    kinds_arr = np.concatenate(kinds)
    for generation in range(1, generations + 1):
        live = amps_arr > 0
        times, child_kinds = _offspring(rng, params, horizon, starts_arr[live], amps_arr[live], kinds_arr[live])
        if times.size == 0:
            break

        z1 = np.empty(times.size)
        z2 = np.empty(times.size)
        for source in (1, 2):
            mask = child_kinds == source
            to_first, to_second = params.internal_marks(source)
            z1[mask] = to_first.sample_many(rng, int(mask.sum()))
            z2[mask] = to_second.sample_many(rng, int(mask.sum()))

        for t, k, a, b in zip(times, child_kinds, z1, z2):
            kind = EventKind.INTERNAL1 if k == 1 else EventKind.INTERNAL2
            records.append(EventRecord(float(t), kind, (float(a), float(b)), generation))

        starts_arr = np.concatenate([times, times])
        amps_arr = np.concatenate([z1, z2])
        kinds_arr = np.concatenate([np.ones(times.size, dtype=int), np.full(times.size, 2)])

    return _sorted_history(params, horizon, records, seed, path_id, 'cluster', generations)


def _check_time(history: EventHistory, t: float) -> None:
    if not 0.0 <= t <= history.horizon:
        raise DomainError(f"t must lie in [0, {history.horizon}], got {t}")


def intensity_at(history: EventHistory, params: ModelParams, t: float) -> Tuple[float, float]:
    """
    (lambda1, lambda2) at time t from the initial values and all events strictly before t.

    At an event time this is the left limit, the value seen by that event.

    Raises:
        DomainError: If t lies outside [0, horizon]
    """
    _check_time(history, t)
    times, jump1, jump2 = history.jump_arrays
    before = times < t
    age = t - times[before]
    lam1 = params.lambda0[0] * math.exp(-params.delta1 * t) + float(np.sum(jump1[before] * np.exp(-params.delta1 * age)))
    lam2 = params.lambda0[1] * math.exp(-params.delta2 * t) + float(np.sum(jump2[before] * np.exp(-params.delta2 * age)))
    return lam1, lam2


def layer_intensities_at(history: EventHistory, params: ModelParams, t: float) -> np.ndarray:
    """
    Generation-stacked intensities (Lambda_1, ..., Lambda_2n) of a cluster history.

    Entries 2g-2 and 2g-1 hold the component-1 and component-2 kernels opened
    by generation g-1 (generation 0 being the initial intensities and the
    external arrivals).
    """
    if history.generations is None:
        raise DomainError("Layer intensities need a cluster history with a generation count")
    _check_time(history, t)
    n = history.generations
    layers = np.zeros(2 * n)
    layers[0] = params.lambda0[0] * math.exp(-params.delta1 * t)
    layers[1] = params.lambda0[1] * math.exp(-params.delta2 * t)
    for e in history.events:
        if e.time >= t:
            break
        parent_generation = e.generation if not e.kind.is_external else 0
        if parent_generation >= n:
            continue
        jump1, jump2 = e.jumps
        layers[2 * parent_generation] += jump1 * math.exp(-params.delta1 * (t - e.time))
        layers[2 * parent_generation + 1] += jump2 * math.exp(-params.delta2 * (t - e.time))
    return layers


def counts_at(history: EventHistory, t: float) -> Tuple[int, int]:
    """(N1_t, N2_t): internal events of each component up to and including t."""
    first, second = history.internal_times
    return int(np.searchsorted(first, t, side='right')), int(np.searchsorted(second, t, side='right'))


class IntensityPath:
    """Exact intensity evaluation over one EventHistory."""

    def __init__(self, history: EventHistory, params: ModelParams):
        self.history = history
        self.params = params

    def at(self, t: float) -> Tuple[float, float]:
        return intensity_at(self.history, self.params, t)

    def sweep(self, times: Sequence[float]) -> np.ndarray:
        """
        Evaluate at non-decreasing times with a single cursor over the events.

        Returns:
            Array of shape (len(times), 2)
        """
        targets = np.asarray(times, dtype=float)
        if targets.size and np.any(np.diff(targets) < 0):
            raise DomainError("Sweep times must be non-decreasing")
        if targets.size:
            _check_time(self.history, float(targets[0]))
            _check_time(self.history, float(targets[-1]))

        delta1, delta2 = self.params.deltas
        event_times, jump1, jump2 = self.history.jump_arrays
        lam1, lam2 = self.params.lambda0
        clock = 0.0
        cursor = 0
        out = np.empty((targets.size, 2))
        for i, t in enumerate(targets):
            while cursor < event_times.size and event_times[cursor] < t:
                s = event_times[cursor]
                lam1 = lam1 * math.exp(-delta1 * (s - clock)) + jump1[cursor]
                lam2 = lam2 * math.exp(-delta2 * (s - clock)) + jump2[cursor]
                clock = s
                cursor += 1
            out[i, 0] = lam1 * math.exp(-delta1 * (t - clock))
            out[i, 1] = lam2 * math.exp(-delta2 * (t - clock))
        return out

    def compensator(self, T: float) -> Tuple[float, float]:
        """Exact (int_0^T lambda1, int_0^T lambda2)."""
        _check_time(self.history, T)
        delta1, delta2 = self.params.deltas
        times, jump1, jump2 = self.history.jump_arrays
        before = times < T
        age = T - times[before]
        first = (self.params.lambda0[0] * -math.expm1(-delta1 * T)
                 + float(np.sum(jump1[before] * -np.expm1(-delta1 * age)))) / delta1
        second = (self.params.lambda0[1] * -math.expm1(-delta2 * T)
                  + float(np.sum(jump2[before] * -np.expm1(-delta2 * age)))) / delta2
        return first, second

    def on_grid(self, step: float) -> pd.DataFrame:
        if step <= 0:
            raise DomainError(f"Grid step must be > 0, got {step}")
        count = int(math.floor(self.history.horizon / step + 1e-9))
        times = np.minimum(np.arange(count + 1) * step, self.history.horizon)
        values = self.sweep(times)
        return pd.DataFrame({'t': times, 'lambda1': values[:, 0], 'lambda2': values[:, 1]})

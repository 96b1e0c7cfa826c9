"""
Run configuration: the model plus one optional block per subcommand.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from .analysis import ALGORITHMS, DEFAULT_V_PANEL, VerifyConfig
from .errors import ModelValidationError
from .laplace import LaplaceSettings
from .model import ModelParams

BLOCKS = ('model', 'simulate', 'laplace', 'moments', 'verify', 'increments', 'numerics', 'output')
OUTPUT_FORMATS = ('json', 'csv', 'text')


@dataclass(frozen=True)
class SimulateBlock:
    horizon: float = 50.0
    paths: int = 1
    seed: int = 0
    algorithm: str = 'thinning'
    generations: int = 30
    grid_step: Optional[float] = None


@dataclass(frozen=True)
class LaplaceBlock:
    v_panel: Tuple[Tuple[float, float], ...] = ((1.0, 1.0),)
    n: Optional[int] = None
    tol: float = 1e-8


@dataclass(frozen=True)
class IncrementsBlock:
    windows: Tuple[float, ...] = ()
    lags: Tuple[float, ...] = (1.0,)
    paths: int = 2000
    seed: int = 0
    alpha: float = 0.01
    include_external: bool = False


@dataclass(frozen=True)
class OutputBlock:
    dir: Optional[str] = None
    formats: Tuple[str, ...] = ('json', 'csv')


def _number(value: Any, key: str, integer: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelValidationError(f"Expected a number, got {value!r}", key=key)
    if integer:
        if float(value) != int(value):
            raise ModelValidationError(f"Expected an integer, got {value!r}", key=key)
        return int(value)
    return float(value)


def _positive(value: float, key: str, strict: bool = True) -> float:
    if value < 0 or (strict and value == 0):
        raise ModelValidationError(f"Must be {'> 0' if strict else '>= 0'}, got {value}", key=key)
    return value


def _table(data: Dict[str, Any], name: str, allowed: Tuple[str, ...]) -> Dict[str, Any]:
    block = data[name]
    if not isinstance(block, dict):
        raise ModelValidationError(f"[{name}] must be a table", key=name)
    unknown = set(block) - set(allowed)
    if unknown:
        raise ModelValidationError(f"Unknown entries: {', '.join(sorted(unknown))}", key=name)
    return block


def _v_panel(value: Any, key: str) -> Tuple[Tuple[float, float], ...]:
    if not isinstance(value, list) or not value:
        raise ModelValidationError("v_panel must be a non-empty list of [v1, v2] pairs", key=key)
    panel = []
    for i, point in enumerate(value):
        if not isinstance(point, list) or len(point) != 2:
            raise ModelValidationError("Each v_panel entry must be a pair [v1, v2]", key=f"{key}[{i}]")
        v1 = _positive(_number(point[0], f"{key}[{i}]"), f"{key}[{i}]", strict=False)
        v2 = _positive(_number(point[1], f"{key}[{i}]"), f"{key}[{i}]", strict=False)
        panel.append((v1, v2))
    return tuple(panel)


def _times(value: Any, key: str) -> Tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ModelValidationError("Expected a non-empty list of times", key=key)
    return tuple(_positive(_number(x, key), key, strict=False) for x in value)


def _algorithm(value: Any, key: str) -> str:
    if value not in ALGORITHMS:
        raise ModelValidationError(f"Unknown algorithm {value!r} (expected one of: {', '.join(ALGORITHMS)})",
                                   key=key)
    return value


@dataclass(frozen=True)
class RunConfig:
    """
    A parsed run configuration.

    Only ``model`` is mandatory; subcommands that need a block call
    ``require`` before reading it.
    """

    model: ModelParams
    simulate: Optional[SimulateBlock] = None
    laplace: Optional[LaplaceBlock] = None
    moments: Dict[str, Any] = field(default_factory=dict)
    verify: Optional[VerifyConfig] = None
    increments: Optional[IncrementsBlock] = None
    numerics: LaplaceSettings = field(default_factory=LaplaceSettings)
    output: Optional[OutputBlock] = None

    def require(self, block: str) -> Any:
        value = getattr(self, block)
        if value is None:
            raise ModelValidationError(f"Config has no [{block}] block", key=block)
        return value

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        """
        Build a RunConfig from a parsed TOML/JSON document.

        Raises:
            ModelValidationError: With the dotted key of the offending entry
        """
        unknown = set(data) - set(BLOCKS)
        if unknown:
            raise ModelValidationError(f"Unknown top-level blocks: {', '.join(sorted(unknown))}")
        if 'model' not in data:
            raise ModelValidationError("Config has no [model] block", key='model')

        model = ModelParams.from_dict(data['model'])
        return cls(
            model=model,
            simulate=_simulate_block(data) if 'simulate' in data else None,
            laplace=_laplace_block(data) if 'laplace' in data else None,
            moments=dict(_table(data, 'moments', ())) if 'moments' in data else {},
            verify=_verify_block(data) if 'verify' in data else None,
            increments=_increments_block(data) if 'increments' in data else None,
            numerics=_numerics_block(data) if 'numerics' in data else LaplaceSettings(),
            output=_output_block(data) if 'output' in data else None,
        )


def _simulate_block(data: Dict[str, Any]) -> SimulateBlock:
    block = _table(data, 'simulate', ('horizon', 'paths', 'seed', 'algorithm', 'generations', 'grid_step'))
    defaults = SimulateBlock()
    grid_step = block.get('grid_step')
    return SimulateBlock(
        horizon=_positive(_number(block.get('horizon', defaults.horizon), 'simulate.horizon'), 'simulate.horizon'),
        paths=int(_positive(_number(block.get('paths', defaults.paths), 'simulate.paths', True), 'simulate.paths')),
        seed=int(_number(block.get('seed', defaults.seed), 'simulate.seed', True)),
        algorithm=_algorithm(block.get('algorithm', defaults.algorithm), 'simulate.algorithm'),
        generations=int(_positive(_number(block.get('generations', defaults.generations),
                                          'simulate.generations', True), 'simulate.generations')),
        grid_step=None if grid_step is None else _positive(_number(grid_step, 'simulate.grid_step'),
                                                           'simulate.grid_step'),
    )


def _laplace_block(data: Dict[str, Any]) -> LaplaceBlock:
    block = _table(data, 'laplace', ('v_panel', 'n', 'tol'))
    n = block.get('n')
    return LaplaceBlock(
        v_panel=_v_panel(block['v_panel'], 'laplace.v_panel') if 'v_panel' in block else LaplaceBlock().v_panel,
        n=None if n is None else int(_positive(_number(n, 'laplace.n', True), 'laplace.n')),
        tol=_positive(_number(block.get('tol', 1e-8), 'laplace.tol'), 'laplace.tol'),
    )


def _verify_block(data: Dict[str, Any]) -> VerifyConfig:
    block = _table(data, 'verify', ('paths', 'horizon', 'burn_in', 'v_panel', 'z_threshold', 'seed',
                                    'algorithm', 'generations', 'tol'))
    defaults = VerifyConfig()

    def optional_time(key: str) -> Optional[float]:
        if key not in block:
            return None
        return _positive(_number(block[key], f'verify.{key}'), f'verify.{key}')

    paths = int(_number(block.get('paths', defaults.n_paths), 'verify.paths', True))
    if paths < 2:
        raise ModelValidationError(f"Must be >= 2, got {paths}", key='verify.paths')
    return VerifyConfig(
        n_paths=paths,
        horizon=optional_time('horizon'),
        burn_in=optional_time('burn_in'),
        v_panel=_v_panel(block['v_panel'], 'verify.v_panel') if 'v_panel' in block else DEFAULT_V_PANEL,
        z_threshold=_positive(_number(block.get('z_threshold', defaults.z_threshold), 'verify.z_threshold'),
                              'verify.z_threshold'),
        seed=int(_number(block.get('seed', defaults.seed), 'verify.seed', True)),
        algorithm=_algorithm(block.get('algorithm', defaults.algorithm), 'verify.algorithm'),
        generations=int(_positive(_number(block.get('generations', defaults.generations),
                                          'verify.generations', True), 'verify.generations')),
        tol=_positive(_number(block.get('tol', defaults.tol), 'verify.tol'), 'verify.tol'),
    )


def _increments_block(data: Dict[str, Any]) -> IncrementsBlock:
    block = _table(data, 'increments', ('windows', 'lags', 'paths', 'seed', 'alpha', 'include_external'))
    defaults = IncrementsBlock()
    if 'windows' not in block:
        raise ModelValidationError("Missing required entry", key='increments.windows')
    windows = _times(block['windows'], 'increments.windows')
    if len(windows) < 2:
        raise ModelValidationError("Need at least two windows", key='increments.windows')
    alpha = _number(block.get('alpha', defaults.alpha), 'increments.alpha')
    if not 0 < alpha < 1:
        raise ModelValidationError(f"alpha must lie in (0, 1), got {alpha}", key='increments.alpha')
    include_external = block.get('include_external', defaults.include_external)
    if not isinstance(include_external, bool):
        raise ModelValidationError("Expected true or false", key='increments.include_external')
    paths = int(_number(block.get('paths', defaults.paths), 'increments.paths', True))
    if paths < 2:
        raise ModelValidationError(f"Must be >= 2, got {paths}", key='increments.paths')
    return IncrementsBlock(
        windows=windows,
        lags=_times(block['lags'], 'increments.lags') if 'lags' in block else defaults.lags,
        paths=paths,
        seed=int(_number(block.get('seed', defaults.seed), 'increments.seed', True)),
        alpha=alpha,
        include_external=include_external,
    )


def _numerics_block(data: Dict[str, Any]) -> LaplaceSettings:
    names = ('tail_tol', 'max_generations', 'max_horizon', 'dt0_factor', 'ratio', 'max_dt_factor', 'fd_step')
    block = _table(data, 'numerics', names)
    values = {}
    for name in names:
        if name in block:
            key = f'numerics.{name}'
            values[name] = _positive(_number(block[name], key, integer=name == 'max_generations'), key)
    if values.get('ratio', 1.02) < 1.0:
        raise ModelValidationError("ratio must be >= 1", key='numerics.ratio')
    return LaplaceSettings(**values)


def _output_block(data: Dict[str, Any]) -> OutputBlock:
    block = _table(data, 'output', ('dir', 'formats'))
    directory = block.get('dir')
    if directory is not None and (not isinstance(directory, str) or not directory):
        raise ModelValidationError("Expected a directory path", key='output.dir')
    formats = block.get('formats', list(OutputBlock().formats))
    if not isinstance(formats, list) or any(f not in OUTPUT_FORMATS for f in formats):
        raise ModelValidationError(f"formats must be a list drawn from {', '.join(OUTPUT_FORMATS)}",
                                   key='output.formats')
    return OutputBlock(dir=directory, formats=tuple(formats))

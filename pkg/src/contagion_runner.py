"""
Contagion Runner - pipelines behind the command-line subcommands.
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from .analysis import IncrementTestReport, MonteCarloAnalyzer, VerificationReport
from .errors import ModelValidationError
from .file_processor import FileProcessor
from .laplace import LaplaceSolver
from .logger import LoggerFactory
from .model import ValidationReport, validate
from .run_config import RunConfig, SimulateBlock
from .simulator import IntensityPath, simulate_cluster, simulate_thinning
from .stationarity import MomentReport, moment_report, require_stationary


@dataclass
class SimulationOutput:
    """Result of the simulate pipeline: in-memory frames or the streamed files."""
    n_events: int = 0
    frames: Dict[str, pd.DataFrame] = field(default_factory=dict)
    files: Dict[str, Path] = field(default_factory=dict)


class ContagionRunner:
    """
    Orchestrates one run of the toolkit.

    Each pipeline reads its inputs from a RunConfig, delegates the numeric
    work to the library modules and writes JSON/CSV results when an output
    directory is known.
    """

    def __init__(self, log_level: str = 'INFO', log_file: Optional[str] = 'logs/contagion.log',
                 threads: int = 1, default_output_dir: str = 'output',
                 logger: Optional[logging.Logger] = None):
        """
        Initialize the runner.

        Args:
            log_level: Console logging level
            log_file: Log file path, or None for console only
            threads: Worker processes for Monte Carlo pipelines
            default_output_dir: Directory used when the config has an
                [output] block without a ``dir`` entry
            logger: Pre-built logger (tests)
        """
        self.logger = logger or LoggerFactory.create_logger('ContagionRunner', log_level, log_file)
        self.threads = threads
        self.default_output_dir = default_output_dir

        self.file_processor = FileProcessor(self.logger)
        self.analyzer = MonteCarloAnalyzer(self.logger, threads)

    def load_config(self, config_path: str) -> RunConfig:
        try:
            self.logger.info(f"Loading run configuration from: {config_path}")
            config = RunConfig.from_dict(self.file_processor.read_config(config_path))
            self.logger.info(f"Model fingerprint {config.model.fingerprint()}")
            return config
        except Exception as e:
            self.logger.error(f"Loading {config_path} failed: {str(e)}")
            raise

    def output_dir(self, config: RunConfig, override: Optional[str] = None) -> Optional[Path]:
        """--out beats [output].dir; an [output] block without dir uses the default directory."""
        if override:
            return Path(override)
        if config.output is None:
            return None
        return Path(config.output.dir or self.default_output_dir)

    def _wants(self, config: RunConfig, fmt: str) -> bool:
        return config.output is None or fmt in config.output.formats

    def check(self, config: RunConfig) -> ValidationReport:
        report = validate(config.model)
        for message in report.messages:
            self.logger.info(message)
        for warning in report.warnings:
            self.logger.warning(warning)
        return report

    def moments(self, config: RunConfig, out: Optional[str] = None) -> MomentReport:
        """
        Closed-form stationary moments.

        Raises:
            NonStationaryError: If the spectral radius is not below one
        """
        try:
            require_stationary(config.model)
            report = moment_report(config.model)
            self.logger.info(f"Stationary mean ({report.mean[0]:.12g}, {report.mean[1]:.12g})")
            directory = self.output_dir(config, out)
            if directory is not None and self._wants(config, 'json'):
                self.file_processor.write_json(report.to_dict(), str(directory / 'moments.json'))
            return report
        except Exception as e:
            self.logger.error(f"Moments pipeline failed: {str(e)}")
            raise

    def laplace(self, config: RunConfig, points: Optional[Sequence[Tuple[float, float]]] = None,
                n: Optional[int] = None, tol: Optional[float] = None, out: Optional[str] = None,
                dump_grid: Optional[str] = None) -> pd.DataFrame:
        """
        Transform panel: truncated at ``n`` generations or limiting to ``tol``.

        Points, n and tol fall back to the [laplace] block.
        """
        try:
            block = config.laplace
            if points is None:
                points = config.require('laplace').v_panel
            if n is None and tol is None and block is not None:
                n = block.n
            tol = tol if tol is not None else (block.tol if block is not None else 1e-8)

            solver = LaplaceSolver(self.logger, config.numerics)
            self.logger.info(f"Evaluating the transform at {len(points)} point(s)")
            frame = solver.evaluate_panel(config.model, points, n=n, tol=tol)

            directory = self.output_dir(config, out)
            if directory is not None and self._wants(config, 'csv'):
                self.file_processor.write_csv(frame, str(directory / 'laplace.csv'))
            if dump_grid:
                v1, v2 = points[0]
                depth = n if n is not None else int(frame['n_used'].iloc[0])
                grid = solver.dump_grid(config.model, v1, v2, max(depth, 1))
                self.file_processor.write_csv(grid.to_frame(), dump_grid)
            return frame
        except Exception as e:
            self.logger.error(f"Laplace pipeline failed: {str(e)}")
            raise

    def simulate(self, config: RunConfig, paths: Optional[int] = None, seed: Optional[int] = None,
                 algorithm: Optional[str] = None, horizon: Optional[float] = None,
                 generations: Optional[int] = None, grid_step: Optional[float] = None,
                 out: Optional[str] = None) -> SimulationOutput:
        """
        Simulate event histories.

        With an output directory each path is appended to ``events.csv`` (and
        ``intensity.csv`` when ``grid_step`` is set) as soon as it is drawn,
        so only one path is held in memory. Without one the frames are
        collected and returned.
        """
        try:
            block = config.simulate or SimulateBlock()
            settings = SimulateBlock(
                horizon=horizon if horizon is not None else block.horizon,
                paths=paths if paths is not None else block.paths,
                seed=seed if seed is not None else block.seed,
                algorithm=algorithm or block.algorithm,
                generations=generations if generations is not None else block.generations,
                grid_step=grid_step if grid_step is not None else block.grid_step,
            )
            if settings.paths < 1 or settings.horizon <= 0:
                raise ModelValidationError("simulate needs paths >= 1 and horizon > 0", key='simulate')

            directory = self.output_dir(config, out)
            streaming = directory is not None and self._wants(config, 'csv')
            output = SimulationOutput()
            collected: Dict[str, List[pd.DataFrame]] = {}

            self.logger.info(f"Simulating {settings.paths} {settings.algorithm} path(s) "
                             f"to T={settings.horizon:.6g} with seed {settings.seed}")
            for path_id in range(settings.paths):
                if settings.algorithm == 'cluster':
                    history = simulate_cluster(config.model, settings.horizon, settings.generations,
                                               settings.seed, path_id)
                else:
                    history = simulate_thinning(config.model, settings.horizon, settings.seed, path_id)
                self.logger.debug(f"Path {path_id}: {len(history)} events")
                output.n_events += len(history)

                frames = {'events': history.to_frame()}
                if settings.grid_step:
                    frames['intensity'] = IntensityPath(history, config.model).on_grid(settings.grid_step)
                for name, frame in frames.items():
                    frame = _with_path_first(frame.assign(path=path_id))
                    if streaming:
                        target = directory / f'{name}.csv'
                        self.file_processor.append_csv(frame, str(target), header=path_id == 0)
                        output.files[name] = target
                    else:
                        collected.setdefault(name, []).append(frame)

            output.frames = {name: pd.concat(parts, ignore_index=True) for name, parts in collected.items()}
            for name, target in output.files.items():
                self.logger.info(f"Wrote {name} for {settings.paths} path(s) to {target}")
            self.logger.info(f"Simulation produced {output.n_events} events")
            return output
        except Exception as e:
            self.logger.error(f"Simulation pipeline failed: {str(e)}")
            raise


    def verify(self, config: RunConfig, paths: Optional[int] = None, seed: Optional[int] = None,
               out: Optional[str] = None, dump_samples: Optional[str] = None) -> VerificationReport:
        try:
            verify_config = config.require('verify')
            changes: Dict[str, Any] = {}
            if paths is not None:
                changes['n_paths'] = paths
            if seed is not None:
                changes['seed'] = seed
            if changes:
                verify_config = replace(verify_config, **changes)

            self.analyzer.laplace_settings = config.numerics
            report = self.analyzer.verify(config.model, verify_config)

            directory = self.output_dir(config, out)
            if directory is not None:
                if self._wants(config, 'json'):
                    self.file_processor.write_json(report.to_dict(), str(directory / 'verify.json'))
                if self._wants(config, 'text'):
                    _write_text(report.to_text(), directory / 'verify.txt')
            if dump_samples and report.samples is not None:
                self.file_processor.write_csv(self.analyzer.samples_frame(report.samples), dump_samples)
            return report
        except Exception as e:
            self.logger.error(f"Verification pipeline failed: {str(e)}")
            raise

    def increments(self, config: RunConfig, paths: Optional[int] = None, seed: Optional[int] = None,
                   out: Optional[str] = None) -> IncrementTestReport:
        try:
            block = config.require('increments')
            report = self.analyzer.increment_stationarity_test(
                config.model, block.windows, block.lags,
                n_paths=paths if paths is not None else block.paths,
                seed=seed if seed is not None else block.seed,
                alpha=block.alpha,
                include_external=block.include_external,
            )
            directory = self.output_dir(config, out)
            if directory is not None and self._wants(config, 'json'):
                self.file_processor.write_json(report.to_dict(), str(directory / 'increments.json'))
            return report
        except Exception as e:
            self.logger.error(f"Increment test pipeline failed: {str(e)}")
            raise


def _with_path_first(frame: pd.DataFrame) -> pd.DataFrame:
    return frame[['path'] + [c for c in frame.columns if c != 'path']]


def _write_text(text: str, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + '\n', encoding='utf-8')

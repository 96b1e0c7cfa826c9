"""
Command-line interface.

Exit codes: 0 success, 1 validation/configuration/usage failure (including
a failed verification or increment test), 2 non-stationary model where
stationarity is required (`check` only reports it), 3 numerical convergence failure.
"""

import argparse
import sys
from typing import List, Optional, Sequence

import config as settings

from .contagion_runner import ContagionRunner
from .errors import ContagionError, ConvergenceError, NonStationaryError
from .file_processor import dumps_json

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NON_STATIONARY = 2
EXIT_CONVERGENCE = 3

COMMANDS = ('check', 'moments', 'laplace', 'simulate', 'verify', 'increments')


class UsageError(ContagionError):
    """Bad command-line usage."""


class RaisingArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting with status 2."""

    def __init__(self, *args, **kwargs):
        kwargs.setdefault('allow_abbrev', False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value!r}")
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value!r}")
    return number


def _non_negative_float(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {value!r}")
    if not number >= 0:
        raise argparse.ArgumentTypeError(f"expected a number >= 0, got {value!r}")
    return number


def _positive_float(value: str) -> float:
    number = _non_negative_float(value)
    if number == 0:
        raise argparse.ArgumentTypeError(f"expected a number > 0, got {value!r}")
    return number


def build_parser() -> argparse.ArgumentParser:
    common = RaisingArgumentParser(add_help=False)
    common.add_argument('--config', required=True, help='Run configuration (.toml or .json)')
    common.add_argument('--threads', type=_positive_int, default=None,
                        help='Worker processes (default: CONTAGION_THREADS or the number of logical cores)')
    common.add_argument('--log-level', default=None, choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Console log level (default: CONTAGION_LOG_LEVEL or INFO)')
    common.add_argument('--log-file', default=None,
                        help='Log file (default: CONTAGION_LOG_FILE or logs/contagion.log)')

    parser = RaisingArgumentParser(
        prog='contagion',
        description='Bivariate dynamic contagion processes: stationarity, moments, '
                    'Laplace transforms, simulation and Monte Carlo verification.',
    )
    sub = parser.add_subparsers(dest='command', required=True, metavar='{' + ','.join(COMMANDS) + '}',
                                parser_class=RaisingArgumentParser)

    check = sub.add_parser('check', parents=[common], help='Validate parameters and report the spectral radius')
    check.add_argument('--json', action='store_true', help='Print the report as JSON')

    moments = sub.add_parser('moments', parents=[common], help='Closed-form stationary moments')
    moments.add_argument('--out', default=None, help='Output directory for moments.json')

    laplace = sub.add_parser('laplace', parents=[common], help='Laplace transform of the stationary intensities')
    laplace.add_argument('--v1', type=_non_negative_float, default=None, help='First argument (with --v2)')
    laplace.add_argument('--v2', type=_non_negative_float, default=None, help='Second argument (with --v1)')
    depth = laplace.add_mutually_exclusive_group()
    depth.add_argument('--n', type=_positive_int, default=None, help='Truncate at n generations')
    depth.add_argument('--tol', type=_positive_float, default=None,
                       help='Generation-convergence tolerance of the limiting transform')
    laplace.add_argument('--out', default=None, help='Output directory for laplace.csv')
    laplace.add_argument('--dump-grid', default=None, metavar='FILE',
                         help='Write the l-functions of the first point to a CSV file')

    simulate = sub.add_parser('simulate', parents=[common], help='Simulate event histories')
    simulate.add_argument('--paths', type=_positive_int, default=None, help='Number of paths')
    simulate.add_argument('--seed', type=int, default=None, help='Top-level seed')
    simulate.add_argument('--algorithm', choices=['thinning', 'cluster'], default=None)
    simulate.add_argument('--horizon', type=_positive_float, default=None, help='Simulation horizon T')
    simulate.add_argument('--generations', type=_positive_int, default=None,
                          help='Generations kept by the cluster algorithm')
    simulate.add_argument('--grid-step', type=_positive_float, default=None,
                          help='Also emit intensities on a grid with this step')
    simulate.add_argument('--out', default=None, help='Output directory for events.csv and intensity.csv')

    verify = sub.add_parser('verify', parents=[common], help='Compare closed forms with Monte Carlo estimates')
    verify.add_argument('--paths', type=_positive_int, default=None, help='Number of paths')
    verify.add_argument('--seed', type=int, default=None, help='Top-level seed')
    verify.add_argument('--out', default=None, help='Output directory for verify.json and verify.txt')
    verify.add_argument('--dump-samples', default=None, metavar='FILE',
                        help='Write the sampled intensities to a CSV file')

    increments = sub.add_parser('increments', parents=[common], help='KS test of increment stationarity')
    increments.add_argument('--paths', type=_positive_int, default=None, help='Paths per window')
    increments.add_argument('--seed', type=int, default=None, help='Top-level seed')
    increments.add_argument('--out', default=None, help='Output directory for increments.json')

    return parser


def _print(text: str) -> None:
    sys.stdout.write(text if text.endswith('\n') else text + '\n')


def _dispatch(args: argparse.Namespace, runner) -> int:
    config = runner.load_config(args.config)

    if args.command == 'check':
        report = runner.check(config)
        if args.json:
            _print(dumps_json(report.to_dict()))
        else:
            _print(f"spectral_radius {report.spectral_radius:.12g}")
            _print(f"stationary {str(report.stationary).lower()}")
            for line in report.messages + [f"warning: {w}" for w in report.warnings]:
                _print(line)
        return EXIT_OK if report.c1_ok else EXIT_INVALID

    if args.command == 'moments':
        _print(dumps_json(runner.moments(config, out=args.out).to_dict()))
        return EXIT_OK

    if args.command == 'laplace':
        if (args.v1 is None) != (args.v2 is None):
            raise UsageError("laplace: --v1 and --v2 must be given together")
        points = [(args.v1, args.v2)] if args.v1 is not None else None
        frame = runner.laplace(config, points=points, n=args.n, tol=args.tol, out=args.out,
                               dump_grid=args.dump_grid)
        _print(frame.to_csv(index=False, float_format='%.17g', lineterminator='\n'))
        return EXIT_OK

    if args.command == 'simulate':
        result = runner.simulate(config, paths=args.paths, seed=args.seed, algorithm=args.algorithm,
                                 horizon=args.horizon, generations=args.generations,
                                 grid_step=args.grid_step, out=args.out)
        if runner.output_dir(config, args.out) is None:
            _print(result.frames['events'].to_csv(index=False, float_format='%.17g', lineterminator='\n'))
        return EXIT_OK

    if args.command == 'verify':
        report = runner.verify(config, paths=args.paths, seed=args.seed, out=args.out,
                               dump_samples=args.dump_samples)
        _print(dumps_json(report.to_dict()))
        if report.non_stationary:
            return EXIT_NON_STATIONARY
        return EXIT_OK if report.passed else EXIT_INVALID

    report = runner.increments(config, paths=args.paths, seed=args.seed, out=args.out)
    _print(dumps_json(report.to_dict()))
    return EXIT_OK if report.passed else EXIT_INVALID


def run(argv: Optional[Sequence[str]] = None, runner_factory=None) -> int:
    """
    Parse ``argv``, run one subcommand and return its exit code.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])
        runner_factory: Callable building the runner from (log_level,
            log_file, threads, output_dir); tests substitute their own

    Returns:
        Process exit code
    """
    argv: List[str] = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        settings.validate_config()
        threads = args.threads or settings.default_threads()
        log_level = args.log_level or settings.SETTINGS['log_level'].upper()
        log_file = args.log_file or settings.SETTINGS['log_file'] or None
        factory = runner_factory or ContagionRunner
        runner = factory(log_level=log_level, log_file=log_file, threads=threads,
                         default_output_dir=settings.SETTINGS['output_dir'])
        return _dispatch(args, runner)
    except SystemExit as e:
        # --help exits through argparse
        return int(e.code or 0)
    except NonStationaryError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_NON_STATIONARY
    except ConvergenceError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_CONVERGENCE
    except (ContagionError, ValueError, FileNotFoundError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INVALID
    except Exception as e:
        sys.stderr.write(f"error: unexpected failure: {e}\n")
        return EXIT_INVALID

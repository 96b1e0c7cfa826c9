"""
Tests for the command-line interface and its exit codes.
"""

import io
import json
import logging
import os
import tempfile
import unittest
from pathlib import Path
from unittest.mock import Mock, patch

from src.cli import EXIT_CONVERGENCE, EXIT_INVALID, EXIT_NON_STATIONARY, EXIT_OK, build_parser, run
from src.contagion_runner import ContagionRunner

CONFIGS = Path(__file__).resolve().parent.parent / 'configs'
SHOT_NOISE = str(CONFIGS / 'shot_noise.toml')
EXPLOSIVE = str(CONFIGS / 'explosive.toml')

UNCONVERGED = """
[model]
delta1 = 2.0
delta2 = 2.0
rho1 = 1.0
rho2 = 1.0
h1 = { kind = "exponential", params = { rate = 1.0 } }
h2 = { kind = "exponential", params = { rate = 1.0 } }
g11 = { kind = "exponential", params = { rate = 2.0 } }
g12 = { kind = "exponential", params = { rate = 2.0 } }
g21 = { kind = "exponential", params = { rate = 2.0 } }
g22 = { kind = "exponential", params = { rate = 2.0 } }

[laplace]
v_panel = [[1.0, 1.0]]
tol = 1e-15

[numerics]
max_generations = 2
"""


class TestCli(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.factory_calls = []
        env = patch.dict(os.environ, {}, clear=False)
        env.start()
        self.addCleanup(env.stop)
        os.environ.pop('CONTAGION_THREADS', None)

    def _factory(self, **kwargs):
        self.factory_calls.append(kwargs)
        return ContagionRunner(threads=kwargs['threads'], default_output_dir=kwargs['default_output_dir'],
                               logger=Mock(spec=logging.Logger))

    def _run(self, *argv):
        """Run the CLI and return (exit code, stdout, stderr)."""
        with patch('sys.stdout', new_callable=io.StringIO) as out, \
                patch('sys.stderr', new_callable=io.StringIO) as err:
            code = run(list(argv), runner_factory=self._factory)
        return code, out.getvalue(), err.getvalue()

    def _config(self, name: str, text: str) -> str:
        path = Path(self.tmp.name) / name
        path.write_text(text, encoding='utf-8')
        return str(path)

    def test_check_stationary_model(self):
        code, out, _ = self._run('check', '--config', SHOT_NOISE)
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(out.startswith('spectral_radius 0\nstationary true\n'))

    def test_check_reports_explosive_model_without_failing(self):
        code, out, _ = self._run('check', '--config', EXPLOSIVE, '--json')
        self.assertEqual(code, EXIT_OK)
        report = json.loads(out)
        self.assertFalse(report['c2_ok'])
        self.assertFalse(report['stationary'])
        self.assertAlmostEqual(report['spectral_radius'], 1.2, places=12)

        code, out, _ = self._run('check', '--config', EXPLOSIVE)
        self.assertEqual(code, EXIT_OK)
        self.assertIn('stationary false\n', out)


    def test_moments(self):
        code, out, _ = self._run('moments', '--config', SHOT_NOISE, '--out', self.tmp.name)
        self.assertEqual(code, EXIT_OK)
        self.assertAlmostEqual(json.loads(out)['mean']['m1'], 0.75, places=14)
        self.assertTrue((Path(self.tmp.name) / 'moments.json').exists())

        code, _, err = self._run('moments', '--config', EXPLOSIVE)
        self.assertEqual(code, EXIT_NON_STATIONARY)
        self.assertIn('not stationary', err)

    def test_laplace_single_point(self):
        code, out, _ = self._run('laplace', '--config', SHOT_NOISE, '--v1', '1', '--v2', '0')
        self.assertEqual(code, EXIT_OK)
        header, row = out.strip().splitlines()
        self.assertEqual(header, 'v1,v2,n,value,error_estimate,n_used')
        self.assertAlmostEqual(float(row.split(',')[3]), 1.5 ** -1.5, delta=1e-6)

    def test_laplace_argument_pairs(self):
        code, _, err = self._run('laplace', '--config', SHOT_NOISE, '--v1', '1')
        self.assertEqual(code, EXIT_INVALID)
        self.assertIn('--v1 and --v2', err)
        code, _, _ = self._run('laplace', '--config', SHOT_NOISE, '--n', '2', '--tol', '1e-6')
        self.assertEqual(code, EXIT_INVALID)

    def test_laplace_exit_codes(self):
        code, _, _ = self._run('laplace', '--config', EXPLOSIVE, '--tol', '1e-8')
        self.assertEqual(code, EXIT_NON_STATIONARY)
        code, _, _ = self._run('laplace', '--config', EXPLOSIVE)
        self.assertEqual(code, EXIT_OK)
        code, _, err = self._run('laplace', '--config', self._config('slow.toml', UNCONVERGED))
        self.assertEqual(code, EXIT_CONVERGENCE)
        self.assertIn('did not converge', err)

    def test_simulate_is_deterministic(self):
        first = self._run('simulate', '--config', SHOT_NOISE, '--paths', '2', '--seed', '4')
        second = self._run('simulate', '--config', SHOT_NOISE, '--paths', '2', '--seed', '4')
        self.assertEqual(first[0], EXIT_OK)
        self.assertEqual(first[1], second[1])
        self.assertTrue(first[1].startswith('path,time,kind,mark_y,mark_z1,mark_z2,generation\n'))

    def test_simulate_writes_files(self):
        code, out, _ = self._run('simulate', '--config', SHOT_NOISE, '--algorithm', 'cluster',
                                 '--generations', '3', '--out', self.tmp.name)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out, '')
        self.assertTrue((Path(self.tmp.name) / 'events.csv').exists())
        self.assertTrue((Path(self.tmp.name) / 'intensity.csv').exists())

    def test_verify_non_stationary(self):
        code, out, _ = self._run('verify', '--config', EXPLOSIVE)
        self.assertEqual(code, EXIT_NON_STATIONARY)
        self.assertTrue(json.loads(out)['non_stationary'])

    def test_increments_failure_exits_one(self):
        code, out, _ = self._run('increments', '--config', EXPLOSIVE, '--paths', '100')
        self.assertEqual(code, EXIT_INVALID)
        self.assertFalse(json.loads(out)['pass'])

    def test_usage_errors(self):
        self.assertEqual(self._run('check', '--config', SHOT_NOISE, '--bogus')[0], EXIT_INVALID)
        self.assertEqual(self._run('check')[0], EXIT_INVALID)
        self.assertEqual(self._run('frobnicate', '--config', SHOT_NOISE)[0], EXIT_INVALID)
        self.assertEqual(self._run('check', '--config', SHOT_NOISE, '--threads', '0')[0], EXIT_INVALID)
        self.assertEqual(self._run()[0], EXIT_INVALID)

    def test_abbreviated_options_are_rejected(self):
        code, _, err = self._run('check', '--config', SHOT_NOISE, '--thr', '2')
        self.assertEqual(code, EXIT_INVALID)
        self.assertIn('--thr', err)
        self.assertEqual(self._run('laplace', '--config', SHOT_NOISE, '--v', '1', '--v2', '0')[0],
                         EXIT_INVALID)
        self.assertEqual(self._run('check', '--conf', SHOT_NOISE)[0], EXIT_INVALID)


    def test_help_exits_zero(self):
        code, out, _ = self._run('--help')
        self.assertEqual(code, EXIT_OK)
        self.assertIn('verify', out)

    def test_bad_config_files(self):
        code, _, err = self._run('check', '--config', str(Path(self.tmp.name) / 'missing.toml'))
        self.assertEqual(code, EXIT_INVALID)
        self.assertIn('not found', err)
        code, _, err = self._run('check', '--config', self._config('bad.toml', '[model\ndelta1 = 1\n'))
        self.assertEqual(code, EXIT_INVALID)
        self.assertIn('line 1', err)
        code, _, err = self._run('check', '--config', self._config('neg.json', json.dumps({
            'model': {'delta1': -1.0}})))
        self.assertEqual(code, EXIT_INVALID)

    def test_thread_resolution(self):
        self._run('check', '--config', SHOT_NOISE, '--threads', '3')
        self.assertEqual(self.factory_calls[-1]['threads'], 3)
        os.environ['CONTAGION_THREADS'] = '2'
        self._run('check', '--config', SHOT_NOISE)
        self.assertEqual(self.factory_calls[-1]['threads'], 2)
        os.environ['CONTAGION_THREADS'] = 'many'
        code, _, err = self._run('check', '--config', SHOT_NOISE)
        self.assertEqual(code, EXIT_INVALID)
        self.assertIn('CONTAGION_THREADS', err)

    def test_parser_lists_every_command(self):
        help_text = build_parser().format_help()
        for command in ('check', 'moments', 'laplace', 'simulate', 'verify', 'increments'):
            self.assertIn(command, help_text)


if __name__ == '__main__':
    unittest.main()

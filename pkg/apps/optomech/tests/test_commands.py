"""
End-to-end tests of the management commands: exit codes, outputs, manifests and
run bookkeeping.
"""

import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest.mock import patch

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase, override_settings

from apps.optomech.exceptions import ConfigurationError
from apps.optomech.models import SimulationRun
from apps.optomech.storage import read_csv, read_json

# uncoupled, fast-relaxing point; keeps Monte-Carlo runs short
QUICK_SDE_PARAMS = json.dumps({
    'g_plus': 0.0, 'g_minus': 0.0, 'gamma_m': 0.1, 'n_m': 0.0,
    'kappa_plus': 0.2, 'kappa_minus': 0.2,
})


class CommandTestCase(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)
        settings_override = override_settings(OMBELL_OUTPUT_DIR=self.tmp.name)
        settings_override.enable()
        self.addCleanup(settings_override.disable)

    def call(self, name, **options):
        stdout = StringIO()
        call_command(name, stdout=stdout, **options)
        return stdout.getvalue()

    def assertExitCode(self, code, name, **options):
        with self.assertRaises(CommandError) as ctx:
            self.call(name, **options)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception


class MetricsCommandTests(CommandTestCase):

    def test_json_output_and_manifest(self):
        output = self.call('metrics', method='lyapunov')
        self.assertIn('s_q_min=', output)

        record = read_json(self.out / 'metrics.json')
        self.assertLess(record['metrics']['s_q_min'], 1.0)
        manifest = read_json(self.out / 'metrics.manifest.json')
        self.assertEqual(manifest['command'], 'metrics')
        self.assertEqual(manifest['outputs'], [str(self.out / 'metrics.json')])
        self.assertEqual(manifest['config']['method'], 'lyapunov')

        run = SimulationRun.objects.get()
        self.assertEqual(run.status, SimulationRun.STATUS_SUCCEEDED)
        self.assertEqual(run.exit_code, 0)
        self.assertEqual(run.config_hash, manifest['config_hash'])

    def test_csv_output(self):
        self.call('metrics', method='lyapunov', format='csv', output='point')
        header, rows = read_csv(self.out / 'point.csv')
        self.assertEqual(header[:3], ['s_q_min', 'b_max', 'purity'])
        self.assertEqual(len(rows), 1)

    def test_unstable_exits_2(self):
        error = self.assertExitCode(2, 'metrics', params='{"g_plus": 0.3}', method='lyapunov')
        self.assertIn('unstable', str(error))
        run = SimulationRun.objects.get()
        self.assertEqual(run.status, SimulationRun.STATUS_FAILED)
        self.assertEqual(run.exit_code, 2)
        self.assertFalse((self.out / 'metrics.json').exists())

    def test_manifest_failure_exits_1(self):
        failure = ConfigurationError('Cannot write metrics.manifest.json: disk full')
        with patch('apps.optomech.cli.write_manifest', side_effect=failure):
            error = self.assertExitCode(1, 'metrics', method='lyapunov')
        self.assertIn('disk full', str(error))
        run = SimulationRun.objects.get()
        self.assertEqual(run.status, SimulationRun.STATUS_FAILED)
        self.assertEqual(run.exit_code, 1)

    def test_unknown_config_key_exits_1(self):
        config = self.out / 'run.json'
        config.write_text(json.dumps({'params': {}, 'bogus': 1}))
        self.assertExitCode(1, 'metrics', config=str(config))
        self.assertFalse(SimulationRun.objects.exists())

    def test_unknown_parameter_exits_1(self):
        self.assertExitCode(1, 'metrics', params='{"kapa_plus": 0.02}')

    def test_flags_override_config_file(self):
        config = self.out / 'run.json'
        config.write_text(json.dumps({'params': {'n_m': 1000}, 'method': 'lyapunov', 'output': 'a'}))
        self.call('metrics', config=str(config), output='b')
        self.assertTrue((self.out / 'b.json').exists())
        self.assertEqual(read_json(self.out / 'b.json')['params']['n_m'], 1000.0)


class SweepCommandTests(CommandTestCase):

    def test_custom_axes_csv(self):
        self.call('sweep', axes='[{"name": "g_ratio", "values": [0.1, 0.2, 1.2]}]',
                  metrics='s_q_min', method='lyapunov', format='csv')
        header, rows = read_csv(self.out / 'sweep.csv')
        self.assertEqual(header, ['g_ratio [1]', 'stable', 'margin [omega_m]', 's_q_min [1]', 'error'])
        self.assertEqual([r[1] for r in rows], ['1', '1', '0'])
        self.assertEqual(rows[2][3], '')

    def test_preset_writes_labelled_files(self):
        self.call('sweep', preset='fig2', resolution=2, method='lyapunov', metrics='s_q_min')
        for epsilon in ('1', '10', '100'):
            data = read_json(self.out / f'fig2_eps{epsilon}.json')
            self.assertEqual(data['shape'], [2])
        self.assertTrue((self.out / 'fig2_eps1.manifest.json').exists())
        self.assertEqual(SimulationRun.objects.get().preset, 'fig2')

    def test_needs_axes_or_preset(self):
        self.assertExitCode(1, 'sweep')


class BoundaryCommandTests(CommandTestCase):

    def test_needs_metric_and_level(self):
        self.assertExitCode(1, 'boundary', axes='[{"name": "g_minus", "values": [0.15]}, '
                                                 '{"name": "g_ratio", "values": [0.1, 0.5]}]')

    def test_preset_without_boundaries(self):
        self.assertExitCode(1, 'boundary', preset='fig2')

    def test_custom_boundary(self):
        self.call('boundary', axes='[{"name": "g_minus", "values": [0.15]}, '
                                   '{"name": "g_ratio", "values": [0.1, 0.5]}]',
                  metric='s_q_min', level=-1.0, method='lyapunov')
        curve = read_json(self.out / 'boundary.json')
        self.assertEqual(curve['points'], [])
        self.assertEqual(curve['skipped'], [[0.15, 'no crossing']])


class StabilityMapCommandTests(CommandTestCase):

    def test_appendix_preset(self):
        output = self.call('stability_map', preset='appendix', resolution=3)
        self.assertEqual(output.count('stable fraction'), 3)
        for label in ('kappa_plus_x2', 'baseline', 'kappa_plus_x0.5'):
            grid = read_json(self.out / f'appendix_{label}.json')
            self.assertEqual(len(grid['stable']), 3)

    def test_needs_two_axes(self):
        self.assertExitCode(1, 'stability_map', axes='[{"name": "g_minus", "values": [0.1, 0.2]}]')


class OracleCompareCommandTests(CommandTestCase):

    def test_outside_validity_is_skipped(self):
        output = self.call('oracle_compare', params='{"g_plus": 0.3}')
        self.assertIn('Skipped', output)
        report = read_json(self.out / 'oracle_compare.json')
        self.assertTrue(report['skipped'])
        self.assertEqual(SimulationRun.objects.get().exit_code, 0)


class SdeCheckCommandTests(CommandTestCase):

    def test_same_seed_same_output(self):
        for name in ('first', 'second'):
            self.call('sde_check', params=QUICK_SDE_PARAMS, trajectories=2, seed=42,
                      method='lyapunov', output=name)
        first = read_json(self.out / 'first.json')
        self.assertEqual(first, read_json(self.out / 'second.json'))
        self.assertEqual(first['sde']['config']['seed'], 42)

        runs = SimulationRun.objects.order_by('created_at')
        self.assertEqual(len({run.config_hash for run in runs}), 1)
        self.assertEqual([run.seed for run in runs], [42, 42])

    def test_rejects_single_trajectory(self):
        self.assertExitCode(1, 'sde_check', params=QUICK_SDE_PARAMS, trajectories=1)

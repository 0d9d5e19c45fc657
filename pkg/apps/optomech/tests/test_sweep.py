"""
Tests for grid sweeps, sweep tables and boundary tracing.
"""

import math
from unittest.mock import patch

import numpy as np
from django.test import SimpleTestCase

from apps.optomech.exceptions import InvalidParameterError
from apps.optomech.grids import ParameterAxis
from apps.optomech.langevin import SystemParams
from apps.optomech.spectrum import DriveFrameFilter
from apps.optomech.sweep import (
    BoundaryCurve,
    SweepRow,
    SweepSpec,
    SweepTable,
    containment_violations,
    evaluate_point,
    run_sweep,
    trace_boundary,
)

FAST = 'lyapunov'


class EvaluatePointTests(SimpleTestCase):

    def test_reference_point(self):
        row = evaluate_point(SystemParams(), DriveFrameFilter(), {}, ('s_q_min', 'log10_s_q', 'purity', 'r_oracle'), FAST)
        self.assertTrue(row.stable)
        self.assertLess(row.margin, 0)
        self.assertLess(row.values['s_q_min'], 1.0)
        self.assertAlmostEqual(row.values['log10_s_q'], math.log10(row.values['s_q_min']))
        self.assertAlmostEqual(row.values['r_oracle'], math.asinh(0.41667), places=4)
        self.assertEqual(row.error, '')

    def test_unstable_point_has_no_metrics(self):
        row = evaluate_point(SystemParams(), DriveFrameFilter(), {'g_plus': 0.3}, ('s_q_min', 'b_max'), FAST)
        self.assertIs(row.stable, False)
        self.assertGreater(row.margin, 0)
        self.assertEqual(row.values, {})

    def test_only_requested_metrics(self):
        row = evaluate_point(SystemParams(), DriveFrameFilter(), {}, ('b_max',), FAST)
        self.assertEqual(set(row.values), {'b_max'})

    def test_filter_axis_assignment(self):
        base = evaluate_point(SystemParams(), DriveFrameFilter(), {}, ('s_q_min',), FAST)
        detuned = evaluate_point(SystemParams(), DriveFrameFilter(), {'omega_plus': -1.3}, ('s_q_min',), FAST)
        self.assertGreater(detuned.values['s_q_min'], base.values['s_q_min'])

    def test_failure_is_recorded(self):
        row = evaluate_point(SystemParams(), DriveFrameFilter(), {'kappa_plus': -0.01}, ('s_q_min',), FAST)
        self.assertIn('kappa_plus', row.error)
        self.assertIsNone(row.stable)
        self.assertEqual(row.values, {})


class RunSweepTests(SimpleTestCase):

    def setUp(self):
        self.spec = SweepSpec(
            name='ratio',
            base=SystemParams(),
            axes=(ParameterAxis('g_ratio', (0.1, 0.5, 1.2)),),
            metrics=('s_q_min', 'b_max', 'purity', 'simon_separable'),
            method=FAST,
        )

    def test_rows_follow_grid(self):
        table = run_sweep(self.spec, threads=2)
        self.assertEqual(table.shape, (3,))
        self.assertEqual([r.index for r in table.rows], [(0,), (1,), (2,)])
        self.assertEqual([r.stable for r in table.rows], [True, True, False])
        squeezing = table.column('s_q_min')
        self.assertLess(squeezing[1], squeezing[0])
        self.assertTrue(np.isnan(squeezing[2]))

    def test_csv_table(self):
        table = run_sweep(self.spec)
        header = table.header()
        self.assertEqual(header[:3], ['g_ratio [1]', 'stable', 'margin [omega_m]'])
        self.assertEqual(header[-1], 'error')
        rows = list(table.csv_rows())
        self.assertEqual(len(rows), 3)
        self.assertEqual(rows[2][1], 0)
        self.assertEqual(rows[2][3:-1], ['', '', '', ''])

        reread = SweepTable.from_csv('ratio', header, [[str(c) for c in r] for r in rows])
        np.testing.assert_allclose(reread.column('purity'), table.column('purity'), equal_nan=True)
        self.assertEqual([r.stable for r in reread.rows], [True, True, False])

    def test_json_table(self):
        table = run_sweep(self.spec)
        data = table.to_dict()
        self.assertEqual(data['shape'], [3])
        self.assertIsNone(data['grid']['s_q_min'][2])
        reread = SweepTable.from_dict(data)
        np.testing.assert_allclose(reread.column('b_max'), table.column('b_max'), equal_nan=True)

    def test_two_axis_shape(self):
        spec = self.spec.replace(
            axes=(ParameterAxis('g_minus', (0.1, 0.15)), ParameterAxis('g_ratio', (0.0, 0.2, 0.4))),
            metrics=('stability',),
        )
        table = run_sweep(spec)
        self.assertEqual(table.shape, (2, 3))
        self.assertEqual(table.rows[4].assignments, {'g_minus': 0.15, 'g_ratio': 0.2})
        self.assertEqual(table.column('stable').tolist(), [[1.0] * 3, [1.0] * 3])

    def test_spec_validation(self):
        with self.assertRaises(InvalidParameterError):
            self.spec.replace(metrics=('entropy',))
        with self.assertRaises(InvalidParameterError):
            self.spec.replace(axes=(ParameterAxis.single('g_ratio', 0.1), ParameterAxis.single('g_ratio', 0.2)))
        with self.assertRaises(InvalidParameterError):
            SweepSpec.from_dict({'axes': [], 'colour': 'red'})


class ContainmentTests(SimpleTestCase):

    def _table(self, values):
        rows = [SweepRow(index=(i,), assignments={'g_ratio': 0.1 * i}, stable=True, values=v)
                for i, v in enumerate(values)]
        axis = ParameterAxis('g_ratio', tuple(0.1 * i for i in range(len(values))))
        return SweepTable('c', (axis,), ('s_q_min', 'b_max', 'simon_separable'), rows)

    def test_consistent_table(self):
        table = self._table([
            {'s_q_min': 0.3, 'b_max': 2.3, 'simon_separable': False},
            {'s_q_min': 0.8, 'b_max': 1.5, 'simon_separable': False},
            {'s_q_min': 1.1, 'b_max': 1.2, 'simon_separable': True},
        ])
        self.assertEqual(set(containment_violations(table).values()), {0})

    def test_violations_counted(self):
        table = self._table([
            {'s_q_min': 1.2, 'b_max': 2.1, 'simon_separable': True},
            {'s_q_min': 0.9, 'simon_separable': True},
            {},
        ])
        self.assertEqual(containment_violations(table), {
            'bell_outside_sql': 1, 'sql_but_separable': 1, 'bell_but_separable': 1,
        })


class BoundaryTests(SimpleTestCase):

    def setUp(self):
        self.spec = SweepSpec(
            name='edge',
            base=SystemParams(),
            axes=(ParameterAxis.single('g_minus', 0.15), ParameterAxis.linspace('g_ratio', 0.02, 0.5, 5)),
            method=FAST,
        )

    def _s_q(self, g_ratio):
        row = evaluate_point(SystemParams(), DriveFrameFilter(), {'g_minus': 0.15, 'g_ratio': g_ratio},
                             ('s_q_min',), FAST)
        return row.values['s_q_min']

    def test_crossing_refined(self):
        low, high = self._s_q(0.02), self._s_q(0.5)
        level = 0.5 * (low + high)
        curve = trace_boundary(self.spec, 's_q_min', level)
        self.assertEqual(len(curve.points), 1)
        point = curve.points[0]
        self.assertLessEqual(point.bracket_width, 1e-3 * 0.48 + 1e-12)
        self.assertLess(abs(self._s_q(point.axis2_value) - level), 0.05 * abs(high - low))
        self.assertEqual(curve.crossing_at(0.15), point.axis2_value)
        self.assertEqual(curve.label, 'edge')

    def test_no_crossing_skipped(self):
        curve = trace_boundary(self.spec, 's_q_min', -1.0)
        self.assertEqual(curve.points, [])
        self.assertEqual(curve.skipped, {0.15: 'no crossing'})
        self.assertEqual(curve.tolerance, 0.0)

    def test_unstable_midpoint_skips_row(self):
        def metric(spec, assignments, name):
            x = assignments['g_ratio']
            if not any(math.isclose(x, v) for v in spec.axes[1].values):
                return None
            return x - 0.2

        with patch('apps.optomech.sweep._metric_value', side_effect=metric):
            curve = trace_boundary(self.spec, 's_q_min', 0.0)
        self.assertEqual(curve.points, [])
        self.assertEqual(curve.skipped, {0.15: 'unstable point inside the crossing bracket'})

    def test_invalid_requests(self):
        with self.assertRaises(InvalidParameterError):
            trace_boundary(self.spec.replace(axes=self.spec.axes[:1]), 's_q_min', 1.0)
        with self.assertRaises(InvalidParameterError):
            trace_boundary(self.spec, 'margin', 0.0)

    def test_curve_json(self):
        curve = trace_boundary(self.spec, 's_q_min', -1.0, label='fig')
        data = curve.to_dict()
        self.assertEqual(data['label'], 'fig')
        self.assertEqual(BoundaryCurve.from_dict(data).skipped, {0.15: 'no crossing'})
        self.assertEqual(curve.header(), ['g_minus [omega_m]', 'g_ratio [1]', 'bracket_width [1]'])

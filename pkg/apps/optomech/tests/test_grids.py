"""
Tests for parameter axes, derived-axis assignment and ordered thread-pool evaluation.
"""

import math
import threading

from django.test import SimpleTestCase, override_settings

from apps.optomech.exceptions import InvalidParameterError
from apps.optomech.grids import (
    ParameterAxis,
    apply_to_params,
    evaluate_in_order,
    grid_points,
    resolve_threads,
    split_assignments,
)
from apps.optomech.langevin import SystemParams


class ParameterAxisTests(SimpleTestCase):

    def test_linspace(self):
        axis = ParameterAxis.linspace('g_minus', 0.01, 0.3, 30)
        self.assertEqual(len(axis), 30)
        self.assertAlmostEqual(axis.values[0], 0.01)
        self.assertAlmostEqual(axis.span, 0.29)
        self.assertEqual(axis.unit, 'omega_m')

    def test_logspace_needs_positive_bounds(self):
        with self.assertRaises(InvalidParameterError):
            ParameterAxis.logspace('q_factor', 0.0, 1e5, 5)
        axis = ParameterAxis.logspace('q_factor', 1e3, 1e5, 3)
        self.assertAlmostEqual(axis.values[1], 1e4)

    def test_rejects_non_monotone(self):
        with self.assertRaises(InvalidParameterError):
            ParameterAxis('g_minus', (0.1, 0.2, 0.15))

    def test_rejects_unknown_name_and_empty(self):
        with self.assertRaises(InvalidParameterError):
            ParameterAxis('g_minuss', (0.1,))
        with self.assertRaises(InvalidParameterError):
            ParameterAxis('g_minus', ())

    def test_single_point_axis(self):
        axis = ParameterAxis.single('g_ratio', 0.2)
        self.assertEqual(axis.values, (0.2,))
        self.assertEqual(axis.span, 0.0)

    def test_from_dict_start_stop(self):
        axis = ParameterAxis.from_dict({'name': 'g_ratio', 'start': 0, 'stop': 0.9, 'num': 10})
        self.assertEqual(len(axis), 10)
        self.assertAlmostEqual(axis.values[-1], 0.9)

    def test_from_dict_rejects_unknown_keys(self):
        with self.assertRaises(InvalidParameterError):
            ParameterAxis.from_dict({'name': 'g_ratio', 'values': [0.1], 'step': 1})


class ApplyToParamsTests(SimpleTestCase):

    def test_plain_field(self):
        p = apply_to_params(SystemParams(), {'kappa_plus': 0.04})
        self.assertEqual(p.kappa_plus, 0.04)

    def test_g_ratio_uses_final_g_minus(self):
        p = apply_to_params(SystemParams(), {'g_ratio': 0.5, 'g_minus': 0.2})
        self.assertAlmostEqual(p.g_minus, 0.2)
        self.assertAlmostEqual(p.g_plus, 0.1)

    def test_q_factor_sets_gamma(self):
        p = apply_to_params(SystemParams(), {'q_factor': 1.5e3})
        self.assertAlmostEqual(p.gamma_m, 1 / 1.5e3)

    def test_cooperativity_sets_g_minus(self):
        base = SystemParams()
        p = apply_to_params(base, {'cooperativity_minus': 1000.0})
        self.assertAlmostEqual(p.cooperativity_minus, 1000.0, places=6)
        self.assertAlmostEqual(p.g_minus, math.sqrt(1000.0 * base.kappa_minus * base.gamma_m / 4))

    def test_negative_derived_rejected(self):
        with self.assertRaises(InvalidParameterError):
            apply_to_params(SystemParams(), {'g_ratio': -1.0})

    def test_split_assignments(self):
        params_part, filter_part = split_assignments({'g_minus': 0.1, 'omega_plus': -1.0})
        self.assertEqual(params_part, {'g_minus': 0.1})
        self.assertEqual(filter_part, {'omega_plus': -1.0})


class GridPointTests(SimpleTestCase):

    def test_row_major_order(self):
        a = ParameterAxis('g_minus', (0.1, 0.2))
        b = ParameterAxis('g_ratio', (0.0, 0.5, 0.9))
        points = list(grid_points((a, b)))
        self.assertEqual(len(points), 6)
        self.assertEqual(points[0], ((0, 0), {'g_minus': 0.1, 'g_ratio': 0.0}))
        self.assertEqual(points[4][0], (1, 1))

    def test_one_axis(self):
        points = list(grid_points((ParameterAxis('n_m', (0.0, 10.0)),)))
        self.assertEqual(points[1], ((1,), {'n_m': 10.0}))


class ThreadTests(SimpleTestCase):

    @override_settings(OMBELL_THREADS=3)
    def test_setting_fallback(self):
        self.assertEqual(resolve_threads(), 3)
        self.assertEqual(resolve_threads(2), 2)

    def test_invalid_thread_counts(self):
        for value in (0, -2, 'many'):
            with self.subTest(value=value):
                with self.assertRaises(InvalidParameterError):
                    resolve_threads(value)

    def test_order_preserved_on_pool(self):
        self.assertEqual(evaluate_in_order(lambda x: x * x, range(40), threads=4), [x * x for x in range(40)])

    def test_single_thread_runs_inline(self):
        caller = threading.get_ident()
        idents = evaluate_in_order(lambda _: threading.get_ident(), range(3), threads=1)
        self.assertEqual(set(idents), {caller})

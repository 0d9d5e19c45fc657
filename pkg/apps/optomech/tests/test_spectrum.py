"""
Tests for filters, output spectra and the filtered / intracavity covariances.
"""

import dataclasses
import math

import numpy as np
from django.test import SimpleTestCase
from scipy import integrate

from apps.optomech import gaussian
from apps.optomech.exceptions import InstabilityError, InvalidParameterError, UnphysicalCovarianceError
from apps.optomech.langevin import Frame, LinearModel, SystemParams, build_model, vacuum_params
from apps.optomech.spectrum import (
    FilteredCovariance,
    FilterSpec,
    DriveFrameFilter,
    augmented_system,
    filter_fourier,
    filtered_covariance,
    intracavity_covariance_lyapunov,
    intracavity_covariance_spectral,
    output_spectral_matrix,
    transfer,
)

LOW_Q = SystemParams(gamma_m=1 / 1.5e3)


class FilterSpecTests(SimpleTestCase):

    def test_epsilon_is_tau_times_omega_m(self):
        spec = FilterSpec.from_epsilon(10.0, 0.0, 0.0)
        self.assertEqual(spec.tau, 10.0)
        self.assertEqual(spec.epsilon, 10.0)

    def test_non_positive_tau(self):
        with self.assertRaises(InvalidParameterError):
            FilterSpec(tau=0.0, omega_plus=0.0, omega_minus=0.0)
        with self.assertRaises(InvalidParameterError):
            FilterSpec.from_epsilon(-1.0, 0.0, 0.0)

    def test_drive_frame_demodulates_in_rwa_frame(self):
        spec = DriveFrameFilter(epsilon=10.0, omega_plus=-1.0, omega_minus=1.0).resolve(SystemParams())
        self.assertEqual((spec.omega_plus, spec.omega_minus), (0.0, 0.0))

    def test_drive_frame_unchanged_in_full_frame(self):
        spec = DriveFrameFilter(epsilon=10.0, omega_plus=-1.2, omega_minus=1.0).resolve(SystemParams(frame='full'))
        self.assertEqual((spec.omega_plus, spec.omega_minus), (-1.2, 1.0))

    def test_from_dict_checks_epsilon(self):
        with self.assertRaises(InvalidParameterError):
            FilterSpec.from_dict({'tau': 10.0, 'epsilon': 5.0, 'omega_plus': 0, 'omega_minus': 0})
        spec = FilterSpec.from_dict({'tau': 10.0, 'epsilon': 10.0, 'omega_plus': 0, 'omega_minus': 0})
        self.assertEqual(spec.epsilon, 10.0)

    def test_drive_filter_rejects_unknown_keys(self):
        with self.assertRaises(InvalidParameterError):
            DriveFrameFilter.from_dict({'eps': 10})


class FilterFourierTests(SimpleTestCase):

    def setUp(self):
        self.spec = FilterSpec.from_epsilon(10.0, 0.3, -0.2)

    def test_peak_value(self):
        self.assertAlmostEqual(abs(filter_fourier(self.spec, '+', 0.3)), math.sqrt(10 / math.pi))

    def test_half_power_point(self):
        value = abs(filter_fourier(self.spec, '-', -0.2 + 1 / 10.0))
        self.assertAlmostEqual(value, math.sqrt(10 / math.pi) / math.sqrt(2))

    def test_normalisation(self):
        total, _ = integrate.quad(lambda w: abs(filter_fourier(self.spec, '+', w)) ** 2,
                                  -np.inf, np.inf, points=None)
        self.assertAlmostEqual(total, 1.0, delta=1e-6)

    def test_unknown_port(self):
        with self.assertRaises(InvalidParameterError):
            filter_fourier(self.spec, 'x', 0.0)


class TransferTests(SimpleTestCase):

    def test_scalar_resolvent(self):
        model = LinearModel(
            drift=-0.5 * np.eye(6), noise_input=np.eye(6), input_diffusion=0.5 * np.eye(6),
            output_map=np.zeros((4, 6)), output_input_projector=np.zeros((4, 6)),
            frame=Frame.RWA, params=SystemParams(),
        )
        np.testing.assert_allclose(transfer(model, 0.0), 2.0 * np.eye(6))

    def test_decays_at_high_frequency(self):
        model = build_model(SystemParams())
        self.assertLess(np.abs(transfer(model, 1e6)).max(), 2e-6)

    def test_vacuum_output_spectrum(self):
        spectrum = output_spectral_matrix(build_model(vacuum_params()), 0.37)
        np.testing.assert_allclose(spectrum, 0.5 / (2 * math.pi) * np.eye(4), atol=1e-12)

    def test_output_spectrum_is_hermitian(self):
        spectrum = output_spectral_matrix(build_model(SystemParams()), 0.1)
        np.testing.assert_allclose(spectrum, spectrum.conj().T, atol=1e-12)


class FilteredCovarianceTests(SimpleTestCase):

    def test_vacuum_normalisation(self):
        for method in ('quadrature', 'lyapunov'):
            for epsilon, omega_plus, omega_minus in ((1.0, 0.0, 0.0), (10.0, 0.2, -0.1), (100.0, 0.0, 0.5)):
                with self.subTest(method=method, epsilon=epsilon):
                    V = filtered_covariance(
                        build_model(vacuum_params()),
                        FilterSpec.from_epsilon(epsilon, omega_plus, omega_minus),
                        method=method,
                    )
                    np.testing.assert_allclose(V.matrix, 0.5 * np.eye(4), atol=1e-6)

    def test_quadrature_matches_lyapunov(self):
        model = build_model(LOW_Q)
        spec = DriveFrameFilter().resolve(LOW_Q)
        by_quadrature = filtered_covariance(model, spec, method='quadrature')
        by_lyapunov = filtered_covariance(model, spec, method='lyapunov')
        np.testing.assert_allclose(by_quadrature.matrix, by_lyapunov.matrix, atol=1e-6)
        self.assertEqual(by_quadrature.method, 'quadrature')
        self.assertIsNotNone(by_quadrature.error_estimate)

    def test_reference_point_is_below_sql(self):
        V = filtered_covariance(build_model(SystemParams()), DriveFrameFilter().resolve(SystemParams()),
                                method='lyapunov')
        self.assertLess(2 * np.linalg.eigvalsh(V.matrix)[0], 1.0)

    def test_filter_mismatch_degrades_squeezing(self):
        params = SystemParams()
        model = build_model(params)
        matched = filtered_covariance(model, DriveFrameFilter(epsilon=10.0).resolve(params), method='lyapunov')
        detuned = filtered_covariance(
            model, DriveFrameFilter(epsilon=10.0, omega_plus=-1.3).resolve(params), method='lyapunov',
        )
        self.assertLess(gaussian.s_q_min(matched)[0], gaussian.s_q_min(detuned)[0])

    def test_unstable_model_rejected(self):
        params = SystemParams(g_plus=0.3)
        for method in ('quadrature', 'lyapunov'):
            with self.assertRaises(InstabilityError):
                filtered_covariance(build_model(params), DriveFrameFilter().resolve(params), method=method)

    def test_unknown_method(self):
        with self.assertRaises(InvalidParameterError):
            filtered_covariance(build_model(SystemParams()), DriveFrameFilter().resolve(SystemParams()), method='euler')

    def test_augmented_system_shapes(self):
        drift, noise_input = augmented_system(build_model(SystemParams()), FilterSpec.from_epsilon(10, 0, 0))
        self.assertEqual(drift.shape, (10, 10))
        self.assertEqual(noise_input.shape, (10, 6))
        self.assertAlmostEqual(drift[6, 6], -0.1)

    def test_covariance_validation(self):
        with self.assertRaises(UnphysicalCovarianceError):
            FilteredCovariance(matrix=0.1 * np.eye(4))
        skewed = 0.5 * np.eye(4)
        skewed[0, 1] = 0.2
        with self.assertRaises(UnphysicalCovarianceError):
            FilteredCovariance(matrix=skewed)
        with self.assertRaises(InvalidParameterError):
            FilteredCovariance(matrix=np.eye(3))

    def test_json_round_trip(self):
        V = filtered_covariance(build_model(SystemParams()), DriveFrameFilter().resolve(SystemParams()),
                                method='lyapunov')
        restored = FilteredCovariance.from_dict(V.to_dict())
        np.testing.assert_array_equal(restored.matrix, V.matrix)
        self.assertEqual(restored.params, V.params)
        self.assertEqual(restored.filter, V.filter)


class ExchangeSymmetryTests(SimpleTestCase):
    STATE_SWAP = np.eye(6)[[0, 1, 4, 5, 2, 3]]
    OUTPUT_SWAP = np.eye(4)[[2, 3, 0, 1]]

    def _relabelled(self, model):
        """The same system with the two cavities stored in each other's slots."""
        state, output = self.STATE_SWAP, self.OUTPUT_SWAP
        return dataclasses.replace(
            model,
            drift=state @ model.drift @ state.T,
            noise_input=state @ model.noise_input @ state.T,
            input_diffusion=state @ model.input_diffusion @ state.T,
            output_map=output @ model.output_map @ state.T,
            output_input_projector=output @ model.output_input_projector @ state.T,
        )

    def _check(self, params, centres):
        model = build_model(params)
        spec = FilterSpec.from_epsilon(10.0, *centres)
        swapped_spec = FilterSpec.from_epsilon(10.0, centres[1], centres[0])
        for method in ('quadrature', 'lyapunov'):
            with self.subTest(method=method):
                V = filtered_covariance(model, spec, method=method).matrix
                swapped = filtered_covariance(self._relabelled(model), swapped_spec, method=method).matrix
                np.testing.assert_allclose(swapped, self.OUTPUT_SWAP @ V @ self.OUTPUT_SWAP.T,
                                           rtol=1e-6, atol=1e-8)
                self.assertAlmostEqual(gaussian.s_q_min(swapped)[0], gaussian.s_q_min(V)[0], delta=1e-6)
                self.assertAlmostEqual(gaussian.b_max(swapped), gaussian.b_max(V), delta=1e-6)

    def test_asymmetric_cavities(self):
        params = SystemParams(kappa_plus=0.02, kappa_minus=0.03, g_plus=0.03, g_minus=0.15)
        self._check(params, (0.05, -0.02))

    def test_symmetric_cavities_near_balanced_coupling(self):
        params = SystemParams(g_plus=0.14, g_minus=0.15)
        self._check(params, (0.0, 0.0))


class IntracavityCovarianceTests(SimpleTestCase):

    def test_thermalised_mechanics_without_coupling(self):
        V = intracavity_covariance_lyapunov(build_model(vacuum_params()))
        np.testing.assert_allclose(np.diag(V), [500.5, 500.5, 0.5, 0.5, 0.5, 0.5], rtol=1e-10)

    def test_sideband_cooling(self):
        V = intracavity_covariance_lyapunov(build_model(SystemParams(g_plus=0.0)))
        self.assertLess(V[0, 0], 500.5)

    def test_spectral_form_agrees(self):
        model = build_model(SystemParams())
        lyapunov = intracavity_covariance_lyapunov(model)
        spectral = intracavity_covariance_spectral(model)
        np.testing.assert_allclose(spectral, lyapunov, rtol=1e-4, atol=1e-6)

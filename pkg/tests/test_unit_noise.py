import unittest

import numpy as np

from src.services.errors import DimensionError, ParameterError
from src.services.noise import (
    DrawLedger,
    NoiseEnsemble,
    NoiseStream,
    convolution_variance,
    ou_step,
    ou_step_batch,
    stationary_trace,
    stationary_variance,
)
from src.services.spectral import Basis, ModeVector, SpectralOperator, trace_power


class TestStreams(unittest.TestCase):

    def test_deterministic(self):
        a = NoiseStream(42, 3, 7).normals(10)
        b = NoiseStream(42, 3, 7).normals(10)
        np.testing.assert_array_equal(a, b)

    def test_mode_prefix(self):
        short = NoiseStream(42, 0, 5).normals(8)
        long = NoiseStream(42, 0, 5).normals(64)
        np.testing.assert_array_equal(short, long[:8])

    def test_steps_differ(self):
        stream = NoiseStream(42)
        self.assertFalse(np.array_equal(stream.at(0).normals(4), stream.at(1).normals(4)))

    def test_trajectories_uncorrelated(self):
        n = 100_000
        a = NoiseStream(9, 1).normals(n)
        b = NoiseStream(9, 2).normals(n)
        self.assertLess(abs(np.corrcoef(a, b)[0, 1]), 4 / np.sqrt(n))

    def test_ensemble_matches_streams(self):
        ensemble = NoiseEnsemble.of_size(11, 3, first=5)
        block = ensemble.normals(4, 6)
        for i in range(3):
            np.testing.assert_array_equal(block[i], ensemble.stream(i).at(4).normals(6))

    def test_negative_step(self):
        with self.assertRaises(ParameterError):
            NoiseStream(1, 0, -1).normals(2)

    def test_empty_ensemble(self):
        with self.assertRaises(DimensionError):
            NoiseEnsemble(1, [])

    def test_ledger(self):
        first, second = DrawLedger(), DrawLedger()
        NoiseStream(3).normals(5, first)
        NoiseStream(3).normals(5, second)
        self.assertEqual(first.count, 5)
        self.assertEqual(first.checksum, second.checksum)
        NoiseStream(4).normals(5, second)
        self.assertNotEqual(first.checksum, second.checksum)


class TestConvolutionVariance(unittest.TestCase):

    def test_zero_time(self):
        self.assertEqual(convolution_variance(3.0, 0.2, 0.0), 0.0)

    def test_unit(self):
        self.assertAlmostEqual(convolution_variance(1.0, 0.0, 1.0), (1 - np.exp(-2)) / 2, places=15)
        self.assertAlmostEqual(convolution_variance(1.0, 0.0, 1.0), 0.432332, places=6)

    def test_dirichlet_first_mode(self):
        lam = np.pi ** 2
        expected = (1 - np.exp(-2 * lam)) / (2 * np.pi ** 4)
        self.assertAlmostEqual(convolution_variance(lam, 0.5, 1.0), expected, delta=1e-15)

    def test_small_lambda(self):
        self.assertAlmostEqual(convolution_variance(1e-12, 0.0, 2.0), 2.0, places=9)

    def test_stationary_limit(self):
        lam = np.array([1.0, 4.0, 9.0])
        np.testing.assert_allclose(convolution_variance(lam, 0.25, 1e3), stationary_variance(lam, 0.25))

    def test_invalid(self):
        with self.assertRaises(ParameterError):
            convolution_variance(0.0, 0.0, 1.0)
        with self.assertRaises(ParameterError):
            convolution_variance(1.0, 0.0, -1.0)

    def test_stationary_trace_matches_trace_power(self):
        op = SpectralOperator(Basis.dirichlet_sine, 8)
        for delta in (-0.25 + 0.01, 0.0, 0.25, 0.5, -0.25 - 0.01):
            with self.subTest(delta=delta):
                self.assertEqual(stationary_trace(op, delta).finite, trace_power(op, 1 + 2 * delta).finite)
        self.assertFalse(stationary_trace(op, -0.26).finite)


class TestOUStep(unittest.TestCase):

    def setUp(self):
        self.op = SpectralOperator(Basis.dirichlet_sine, 4)

    def test_deterministic(self):
        state = ModeVector(np.ones(4))
        a = ou_step(self.op, 0.0, 0.01, state, NoiseStream(1, 0, 3))
        b = ou_step(self.op, 0.0, 0.01, state, NoiseStream(1, 0, 3))
        np.testing.assert_array_equal(a.coeffs, b.coeffs)

    def test_invalid_step(self):
        with self.assertRaises(ParameterError):
            ou_step(self.op, 0.0, 0.0, ModeVector.zeros(4), NoiseStream(1))

    def test_refined_step_matches_fine_steps(self):
        state = ModeVector(np.array([1.0, -0.5, 0.25, 0.0]))
        coarse = ou_step(self.op, 0.1, 0.02, state, NoiseStream(5, 0, 3), refine=4)
        fine = state
        for j in range(12, 16):
            fine = ou_step(self.op, 0.1, 0.005, fine, NoiseStream(5, 0, j))
        np.testing.assert_allclose(coarse.coeffs, fine.coeffs, rtol=1e-12, atol=1e-14)

    def test_batch_matches_single(self):
        ensemble = NoiseEnsemble.of_size(8, 2)
        coeffs = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
        batch = ou_step_batch(self.op, 0.0, 0.01, coeffs, ensemble, step=2)
        single = ou_step(self.op, 0.0, 0.01, ModeVector(coeffs[1]), ensemble.stream(1).at(2))
        np.testing.assert_allclose(batch[1], single.coeffs)

    def test_empirical_variance(self):
        n_paths, t = 100_000, 0.05
        op = SpectralOperator(Basis.dirichlet_sine, 2)
        ensemble = NoiseEnsemble.of_size(2024, n_paths)
        samples = ou_step_batch(op, 0.0, t, np.zeros((n_paths, 2)), ensemble, step=0)
        truth = convolution_variance(op.eigenvalues, 0.0, t)
        empirical = samples.var(axis=0)
        np.testing.assert_array_less(np.abs(empirical - truth), 4 * np.sqrt(2 / n_paths) * truth)

    def test_too_many_modes(self):
        with self.assertRaises(DimensionError):
            ou_step(self.op, 0.0, 0.1, ModeVector.zeros(5), NoiseStream(1))


if __name__ == '__main__':
    unittest.main()

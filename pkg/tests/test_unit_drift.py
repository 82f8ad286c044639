import unittest

import numpy as np
from numpy.polynomial import Polynomial

from src.services.drift import (
    DriftKind,
    DriftSpec,
    FunctionKind,
    ScalarFunction,
    bound_constant,
    eval_drift,
    evaluate,
    holder_estimate,
    holder_profile,
    metadata,
    regime_exponents,
)
from src.services.errors import ConfigurationError, ParameterError
from src.services.noise import NoiseStream
from src.services.regime import ExampleClass
from src.services.spectral import (
    Basis,
    ModeVector,
    SpectralOperator,
    grid_coefficients,
    grid_values,
    quadrature_weight,
    second_derivative_factors,
)


def dirichlet(n, power=1.0):
    return SpectralOperator(Basis.dirichlet_sine, n, power)


class TestScalarFunctions(unittest.TestCase):

    def test_values(self):
        u = np.array([-4.0, -0.25, 0.0, 0.25, 4.0])
        np.testing.assert_allclose(ScalarFunction("power_holder", 0.5)(u), [-2.0, -0.5, 0.0, 0.5, 2.0])
        np.testing.assert_allclose(ScalarFunction("bounded_holder", 0.5)(u), [-1.0, -0.5, 0.0, 0.5, 1.0])
        np.testing.assert_allclose(ScalarFunction("const", c=3.0)(u), 3.0)

    def test_boundedness(self):
        self.assertFalse(ScalarFunction("power_holder", 0.5).bounded)
        for kind in ("bounded_holder", "sine", "const"):
            self.assertTrue(ScalarFunction(kind, 0.5).bounded)

    def test_exponent_range(self):
        with self.assertRaises(ParameterError):
            ScalarFunction("power_holder", 1.5)


class TestEvaluate(unittest.TestCase):

    def test_zero(self):
        out = eval_drift(DriftSpec.zero(), dirichlet(5), ModeVector(np.ones(5)))
        np.testing.assert_array_equal(out.coeffs, np.zeros(5))

    def test_burgers_first_mode(self):
        out = eval_drift(DriftSpec.burgers(), dirichlet(6), ModeVector.unit(1, 6)).coeffs
        expected = np.zeros(6)
        expected[1] = np.pi / np.sqrt(2)
        np.testing.assert_allclose(out, expected, atol=1e-10)

    def test_burgers_sobolev_index(self):
        out = eval_drift(DriftSpec.burgers(0.25, 0.5), dirichlet(4), ModeVector.unit(1, 4))
        self.assertEqual(out.sobolev_index, -0.5)

    def test_burgers_conservation(self):
        rng = np.random.default_rng(4)
        n = 16
        x = rng.standard_normal(n) / np.arange(1, n + 1) ** 2
        b = evaluate(DriftSpec.burgers(), dirichlet(n), x)
        self.assertLess(abs(float(b @ x)), 1e-9)

    def test_const_composition(self):
        n = 16
        spec = DriftSpec.composition(ScalarFunction("const", c=2.0))
        out = evaluate(spec, dirichlet(n), np.zeros(n))
        k = np.arange(1, n + 1)
        analytic = 2.0 * np.sqrt(2) * (1 - (-1.0) ** k) / (k * np.pi)
        np.testing.assert_allclose(out[1::2], 0.0, atol=1e-12)
        np.testing.assert_allclose(out[:3:2], analytic[:3:2], rtol=2e-2)

    def test_composition_linearisation(self):
        n = 6
        op = dirichlet(n)
        spec = DriftSpec.composition(ScalarFunction("sine"), mu=0.25, nu=0.25)
        v = np.linspace(1.0, -1.0, n)
        eps = 1e-5
        derivative = (evaluate(spec, op, eps * v) - evaluate(spec, op, -eps * v)) / (2 * eps)
        np.testing.assert_allclose(derivative, op.base_eigenvalues ** 0.5 * v, rtol=1e-6, atol=1e-9)

    def test_duality_pairing(self):
        n = 10
        op = dirichlet(n)
        rng = np.random.default_rng(8)
        x = rng.standard_normal(n) / np.arange(1, n + 1)
        z = rng.standard_normal(n) / np.arange(1, n + 1) ** 3
        F = ScalarFunction("bounded_holder", 0.5)
        spec = DriftSpec.composition(F, mu=0.1, nu=0.2)
        lam0 = op.base_eigenvalues
        m = 2 * n
        quadrature = quadrature_weight(Basis.dirichlet_sine, m) * np.sum(
            F(grid_values(op, lam0 ** 0.1 * x, m)) * grid_values(op, lam0 ** 0.2 * z, m))
        self.assertAlmostEqual(float(evaluate(spec, op, x) @ z), float(quadrature), delta=1e-8)

    def test_cahn_hilliard_self_consistency(self):
        n = 8
        op = SpectralOperator(Basis.neumann_shifted_cosine, n, power=2)
        x = np.zeros(n)
        x[:2] = [0.3, 0.5]
        spec = DriftSpec(DriftKind.cahn_hilliard1d)
        linear = (2 * op.base_eigenvalues - 1) * x
        f1 = Polynomial(spec.poly)
        projected = grid_coefficients(op, f1(grid_values(op, x, 2 * n)), n)
        np.testing.assert_allclose(evaluate(spec, op, x) - linear, second_derivative_factors(op, n) * projected,
                                   atol=1e-9)

    def test_reaction_diffusion(self):
        n = 6
        spec = DriftSpec(DriftKind.reaction_diffusion1d)
        x = np.zeros(n)
        x[0] = 0.1
        out = evaluate(spec, dirichlet(n), x)
        self.assertEqual(spec.r, 3.0)
        self.assertGreater(out[0], 0.0)

    def test_reaction_diffusion_perturbation(self):
        n = 6
        op = dirichlet(n)
        x = np.zeros(n)
        x[0], x[2] = 0.3, -0.1
        bare = DriftSpec(DriftKind.reaction_diffusion1d)
        perturbed = DriftSpec(DriftKind.reaction_diffusion1d, F=ScalarFunction("bounded_holder", 0.5))
        difference = evaluate(perturbed, op, x) - evaluate(bare, op, x)
        self.assertGreater(np.abs(difference).max(), 1e-6)
        expected = grid_coefficients(op, perturbed.F(grid_values(op, x, 2 * n)), n)
        np.testing.assert_allclose(difference, expected, atol=1e-9)
        self.assertEqual(metadata(perturbed, op).theta, 0.5)
        self.assertIsNone(metadata(bare, op).theta)

    def test_reaction_diffusion_unbounded_perturbation(self):
        with self.assertRaises(ParameterError):
            DriftSpec(DriftKind.reaction_diffusion1d, F=ScalarFunction("power_holder", 0.5))

    def test_reaction_diffusion_validation(self):
        with self.assertRaises(ParameterError):
            DriftSpec(DriftKind.reaction_diffusion1d, poly=(0.0, 1.0, 1.0, -1.0))
        with self.assertRaises(ParameterError):
            DriftSpec(DriftKind.reaction_diffusion1d, poly=(0.0, 1.0, 0.0, 1.0))
        with self.assertRaises(ParameterError):
            DriftSpec(DriftKind.reaction_diffusion1d, r=10.0)

    def test_basis_mismatch(self):
        op = SpectralOperator(Basis.neumann_shifted_cosine, 4)
        with self.assertRaises(ConfigurationError):
            evaluate(DriftSpec.burgers(), op, np.zeros(4))
        with self.assertRaises(ConfigurationError):
            evaluate(DriftSpec(DriftKind.cahn_hilliard1d), dirichlet(4), np.zeros(4))

    def test_burgers_perturbation(self):
        op = dirichlet(6)
        F = ScalarFunction("const", c=2.0)
        perturbed = DriftSpec(DriftKind.burgers1d, F=F, mu=0.25, nu=0.25)
        np.testing.assert_allclose(evaluate(perturbed, op, np.zeros(6)),
                                   evaluate(DriftSpec.composition(F, 0.25, 0.25), op, np.zeros(6)))
        with self.assertRaises(ParameterError):
            DriftSpec(DriftKind.burgers1d, F=ScalarFunction("power_holder", 0.5), mu=0.25, nu=0.25)

    def test_burgers_pair_validated(self):
        with self.assertRaises(ParameterError):
            DriftSpec.burgers(0.25, 0.0)

    def test_batched(self):
        op = dirichlet(5)
        spec = DriftSpec.composition(ScalarFunction("sine"))
        batch = np.random.default_rng(0).standard_normal((3, 5))
        out = evaluate(spec, op, batch)
        np.testing.assert_allclose(out[2], evaluate(spec, op, batch[2]))


class TestMetadata(unittest.TestCase):

    def test_bounded_holder(self):
        meta = metadata(DriftSpec.composition(ScalarFunction("bounded_holder", 0.5)), dirichlet(4))
        self.assertEqual((meta.alpha, meta.beta, meta.theta, meta.bounded, meta.C_B), (0.0, 0.0, 0.5, True, 1.0))

    def test_burgers(self):
        meta = metadata(DriftSpec.burgers(0.25, 0.26), dirichlet(4))
        self.assertEqual((meta.alpha, meta.beta, meta.theta, meta.bounded), (0.25, 0.26, None, False))
        self.assertTrue(meta.notes)

    def test_zero(self):
        meta = metadata(DriftSpec.zero(), dirichlet(4))
        self.assertEqual((meta.alpha, meta.beta, meta.bounded, meta.C_B), (0.0, 0.0, True, 0.0))

    def test_power_scaling(self):
        meta = metadata(DriftSpec.composition(ScalarFunction("sine"), mu=0.25, nu=0.5), dirichlet(4, power=0.5))
        self.assertEqual((meta.alpha, meta.beta), (0.5, 1.0))

    def test_regime_exponents(self):
        exps = regime_exponents(DriftSpec.burgers(0.25, 0.26), dirichlet(4), delta=0.01)
        self.assertEqual(exps["example_class"], ExampleClass.burgers)
        self.assertEqual(str(exps["nu"]), "13/50")
        self.assertEqual(str(exps["rho"]), "1/100")


class TestHolder(unittest.TestCase):

    def test_zero(self):
        self.assertEqual(holder_estimate(DriftSpec.zero(), dirichlet(3), 0.5, 1.0, 10, NoiseStream(1)), 0.0)

    def test_scalar_square_root(self):
        spec = DriftSpec.composition(ScalarFunction("power_holder", 0.5))
        estimate = holder_estimate(spec, dirichlet(1), 0.5, 1.0, 10_000, NoiseStream(2))
        self.assertGreaterEqual(estimate, 1.0)
        self.assertLessEqual(estimate, 2.0)

    def test_sine_is_lipschitz(self):
        spec = DriftSpec.composition(ScalarFunction("sine"))
        estimate = holder_estimate(spec, dirichlet(4), 1.0, 3.0, 2000, NoiseStream(3))
        self.assertLessEqual(estimate, 1.0 + 1e-9)
        self.assertGreater(estimate, 0.0)

    def test_profile_monotone(self):
        spec = DriftSpec.composition(ScalarFunction("bounded_holder", 0.5))
        profile = holder_profile(spec, dirichlet(3), 0.5, [0.25, 0.5, 1.0, 2.0], 2000, NoiseStream(4))
        self.assertTrue(np.all(np.diff(profile) >= 0))

    def test_invalid(self):
        spec = DriftSpec.composition(ScalarFunction("sine"))
        with self.assertRaises(ParameterError):
            holder_estimate(spec, dirichlet(2), 1.0, 0.0, 10, NoiseStream(1))
        with self.assertRaises(ParameterError):
            holder_estimate(spec, dirichlet(2), 1.0, 1.0, 0, NoiseStream(1))

    def test_bound_constant(self):
        analytic = bound_constant(DriftSpec.composition(ScalarFunction("sine")), dirichlet(3), NoiseStream(1), 100)
        self.assertEqual((analytic.value, analytic.source), (1.0, "analytic"))
        sampled = bound_constant(DriftSpec.composition(ScalarFunction(FunctionKind.power_holder, 0.5)),
                                 dirichlet(3), NoiseStream(1), 500)
        self.assertEqual(sampled.source, "holder_estimate")
        self.assertGreaterEqual(sampled.value, 1.0)


if __name__ == '__main__':
    unittest.main()

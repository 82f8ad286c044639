import random
import unittest
from fractions import Fraction as F

from src.services.errors import ParameterError, TableValidationError
from src.services.regime import ExampleClass, RegimeParams, admissible_rho, check, parse_rational, with_rho
from src.services.regime_tables import Scenario, boundary_flips, emit_table

HEAT = ExampleClass.fractional_heat
BURGERS = ExampleClass.burgers


def heat(d, gamma, theta, mu, nu, rho, bounded=False):
    return RegimeParams(d, F(gamma), F(theta), F(mu), F(nu), F(rho), drift_bounded=bounded)


# (label, params, weak_DAalpha, pathwise_DAalpha, critical)
CASES = [
    ("heat d1 white", heat(1, 1, "1/2", 0, 0, 0), True, True, False),
    ("heat d1 critical rho", heat(1, 1, "1/2", 0, 0, "1/2"), True, False, True),
    ("heat d1 trace boundary", heat(1, 1, "1/2", 0, 0, "-1/4"), False, False, False),
    ("heat d1 rough noise", heat(1, 1, "1/2", 0, 0, "-1/5"), True, True, False),
    ("heat d1 mu too large", heat(1, 1, "1/2", "1/2", 0, 0), False, False, False),
    ("heat d2 white", heat(2, 1, "1/2", 0, 0, 0), False, False, False),
    ("heat d2 coloured", heat(2, 1, "1/2", 0, 0, "1/10"), True, True, False),
    ("heat d3 trace boundary", heat(3, 1, "1/2", 0, 0, "1/4"), False, False, False),
    ("heat d3 weak only", heat(3, 1, "1/2", 0, 0, "3/10"), True, False, False),
    ("heat d3 theta high", heat(3, 1, "9/10", 0, 0, "3/10"), True, True, False),
    ("heat d3 critical fails trace", heat(3, "3/2", "1/2", 0, "3/4", 0), False, False, True),
    ("ch d1 rho 1/4", RegimeParams.cahn_hilliard(1, "1/2", "1/4"), False, False, False),
    ("ch d1 rho 1/2", RegimeParams.cahn_hilliard(1, "1/2", "1/2"), True, True, False),
    ("ch d1 rho 1", RegimeParams.cahn_hilliard(1, "1/2", 1), True, False, True),
    ("ch d1 rho 11/10", RegimeParams.cahn_hilliard(1, "1/2", "11/10"), False, False, False),
    ("ch d2 rho 1/2", RegimeParams.cahn_hilliard(2, "1/2", "1/2"), False, False, False),
    ("ch d2 rho 3/5", RegimeParams.cahn_hilliard(2, "1/2", "3/5"), True, True, False),
    ("ch d3 rho 3/4", RegimeParams.cahn_hilliard(3, "1/2", "3/4"), False, False, False),
    ("ch d3 rho 4/5", RegimeParams.cahn_hilliard(3, "1/2", "4/5"), True, False, False),
    ("ch d3 rho 4/5 theta high", RegimeParams.cahn_hilliard(3, "9/10", "4/5"), True, True, False),
    ("ch quartic d1", RegimeParams.cahn_hilliard(1, "9/10", "-1/10", quartic=True), True, True, False),
    ("ch quartic d1 positive rho", RegimeParams.cahn_hilliard(1, "9/10", "1/10", quartic=True), False, False, False),
    ("rd d3 theta high", RegimeParams.reaction_diffusion(3, "9/10", "21/10", 2, "3/10"), True, True, False),
    ("rd d3 theta low", RegimeParams.reaction_diffusion(3, "3/5", "21/10", 2, "3/10"), True, False, False),
    ("rd d3 theta 2/3", RegimeParams.reaction_diffusion(3, "2/3", "201/100", 2, "13/50"), True, False, False),
    ("rd d1 cubic", RegimeParams.reaction_diffusion(1, "1/2", 3, 2, 0), True, True, False),
    ("rd d1 r too large", RegimeParams.reaction_diffusion(1, "1/2", 3, 5, 0), False, False, False),
    ("burgers d1", RegimeParams(1, 1, "1/2", "1/4", "1/4", "1/8", example_class=BURGERS), True, True, False),
    ("burgers d1 nu zero", RegimeParams(1, 1, "1/2", "1/4", 0, "1/8", example_class=BURGERS), False, False, False),
    ("navier stokes d2", RegimeParams(2, "3/2", "1/2", "1/2", "1/10", "3/10", example_class=ExampleClass.navier_stokes),
     True, True, False),
    ("navier stokes d2 trace boundary",
     RegimeParams(2, "3/2", "1/2", "1/2", "1/10", "1/4", example_class=ExampleClass.navier_stokes), False, False, False),
]


class TestParams(unittest.TestCase):

    def test_parse_rational(self):
        self.assertEqual(parse_rational("3/4"), F(3, 4))
        self.assertEqual(parse_rational("-1/4"), F(-1, 4))
        self.assertEqual(parse_rational("0.25"), F(1, 4))
        self.assertEqual(parse_rational(2), F(2))

    def test_parse_rational_refuses_floats(self):
        with self.assertRaises(ParameterError):
            parse_rational(0.25)
        with self.assertRaises(ParameterError):
            parse_rational("one half")

    def test_theta_must_be_open_unit(self):
        for theta in (0, 1, "3/2", "-1/2"):
            with self.assertRaises(ParameterError):
                heat(1, 1, theta, 0, 0, 0)

    def test_negative_exponents_rejected(self):
        with self.assertRaises(ParameterError):
            heat(1, 1, "1/2", "-1/10", 0, 0)
        with self.assertRaises(ParameterError):
            heat(1, 1, "1/2", 0, "-1/10", 0)

    def test_dimension_range(self):
        with self.assertRaises(ParameterError):
            heat(4, 1, "1/2", 0, 0, 0)

    def test_reaction_diffusion_exponents(self):
        params = RegimeParams.reaction_diffusion(3, "9/10", "21/10", 2, "3/10")
        self.assertEqual(params.mu, 0)
        self.assertEqual(params.nu, F(3, 4) * (F(11, 5) - 2) / 2)
        self.assertEqual(params.beta, F(3, 40))

    def test_reaction_diffusion_mismatch(self):
        with self.assertRaises(ParameterError):
            RegimeParams(3, 1, "9/10", "1/4", 0, "3/10", example_class=ExampleClass.reaction_diffusion,
                         p="21/10", r=2)

    def test_cahn_hilliard_fixed_exponents(self):
        with self.assertRaises(ParameterError):
            RegimeParams(1, 2, "1/2", 1, "1/2", "1/2", example_class=ExampleClass.cahn_hilliard)
        params = RegimeParams.cahn_hilliard(1, "1/2", "1/2")
        self.assertEqual((params.alpha, params.beta, params.delta), (F(1, 2), 0, F(1, 4)))

    def test_class_fields_only_for_reaction_diffusion(self):
        with self.assertRaises(ParameterError):
            RegimeParams(1, 1, "1/2", 0, 0, 0, p=3, r=2)


class TestCheck(unittest.TestCase):

    def test_enumerated_cases(self):
        for label, params, weak, pathwise, critical in CASES:
            with self.subTest(label):
                verdict = check(params)
                self.assertEqual(verdict.weak_DAalpha, weak)
                self.assertEqual(verdict.pathwise_DAalpha, pathwise)
                self.assertEqual(verdict.critical, critical)

    def test_failed_condition_is_rendered_exactly(self):
        verdict = check(RegimeParams.cahn_hilliard(2, "1/2", "1/2"))
        self.assertIn("cahn_hilliard_rho_lower: ρ > d/4: 1/2 > 1/2", verdict.failed_conditions)

    def test_trace_boundary_names_values(self):
        verdict = check(heat(1, 1, "1/2", 0, 0, "-1/4"))
        self.assertIn("noise_trace: γ + 2ρ − 2μ > d/2: 1/2 > 1/2", verdict.failed_conditions)

    def test_critical_note(self):
        verdict = check(RegimeParams.cahn_hilliard(1, "1/2", 1))
        self.assertIn("smallness condition on F required", verdict.notes)
        self.assertTrue(verdict.weak_DAalpha)

    def test_h_levels(self):
        bounded = check(heat(1, 1, "1/2", "1/8", 0, 0, bounded=True))
        self.assertTrue(bounded.weak_H)
        self.assertTrue(bounded.pathwise_H)
        unbounded = check(heat(1, 1, "1/2", "1/8", 0, 0, bounded=False))
        self.assertTrue(unbounded.pathwise_DAalpha)
        self.assertFalse(unbounded.weak_H)
        self.assertFalse(unbounded.pathwise_H)

    def test_h_data_balance(self):
        verdict = check(heat(1, 1, "1/10", "1/8", 0, "1/8", bounded=True))
        self.assertTrue(verdict.pathwise_DAalpha)
        self.assertTrue(verdict.weak_H)
        self.assertFalse(verdict.pathwise_H)

    def test_navier_stokes_matches_burgers(self):
        ns = RegimeParams(2, "3/2", "1/2", "1/2", "1/10", "3/10", example_class=ExampleClass.navier_stokes)
        burgers = RegimeParams(2, "3/2", "1/2", "1/2", "1/10", "3/10", example_class=BURGERS)
        self.assertEqual(check(ns).as_dict(), check(burgers).as_dict())

    def test_pathwise_implies_weak(self):
        rng = random.Random(7)
        for _ in range(500):
            gamma = F(rng.randint(1, 8), 4)
            params = heat(rng.randint(1, 3), gamma, F(rng.randint(1, 19), 20), F(rng.randint(0, 7), 8) * gamma,
                          F(rng.randint(0, 8), 8), F(rng.randint(-8, 8), 8), bounded=rng.random() < 0.5)
            verdict = check(params)
            if verdict.pathwise_H:
                self.assertTrue(verdict.pathwise_DAalpha)
            if verdict.pathwise_DAalpha:
                self.assertTrue(verdict.weak_DAalpha)
            if verdict.weak_H:
                self.assertTrue(verdict.weak_DAalpha)

    def test_theta_monotonicity(self):
        rng = random.Random(11)
        checked = 0
        for _ in range(400):
            gamma = F(rng.randint(2, 8), 4)
            d = rng.randint(1, 3)
            mu = F(rng.randint(0, 4), 8) * gamma
            params = heat(d, gamma, F(rng.randint(1, 9), 10), mu, F(rng.randint(0, 4), 8), F(rng.randint(0, 8), 8))
            if not check(params).pathwise_DAalpha:
                continue
            checked += 1
            for k in range(1, 10):
                theta = params.theta + (1 - params.theta) * F(k, 10)
                shifted = RegimeParams(d, gamma, theta, mu, params.nu, params.rho)
                self.assertTrue(check(shifted).pathwise_DAalpha, msg=str(shifted))
        self.assertGreater(checked, 0)


class TestAdmissibleRho(unittest.TestCase):

    def test_burgers_example(self):
        intervals = admissible_rho(1, 1, "1/2", "1/4", "1/4", example_class=BURGERS)
        self.assertEqual(len(intervals.pathwise), 1)
        self.assertEqual(str(intervals.pathwise[0]), "(0, 1/4)")
        self.assertEqual(str(intervals.weak[0]), "(0, 1/4]")

    def test_burgers_nu_zero_is_empty(self):
        intervals = admissible_rho(1, 1, "1/2", "1/4", 0, example_class=BURGERS)
        self.assertEqual(intervals.weak, [])
        self.assertEqual(intervals.pathwise, [])

    def test_pathwise_h_needs_bounded_drift(self):
        self.assertEqual(admissible_rho(1, 1, "1/2", 0, 0).pathwise_H, [])
        self.assertEqual(len(admissible_rho(1, 1, "1/2", 0, 0, drift_bounded=True).pathwise_H), 1)

    def test_reaction_diffusion_theta_two_thirds_empty(self):
        intervals = admissible_rho(3, 1, "2/3", 0, F(3, 400), example_class=ExampleClass.reaction_diffusion,
                                   p="201/100", r=2)
        self.assertEqual(len(intervals.weak), 1)
        self.assertEqual(intervals.pathwise, [])

    def test_consistent_with_check(self):
        rng = random.Random(3)
        for _ in range(150):
            gamma = F(rng.randint(1, 8), 4)
            d = rng.randint(1, 3)
            theta = F(rng.randint(1, 19), 20)
            mu = F(rng.randint(0, 7), 8) * gamma
            nu = F(rng.randint(0, 8), 8)
            bounded = rng.random() < 0.5
            base = heat(d, gamma, theta, mu, nu, 0, bounded=bounded)
            intervals = admissible_rho(d, gamma, theta, mu, nu, drift_bounded=bounded)
            for level, attr in (("weak", "weak_DAalpha"), ("pathwise", "pathwise_DAalpha"), ("pathwise_H", "pathwise_H")):
                found = getattr(intervals, level)
                if not found:
                    for k in range(-20, 21):
                        self.assertFalse(check(with_rho(base, F(k, 8))).level(attr))
                    continue
                interval = found[0]
                lo = interval.lower if interval.lower is not None else interval.upper - 4
                hi = interval.upper if interval.upper is not None else interval.lower + 4
                for k in range(1, 100):
                    rho = lo + (hi - lo) * F(k, 100)
                    self.assertTrue(check(with_rho(base, rho)).level(attr), msg=f"{level} {interval} {rho}")
                tiny = F(1, 10 ** 6)
                if interval.lower is not None:
                    self.assertEqual(check(with_rho(base, interval.lower)).level(attr), interval.lower_closed)
                    self.assertFalse(check(with_rho(base, interval.lower - tiny)).level(attr))
                if interval.upper is not None:
                    self.assertEqual(check(with_rho(base, interval.upper)).level(attr), interval.upper_closed)
                    self.assertFalse(check(with_rho(base, interval.upper + tiny)).level(attr))


class TestTables(unittest.TestCase):
    offset = F(1, 100)

    def test_row_counts(self):
        expected = {
            (HEAT, Scenario.weak): 9, (HEAT, Scenario.pathwise_theta_high): 9,
            (HEAT, Scenario.pathwise_theta_low): 7, (BURGERS, Scenario.weak): 7,
            (BURGERS, Scenario.pathwise_theta_high): 6, (BURGERS, Scenario.pathwise_theta_low): 3,
        }
        for (example_class, scenario), count in expected.items():
            with self.subTest(f"{example_class.value}/{scenario.value}"):
                self.assertEqual(len(emit_table(example_class, scenario, self.offset)), count)

    def test_rows_pass_their_scenario(self):
        for example_class in (HEAT, BURGERS, ExampleClass.navier_stokes):
            for scenario in Scenario:
                for row in emit_table(example_class, scenario, self.offset):
                    self.assertTrue(row.verdict.level(scenario.verdict_level))

    def test_boundaries_flip(self):
        for example_class in (HEAT, BURGERS):
            for scenario in Scenario:
                for row in emit_table(example_class, scenario, self.offset):
                    for coord, flipped in boundary_flips(row).items():
                        with self.subTest(f"{example_class.value}/{scenario.value} row {row.index} {coord}"):
                            self.assertTrue(flipped)

    def test_smaller_offset(self):
        rows = emit_table(BURGERS, Scenario.pathwise_theta_high, F(1, 1000))
        self.assertEqual(rows[0].values["theta"], F(999, 1000))

    def test_per_coordinate_offsets(self):
        offsets = {"gamma": "1/100", "theta": "1/50", "mu": "1/100", "nu": "1/100", "rho": "1/100"}
        rows = emit_table(HEAT, Scenario.pathwise_theta_low, offsets)
        self.assertEqual(rows[0].values["theta"], F(1, 5))

    def test_critical_row(self):
        rows = emit_table(BURGERS, Scenario.weak, self.offset)
        critical = [row for row in rows if row.verdict.critical]
        self.assertEqual(len(critical), 1)
        self.assertEqual(critical[0].values["mu"], F(1, 8))

    def test_large_offset_reports_rows(self):
        with self.assertRaises(TableValidationError) as ctx:
            emit_table(BURGERS, Scenario.weak, F(1, 2))
        self.assertTrue(ctx.exception.failures)
        self.assertIn("predicates", ctx.exception.failures[0])

    def test_no_table_for_cahn_hilliard(self):
        with self.assertRaises(ParameterError):
            emit_table(ExampleClass.cahn_hilliard, Scenario.weak, self.offset)

    def test_offsets_must_be_positive(self):
        with self.assertRaises(ParameterError):
            emit_table(HEAT, Scenario.weak, 0)


if __name__ == '__main__':
    unittest.main()

import configparser
import fnmatch
import os
from unittest import TestCase

from hypothesis import given, settings, strategies as st

from dyndist.catalog import heaviside_shape, quadratic, ramp, uniform
from dyndist.distribution import Atom, Distribution, TestFn, convergence_residual, delta, delta_lambda, derivative, \
    leibniz_residual, make_battery, mollify, multiply, pair
from dyndist.dynamic import DynamicFn, Profile, RegulatedFn, Shape, embed_regulated, heaviside, mul_dynamic, \
    sequential_representation
from dyndist.exceptions import DeltaSequenceError, DomainError, NotDifferentiableError
from dyndist.poly import PiecewisePoly
from .strategies import battery_for, distributions, dynamic_fns

I = (-1.0, 1.0)
RAMP = Profile.linear(0.0, 1.0)
STEP = embed_regulated(RegulatedFn(PiecewisePoly.step(0.0, *I)))


def triangle(lo: float = -2.0, hi: float = 2.0) -> TestFn:
    body = RegulatedFn.from_coefficients((lo, -1.0, 0.0, 1.0, hi), ((0.0,), (1.0, 1.0), (1.0, -1.0), (0.0,)))
    return TestFn(DynamicFn(body), (-1.0, 1.0))


def step_down(height: float = 5.0) -> TestFn:
    """0 left of 0, height * (1 - t) on (0, 1), with a linear profile at 0"""
    body = RegulatedFn.from_coefficients((-2.0, 0.0, 1.0, 2.0), ((0.0,), (height, -height), (0.0,)))
    return TestFn(DynamicFn(body, {0.0: Profile.linear(0.0, height)}), (0.0, 1.0))


class TestPairing(TestCase):

    def test_regular_heaviside(self):
        theta = Distribution.from_regular(PiecewisePoly.step(0.0, -2.0, 2.0))
        self.assertAlmostEqual(0.5, pair(theta, triangle()), places=15)

    def test_delta(self):
        self.assertAlmostEqual(1.0, pair(delta(0.0, Shape.uniform(), (-2.0, 2.0)), triangle()), places=15)
        self.assertAlmostEqual(0.5, pair(delta(0.5, Shape.uniform(), (-2.0, 2.0)), triangle()), places=15)

    def test_delta_lambda(self):
        self.assertEqual(5.0, pair(delta_lambda(0.0, 1.0, (-2.0, 2.0)), step_down()))
        self.assertEqual(0.0, pair(delta_lambda(0.0, 0.0, (-2.0, 2.0)), step_down()))
        self.assertEqual(2.5, pair(delta_lambda(0.0, 0.5, (-2.0, 2.0)), step_down()))

    def test_delta_sees_profile(self):
        # integral over J of (5 s + 5/2) with the uniform shape
        self.assertAlmostEqual(2.5, pair(delta(0.0, Shape.uniform(), (-2.0, 2.0)), step_down()), places=14)
        self.assertAlmostEqual(2.5 + 5.0 / 6.0, pair(delta(0.0, ramp(), (-2.0, 2.0)), step_down()), places=14)

    def test_interval_mismatch(self):
        self.assertRaises(DomainError, pair, delta(0.0, Shape.uniform(), I), triangle())

    def test_shape_independence_on_continuous(self):
        battery = make_battery(I, continuous=True)
        for shape in (uniform(), ramp(), quadratic()):
            for phi in battery:
                self.assertLessEqual(abs(pair(delta(0.0, shape, I), phi) - phi.body.right(0.0)), 1e-12)

    def test_test_function_support(self):
        body = DynamicFn(RegulatedFn.from_coefficients((-1.0, 0.0, 1.0), ((0.0,), (1.0,))), {0.0: RAMP})
        self.assertRaises(DomainError, TestFn, body, (-0.5, 0.5))
        self.assertRaises(DomainError, TestFn, triangle().body, (-0.5, 1.0))
        self.assertRaises(DomainError, TestFn, step_down().body, (0.25, 1.0))
        self.assertEqual((-1.0, 1.0), TestFn.from_dynamic(triangle().body).support)

    def test_test_function_not_collected(self):
        config = configparser.ConfigParser(interpolation=None)
        config.read(os.path.join(os.path.dirname(__file__), os.pardir, "setup.cfg"))
        patterns = config["tool:pytest"]["python_classes"].split()
        self.assertFalse(any(fnmatch.fnmatch(TestFn.__name__, pattern) for pattern in patterns))
        self.assertTrue(any(fnmatch.fnmatch("PairingTestCase", pattern) for pattern in patterns))
        self.assertNotIn("__test__", vars(TestFn))


class TestDistribution(TestCase):

    def test_validation(self):
        zero = RegulatedFn.constant(0.0, *I)
        self.assertRaises(DomainError, Distribution, zero, None, (Atom(1.0, 1.0),))
        self.assertRaises(DomainError, Distribution, zero, None, (Atom(0.0, 1.0), Atom(0.0, 0.0, 1.0)))
        self.assertRaises(DomainError, Distribution, zero, PiecewisePoly.step(0.0, *I))
        self.assertRaises(DomainError, Distribution, zero, PiecewisePoly.zero(0.0, 1.0))

    def test_atoms_sorted(self):
        T = Distribution(RegulatedFn.constant(0.0, *I), None, (Atom(0.5, 1.0), Atom(-0.5, 1.0)))
        self.assertEqual((-0.5, 0.5), tuple(atom.location for atom in T.atoms))
        self.assertIsNotNone(T.atom_at(0.5))
        self.assertIsNone(T.atom_at(0.0))

    def test_sum_combines_atoms(self):
        total = delta(0.0, Shape.uniform(), I) + delta_lambda(0.0, 1.0, I)
        self.assertEqual(1, len(total.atoms))
        self.assertAlmostEqual(2.0, total.atoms[0].mass, places=15)

    def test_atom_shape(self):
        self.assertIsNone(Atom(0.0, density=PiecewisePoly.identity(-0.5, 0.5)).shape)
        self.assertTrue(Atom(0.0, density=PiecewisePoly.constant(4.0, -0.5, 0.5)).shape.density.approx_equal(
            Shape.uniform().density))

    def test_equivalent(self):
        T = delta(0.25, ramp(), I) + Distribution.from_regular(PiecewisePoly.identity(*I))
        battery = make_battery(I, (0.25,))
        self.assertTrue((T + T).equivalent(T * 2.0, battery))
        self.assertFalse(T.equivalent(T * 2.0, battery))
        self.assertTrue((T - T).equivalent(Distribution.zero(*I), battery))

    def test_absorb_stieltjes(self):
        T = Distribution(RegulatedFn.constant(1.0, *I), PiecewisePoly.from_coefficients(I, ((0.0, 0.0, 1.0),)))
        absorbed = T.absorb_stieltjes()
        self.assertTrue(absorbed.stieltjes.approx_equal(PiecewisePoly.zero(*I)))
        self.assertTrue(T.equivalent(absorbed, make_battery(I)))


class TestMultiply(TestCase):

    def test_step_times_uniform_delta(self):
        product = multiply(delta(0.0, Shape.uniform(), I), STEP)
        atom, = product.atoms
        self.assertLessEqual(abs(atom.mass - 0.5), 1e-12)
        self.assertTrue(atom.shape.density.approx_equal(PiecewisePoly.step(0.0, -0.5, 0.5, 0.0, 2.0)))

    def test_heaviside_family(self):
        for c in (0.0, 0.5, 1.0):
            product = delta(0.0, heaviside_shape(c), I) * STEP
            self.assertLessEqual(abs(product.atoms[0].mass - c), 1e-12)

    def test_dynamic_heaviside_times_delta(self):
        product = multiply(delta(0.0, Shape.uniform(), I), heaviside(0.0, I, RAMP))
        atom, = product.atoms
        self.assertLessEqual(abs(atom.mass - 0.5), 1e-12)
        self.assertTrue(atom.shape.density.approx_equal(PiecewisePoly.from_coefficients((-0.5, 0.5), ((1.0, 2.0),))))

    def test_ordinary_factor(self):
        product = multiply(delta(0.0, ramp(), I), DynamicFn.polynomial((3.0, 1.0), *I))
        self.assertLessEqual(abs(product.atoms[0].mass - 3.0), 1e-12)
        self.assertTrue(product.equivalent(delta(0.0, ramp(), I) * 3.0, make_battery(I, (0.0,))))

    def test_regular_stays_regular(self):
        density = PiecewisePoly.from_coefficients((-1.0, 0.25, 1.0), ((1.0, 2.0), (-1.0,)))
        g = heaviside(0.5, I, RAMP)
        product = multiply(Distribution.from_regular(density), g)
        self.assertEqual((), product.atoms)
        self.assertTrue(product.regular.body.approx_equal(density * g.ordinary.body))

    def test_interval_mismatch(self):
        self.assertRaises(DomainError, multiply, delta(0.0, Shape.uniform(), I), DynamicFn.constant(1.0, -2.0, 2.0))

    @given(distributions(), dynamic_fns(smooth=False), st.integers(0, 5))
    @settings(max_examples=200, deadline=None, derandomize=True)
    def test_multiplication_by_pairing(self, T, g, k):
        phi = battery_for(T, g)[k]
        self.assertLessEqual(abs(pair(multiply(T, g), phi) - pair(T, phi.multiply(g))), 1e-10)

    @given(distributions(), dynamic_fns(smooth=False), dynamic_fns(smooth=False), st.integers(0, 5))
    @settings(max_examples=100, deadline=None, derandomize=True)
    def test_associativity(self, T, g, h, k):
        phi = battery_for(T, g, h)[k]
        nested = multiply(multiply(T, g), h)
        joint = multiply(T, mul_dynamic(g, h))
        self.assertLessEqual(abs(pair(nested, phi) - pair(joint, phi)), 1e-10)


class TestDerivative(TestCase):

    def test_dynamic_heaviside(self):
        beta = Profile.polynomial((1.0, 0.0, -2.0, 4.0))
        dtheta = derivative(heaviside(0.0, I, beta))
        atom, = dtheta.atoms
        self.assertTrue(atom.density.approx_equal(beta.curve.derivative()))
        self.assertLessEqual(abs(atom.mass - 1.0), 1e-12)
        self.assertTrue(dtheta.stieltjes.approx_equal(PiecewisePoly.zero(*I)))

    def test_identity(self):
        dt = derivative(DynamicFn.polynomial((0.0, 1.0), *I))
        self.assertEqual((), dt.atoms)
        self.assertTrue(dt.equivalent(Distribution.from_regular(PiecewisePoly.constant(1.0, *I)), make_battery(I)))

    def test_linear_plus_heaviside(self):
        f = DynamicFn.polynomial((0.0, 1.0), *I) + heaviside(0.0, I, RAMP, height=2.0)
        df = derivative(f)
        self.assertLessEqual(abs(df.atoms[0].mass - 2.0), 1e-12)
        self.assertTrue(df.atoms[0].shape.density.approx_equal(Shape.uniform().density))
        self.assertTrue(df.absorb_stieltjes().regular.body.approx_equal(PiecewisePoly.constant(1.0, *I)))

    def test_step_profile_rejected(self):
        self.assertRaises(NotDifferentiableError, derivative, STEP)


class TestLeibniz(TestCase):

    def test_heaviside_squared(self):
        theta = heaviside(0.0, I, RAMP)
        self.assertLessEqual(leibniz_residual(theta, theta, make_battery(I, (0.0,))), 1e-9)

    def test_polynomial_times_heaviside(self):
        f = DynamicFn.polynomial((1.0, 2.0, -1.0), *I)
        theta = heaviside(0.25, I, Profile.polynomial((0.5, 1.5, 0.0, -2.0)))
        self.assertLessEqual(leibniz_residual(f, theta, make_battery(I, (0.25,))), 1e-9)

    def test_step_profile_rejected(self):
        self.assertRaises(NotDifferentiableError, leibniz_residual, STEP, STEP, make_battery(I))

    @given(dynamic_fns(), dynamic_fns())
    @settings(max_examples=100, deadline=None, derandomize=True)
    def test_random_pairs(self, f, g):
        self.assertLessEqual(leibniz_residual(f, g, battery_for(f, g)), 1e-9)


class TestMollify(TestCase):

    def test_uniform_window(self):
        omega = mollify(delta(0.0, Shape.uniform(), I), 2)
        self.assertEqual(2.0, omega.body(0.0))
        self.assertEqual(2.0, omega.body(-0.2))
        self.assertEqual(0.0, omega.body(0.3))

    def test_mass(self):
        T = delta(-0.5, quadratic(), I) + delta(0.5, ramp(), I) * 3.0
        for n in (2, 4, 16, 128):
            self.assertLessEqual(abs(mollify(T, n).body.integral() - 4.0), 1e-12)

    def test_errors(self):
        self.assertRaises(DeltaSequenceError, mollify, delta_lambda(0.0, 0.5, I), 4)
        overlapping = delta(0.0, Shape.uniform(), I) + delta(0.1, Shape.uniform(), I)
        self.assertRaises(DomainError, mollify, overlapping, 5)
        self.assertRaises(DomainError, mollify, delta(0.0, Shape.uniform(), I), 0)
        self.assertRaises(DomainError, mollify, delta(0.9, Shape.uniform(), I), 1)

    def test_mollified_product(self):
        alpha = quadratic()
        gamma = Shape.normalized(RAMP.curve * alpha.density)
        mass = (RAMP.curve * alpha.density).integral()
        for n in (2 ** k for k in range(11)):
            reference = mollify(delta(0.0, gamma, I), n).body * mass
            product = sequential_representation(RAMP, 0.0, n, I).body * mollify(delta(0.0, alpha, I), n).body
            self.assertLessEqual((product - reference).coefficient_norm(),
                                 1e-12 * max(1.0, reference.coefficient_norm()))

    def test_delta_sequence_convergence(self):
        T = delta(0.0, Shape.uniform(), I)
        ns = [2 ** k for k in range(3, 11)]
        residuals = convergence_residual([Distribution.from_regular(mollify(T, n)) for n in ns], T,
                                         make_battery(I, continuous=True))
        for coarse, fine in zip(residuals, residuals[1:]):
            self.assertLessEqual(fine, 0.6 * coarse)

    def test_product_sequence_convergence(self):
        alpha = ramp()
        limit = multiply(delta(0.0, alpha, I), heaviside(0.0, I, RAMP))
        ns = [2 ** k for k in range(3, 10)]
        seq = [Distribution.from_regular(sequential_representation(RAMP, 0.0, n, I) * mollify(delta(0.0, alpha, I), n))
               for n in ns]
        residuals = convergence_residual(seq, limit, make_battery(I, continuous=True))
        self.assertLessEqual(residuals[-1], residuals[0] / 10)

    def test_constant_sequence(self):
        T = delta(0.0, ramp(), I)
        self.assertEqual([0.0, 0.0], convergence_residual([T, T], T, make_battery(I, (0.0,))))


class TestBattery(TestCase):

    def test_reproducible(self):
        first = make_battery(I, (0.0, 0.5), size=8)
        second = make_battery(I, (0.0, 0.5), size=8)
        T = delta(0.0, ramp(), I) + delta_lambda(0.5, 0.25, I)
        self.assertEqual([pair(T, phi) for phi in first], [pair(T, phi) for phi in second])

    def test_profiled_members(self):
        battery = make_battery(I, (0.0, 0.5), size=4)
        self.assertEqual((), battery[0].body.profiles)
        self.assertEqual((0.0, 0.5), battery[1].body.profile_points)
        self.assertTrue(all(not phi.body.profiles for phi in make_battery(I, (0.0,), size=4, continuous=True)))

    def test_locations_outside(self):
        self.assertRaises(DomainError, make_battery, I, (1.0,))

#!/usr/bin/env python3
"""
Tests for test functions and their linear combinations.
"""

import sys
import unittest
from pathlib import Path

import numpy as np
from scipy import integrate

sys.path.insert(0, str(Path(__file__).parent.parent.parent / "occupation-lab"))
from particles import LinearCombination, TestFunction, phi_from_dict


class TestGaussianBump(unittest.TestCase):

    def test_unit_gaussian_has_unit_mass(self):
        for width in (0.3, 1.0, 2.5):
            with self.subTest(width=width):
                self.assertAlmostEqual(TestFunction.unit_gaussian(width).integral, 1.0, places=14)

    def test_moments(self):
        phi = TestFunction.gaussian_bump(center=1.0, width=2.0, amplitude=3.0)
        self.assertAlmostEqual(phi.moment(0), 3.0 * 2.0 * np.sqrt(2 * np.pi), places=12)
        self.assertAlmostEqual(phi.moment(1), phi.integral, places=12)
        self.assertAlmostEqual(phi.moment(2), phi.integral * 5.0, places=12)
        with self.assertRaises(ValueError):
            phi.moment(3)

    def test_fourier_transform_at_zero_is_integral(self):
        phi = TestFunction.gaussian_bump(center=0.5, width=0.7)
        self.assertAlmostEqual(complex(phi.fourier_transform(0.0)).real, phi.integral, places=14)
        self.assertAlmostEqual(abs(complex(phi.fourier_transform(2.0))),
                               phi.integral * np.exp(-0.5 * (0.7 * 2.0) ** 2), places=14)

    def test_support_radius(self):
        phi = TestFunction.gaussian_bump(center=2.0, width=0.5, amplitude=4.0)
        eps = 1e-6
        radius = phi.support_radius(eps)
        self.assertLessEqual(float(phi(radius)), eps * phi.peak * (1 + 1e-9))
        self.assertLessEqual(float(phi(-radius)), eps * phi.peak)

    def test_validation(self):
        with self.assertRaises(ValueError):
            TestFunction.gaussian_bump(width=0.0)
        with self.assertRaises(ValueError):
            TestFunction("triangle")


class TestInversePower(unittest.TestCase):

    def test_integral_matches_quadrature(self):
        for m in (2.0, 3.0, 4.5):
            phi = TestFunction.inverse_power(m)
            numeric, _ = integrate.quad(phi, -np.inf, np.inf, epsabs=1e-12)
            with self.subTest(m=m):
                self.assertAlmostEqual(phi.integral, numeric, places=8)

    def test_second_moment(self):
        self.assertAlmostEqual(TestFunction.inverse_power(4.0).moment(2), np.pi / np.sqrt(2.0),
                               places=12)
        self.assertEqual(TestFunction.inverse_power(3.0).moment(2), np.inf)

    def test_fourier_transform(self):
        phi = TestFunction.inverse_power(2.0)
        self.assertAlmostEqual(complex(phi.fourier_transform(1.0)).real, np.pi * np.exp(-1.0),
                               places=14)
        numeric = phi._cosine_transform(1.0)
        self.assertAlmostEqual(numeric.real, np.pi * np.exp(-1.0), places=8)
        phi4 = TestFunction.inverse_power(4.0)
        self.assertAlmostEqual(complex(phi4.fourier_transform(0.0)).real, phi4.integral, places=12)

    def test_requires_m_at_least_two(self):
        with self.assertRaises(ValueError):
            TestFunction.inverse_power(1.5)
        self.assertEqual(TestFunction.inverse_power(3.0).decay_exponent, 3.0)


class TestLinearCombination(unittest.TestCase):

    def setUp(self):
        self.a = TestFunction.unit_gaussian(1.0)
        self.b = TestFunction.gaussian_bump(center=1.0, width=0.5)
        self.combo = LinearCombination(((2.0, self.a), (-1.0, self.b)))

    def test_is_linear(self):
        x = np.linspace(-3, 3, 13)
        np.testing.assert_allclose(self.combo(x), 2.0 * self.a(x) - self.b(x), rtol=1e-14)
        self.assertAlmostEqual(self.combo.integral, 2.0 * self.a.integral - self.b.integral)
        self.assertAlmostEqual(self.combo.moment(1), -self.b.first_moment)
        self.assertAlmostEqual(self.combo.peak, 2.0 * self.a.peak + self.b.peak)

    def test_dict_form_restores_the_combination(self):
        self.assertEqual(phi_from_dict(self.combo.to_dict()), self.combo)
        self.assertEqual(phi_from_dict(self.a.to_dict()), self.a)

    def test_needs_a_term(self):
        with self.assertRaises(ValueError):
            LinearCombination(())


if __name__ == "__main__":
    unittest.main()

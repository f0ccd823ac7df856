#!/usr/bin/env python3
"""
Tests for the potential operator and the three quadrature schemes behind it.
"""

import sys
import unittest
from pathlib import Path

import numpy as np
from scipy import special

sys.path.insert(0, str(Path(__file__).parent.parent.parent / "occupation-lab"))
from particles import TestFunction
from stable import DEFAULT_GRID
from theory import PotentialDomainError, PotentialOperator, c_alpha, potential_apply, wiener_cov


def _gaussian_pairing(power: float) -> float:
    """(1/2pi) int exp(-xi^2) |xi|^(-power) dxi for the unit Gaussian."""
    return special.gamma(0.5 * (1.0 - power)) / (2.0 * np.pi)


class TestPotentialOperator(unittest.TestCase):
    """G phi and the pairings int phi G psi, int (G phi)(G psi)."""

    def setUp(self):
        self.phi = TestFunction.unit_gaussian(1.0)

    def test_constant(self):
        alpha = 0.5
        expected = special.gamma(0.25) / (2**0.5 * np.sqrt(np.pi) * special.gamma(0.25))
        self.assertAlmostEqual(c_alpha(alpha), expected, places=14)
        self.assertEqual(PotentialOperator(alpha).C_alpha, c_alpha(alpha))

    def test_domain(self):
        for alpha in (0.0, 1.0, 1.5):
            with self.assertRaises(PotentialDomainError):
                PotentialOperator(alpha)
        with self.assertRaises(PotentialDomainError):
            PotentialOperator(0.6).grid_product_integral(self.phi, self.phi)
        with self.assertRaises(PotentialDomainError):
            PotentialOperator(0.5).fourier_pairing(self.phi, self.phi, 1.2)

    def test_pointwise_value_at_origin(self):
        for alpha in (0.3, 0.5, 0.8):
            op = PotentialOperator(alpha)
            closed = (c_alpha(alpha) * 2 ** (alpha / 2) * special.gamma(alpha / 2)
                      / np.sqrt(2 * np.pi))
            with self.subTest(alpha=alpha):
                self.assertAlmostEqual(op.evaluate(self.phi, 0.0) / closed, 1.0, places=8)
                origin = int(round(-DEFAULT_GRID.xs[0] / DEFAULT_GRID.step))
                self.assertAlmostEqual(potential_apply(op, self.phi)[origin] / closed, 1.0,
                                       delta=1e-6)

    def test_grid_matches_pointwise_quadrature(self):
        op = PotentialOperator(0.6)
        phi = TestFunction.gaussian_bump(center=0.5, width=0.8)
        values = op.apply(phi)
        for x in (-3.0, 0.5, 7.0, 20.0):
            index = int(round((x - DEFAULT_GRID.xs[0]) / DEFAULT_GRID.step))
            with self.subTest(x=x):
                self.assertAlmostEqual(values[index] / op.evaluate(phi, x), 1.0, delta=1e-6)

    def test_pairing_closed_form(self):
        for alpha in (0.25, 0.5, 0.75):
            op = PotentialOperator(alpha)
            expected = _gaussian_pairing(alpha)
            with self.subTest(alpha=alpha):
                self.assertAlmostEqual(op.fourier_pairing(self.phi, self.phi, alpha) / expected,
                                       1.0, places=8)
                self.assertAlmostEqual(op.grid_pairing(self.phi, self.phi) / expected, 1.0,
                                       delta=1e-5)

    def test_product_integral_closed_form(self):
        for alpha in (0.2, 0.35):
            op = PotentialOperator(alpha)
            expected = _gaussian_pairing(2.0 * alpha)
            with self.subTest(alpha=alpha):
                self.assertAlmostEqual(op.grid_product_integral(self.phi, self.phi) / expected,
                                       1.0, delta=1e-4)
                self.assertAlmostEqual(op.fourier_pairing(self.phi, self.phi, 2.0 * alpha)
                                       / expected, 1.0, places=7)

    def test_pairing_is_symmetric(self):
        op = PotentialOperator(0.4)
        psi = TestFunction.gaussian_bump(center=2.0, width=0.6, amplitude=3.0)
        forward = op.grid_pairing(self.phi, psi)
        self.assertAlmostEqual(forward / op.grid_pairing(psi, self.phi), 1.0, delta=1e-10)

    def test_schemes_agree_on_shifted_pair(self):
        op = PotentialOperator(0.4)
        psi = TestFunction.gaussian_bump(center=1.5, width=0.5)
        grid = op.grid_pairing(self.phi, psi)
        fourier = op.fourier_pairing(self.phi, psi, 0.4)
        self.assertAlmostEqual(grid / fourier, 1.0, delta=1e-5)

    def test_wiener_covariance_schemes_agree(self):
        kwargs = dict(etheta=1.0, V=1.0, phi=self.phi, psi=self.phi, s=1.0, t=2.0, alpha=0.3)
        grid = wiener_cov("b", scheme="grid", **kwargs)
        fourier = wiener_cov("b", scheme="fourier", **kwargs)
        self.assertAlmostEqual(grid / fourier, 1.0, delta=1e-4)


if __name__ == "__main__":
    unittest.main()

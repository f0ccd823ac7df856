#!/usr/bin/env python3
"""
Tests for the exact second-moment oracle of a single-ancestor system.
"""

import sys
import unittest
from pathlib import Path

import numpy as np
from scipy import integrate

sys.path.insert(0, str(Path(__file__).parent.parent.parent / "occupation-lab"))
from particles import TestFunction
from stable import StableParams, UniformGrid
from theory import moment_oracle, moment_oracle_detail


def _heat(amplitude: float, var: float, t: float):
    """T_t applied to amplitude * exp(-x^2 / (2 var)) for the alpha = 2 motion."""
    spread = var + 2.0 * t
    return amplitude * np.sqrt(var / spread), spread


def _gaussian_branching_term(r: float, r_prime: float) -> float:
    """int_0^r T_u((T_{r-u} phi)(T_{r'-u} phi))(0) du for phi = exp(-x^2/2)."""

    def integrand(u):
        a1, v1 = _heat(1.0, 1.0, r - u)
        a2, v2 = _heat(1.0, 1.0, r_prime - u)
        amplitude, _ = _heat(a1 * a2, v1 * v2 / (v1 + v2), u)
        return amplitude

    value, _ = integrate.quad(integrand, 0.0, r, epsabs=1e-13)
    return value


class TestMomentOracle(unittest.TestCase):

    def setUp(self):
        self.gauss = StableParams(2.0)
        self.phi = TestFunction.gaussian_bump(width=1.0)

    def test_nonbranching_closed_form(self):
        value = moment_oracle(self.gauss, False, 0.0, 0.0, 1.0, 2.0, self.phi, self.phi)
        self.assertAlmostEqual(value, 1.0 / np.sqrt(11.0), places=9)

    def test_zero_rate_matches_nonbranching(self):
        plain = moment_oracle(self.gauss, False, 0.0, 0.0, 1.0, 2.0, self.phi, self.phi)
        detail = moment_oracle_detail(self.gauss, True, 0.0, 0.0, 1.0, 2.0, self.phi, self.phi)
        self.assertEqual(detail.value, plain)
        self.assertEqual(detail.branching_term, 0.0)

    def test_branching_closed_form(self):
        detail = moment_oracle_detail(self.gauss, True, 1.0, 0.0, 1.0, 2.0, self.phi, self.phi)
        self.assertAlmostEqual(detail.nonbranching_term, 1.0 / np.sqrt(11.0), places=9)
        self.assertAlmostEqual(detail.branching_term, _gaussian_branching_term(1.0, 2.0),
                               places=8)
        self.assertLess(detail.richardson_gap, 1e-6)

    def test_branching_term_is_linear_in_rate(self):
        stable = StableParams(1.5)
        one = moment_oracle_detail(stable, True, 1.0, 0.2, 0.5, 1.0, self.phi, self.phi)
        three = moment_oracle_detail(stable, True, 3.0, 0.2, 0.5, 1.0, self.phi, self.phi)
        self.assertAlmostEqual(three.branching_term, 3.0 * one.branching_term, places=12)
        self.assertEqual(three.nonbranching_term, one.nonbranching_term)

    def test_time_zero(self):
        psi = TestFunction.gaussian_bump(center=0.5, width=2.0)
        value = moment_oracle(StableParams(1.2), True, 1.0, 0.25, 0.0, 0.0, self.phi, psi)
        self.assertAlmostEqual(value, float(self.phi(0.25) * psi(0.25)), places=12)
        # phi is read at the start, psi after r' of motion
        evolved = _heat(1.0, 1.0, 0.5)
        value = moment_oracle(self.gauss, False, 0.0, 0.0, 0.0, 0.5, self.phi, self.phi)
        self.assertAlmostEqual(value, evolved[0], places=9)

    def test_arguments_are_symmetrised(self):
        stable = StableParams(1.2)
        psi = TestFunction.gaussian_bump(center=1.0, width=0.5)
        forward = moment_oracle(stable, True, 1.0, 0.0, 0.5, 1.5, self.phi, psi)
        backward = moment_oracle(stable, True, 1.0, 0.0, 1.5, 0.5, psi, self.phi)
        self.assertEqual(forward, backward)

    def test_validation(self):
        with self.assertRaises(ValueError):
            moment_oracle(self.gauss, False, 0.0, 0.0, -1.0, 1.0, self.phi, self.phi)
        with self.assertRaises(ValueError):
            moment_oracle(self.gauss, True, 1.0, 0.0, 1.0, 1.0, self.phi, self.phi, panels=7)
        with self.assertRaises(ValueError):
            moment_oracle(self.gauss, False, 0.0, 100.0, 1.0, 1.0, self.phi, self.phi)

    def test_custom_grid(self):
        grid = UniformGrid(32.0, 2**12)
        coarse = moment_oracle(self.gauss, False, 0.0, 0.0, 1.0, 2.0, self.phi, self.phi, grid)
        self.assertAlmostEqual(coarse, 1.0 / np.sqrt(11.0), places=8)


if __name__ == "__main__":
    unittest.main()

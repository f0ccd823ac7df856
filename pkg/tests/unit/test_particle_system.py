#!/usr/bin/env python3
"""
Tests for the particle-system simulator and the fluctuation sampler.
"""

import sys
import unittest
from pathlib import Path

import numpy as np
from scipy import integrate

sys.path.insert(0, str(Path(__file__).parent.parent.parent / "occupation-lab"))
from particles import (
    PlacementRule,
    PointMeasure,
    PopulationExplosionError,
    SystemConfig,
    TestFunction,
    ThetaLaw,
    centering_matrix,
    check_regime,
    fluctuation_sample,
    mc_mixed_moment,
    simulate_occupation,
    simulate_system,
)
from stable import StableParams
from theory import RegimeMismatchError, UnsupportedRegimeError, classify_regime, moment_oracle


def _gaussian_semigroup_at_zero(phi_width: float, s: float) -> float:
    """T_s phi(0) for phi = exp(-x^2 / (2 w^2)) under the alpha = 2 motion."""
    var = phi_width**2 + 2.0 * s
    return phi_width / np.sqrt(var)


class TestSystemConfig(unittest.TestCase):

    def test_validation(self):
        stable = StableParams(1.5)
        with self.assertRaises(ValueError):
            SystemConfig(stable, horizon_T=0.0)
        with self.assertRaises(ValueError):
            SystemConfig(stable, tau=-1.0)
        with self.assertRaises(ValueError):
            SystemConfig(stable, rate_V=-0.5)
        with self.assertRaises(ValueError):
            SystemConfig(stable, horizon_T=1.0, step_delta=2.0)

    def test_default_step(self):
        stable = StableParams(1.5)
        self.assertEqual(SystemConfig(stable, horizon_T=200.0).delta, 0.05)
        self.assertAlmostEqual(SystemConfig(stable, horizon_T=10.0).delta, 0.005)
        self.assertEqual(SystemConfig(stable, horizon_T=10.0).with_step(0.1).delta, 0.1)

    def test_rate_only_counts_with_branching(self):
        stable = StableParams(0.7)
        self.assertEqual(SystemConfig(stable, branching=False, rate_V=3.0).effective_rate, 0.0)
        self.assertEqual(SystemConfig(stable, branching=True, rate_V=3.0).effective_rate, 3.0)


class TestSimulateSystem(unittest.TestCase):
    """Raw occupation integrals, pairings and population sizes."""

    def setUp(self):
        self.phi = TestFunction.gaussian_bump(width=1.0)
        self.stable = StableParams(2.0)

    def test_time_zero_snapshot(self):
        config = SystemConfig(self.stable, horizon_T=1.0, step_delta=0.1)
        measure = PointMeasure((0, 3), np.array([0.0, 1.0, 2.0]))
        record = simulate_system(config, measure, [self.phi], [0.0, 1.0],
                                 np.random.default_rng(0))
        self.assertEqual(record.integrals[0, 0], 0.0)
        self.assertAlmostEqual(record.pairings[0, 0], float(self.phi(measure.atoms).sum()))
        np.testing.assert_array_equal(record.population, [3, 3])
        self.assertEqual(record.initial_count, 3)

    def test_mean_occupation_of_single_particles(self):
        n, upper = 2000, 1.0
        config = SystemConfig(self.stable, horizon_T=upper, step_delta=0.01)
        measure = PointMeasure((0, 1), np.zeros(n))
        record = simulate_system(config, measure, [self.phi], [1.0], np.random.default_rng(11),
                                 per_atom=True)
        per_atom = record.atom_integrals[0, 0]
        expected, _ = integrate.quad(lambda s: _gaussian_semigroup_at_zero(1.0, s), 0.0, upper)
        se = per_atom.std(ddof=1) / np.sqrt(n)
        self.assertLess(abs(per_atom.mean() - expected), 4 * se + 0.005)
        self.assertAlmostEqual(per_atom.sum(), record.integrals[0, 0], places=8)

    def test_critical_branching_conserves_mean_population(self):
        n = 5000
        config = SystemConfig(StableParams(0.75), branching=True, rate_V=1.0, horizon_T=2.0,
                              step_delta=0.1)
        measure = PointMeasure((0, 1), np.zeros(n))
        record = simulate_system(config, measure, [self.phi], [1.0], np.random.default_rng(3))
        # variance of the total grows like n V t
        self.assertLess(abs(int(record.population[-1]) - n), 4 * np.sqrt(n * 2.0))

    def test_subtrees_are_independent(self):
        n = 4000
        config = SystemConfig(StableParams(0.75), branching=True, rate_V=1.0, horizon_T=2.0,
                              step_delta=0.1)
        measure = PointMeasure((0, 1), np.zeros(n))
        record = simulate_system(config, measure, [self.phi], [1.0], np.random.default_rng(17),
                                 per_atom=True)
        integrals = record.atom_integrals[0, 0]
        pairings = record.atom_pairings[0, 0]
        self.assertAlmostEqual(integrals.sum(), record.integrals[0, 0], places=8)
        self.assertAlmostEqual(pairings.sum(), record.pairings[0, 0], places=8)
        bound = 4.0 / np.sqrt(n // 2)
        for values in (integrals, pairings):
            self.assertLess(abs(np.corrcoef(values[0::2], values[1::2])[0, 1]), bound)
        # subtrees of atoms at the same site are identically distributed
        first, second = integrals[: n // 2], integrals[n // 2:]
        se = np.sqrt(first.var(ddof=1) / first.size + second.var(ddof=1) / second.size)
        self.assertLess(abs(first.mean() - second.mean()), 4 * se)

    def test_zero_rate_branching_keeps_population(self):
        config = SystemConfig(StableParams(0.75), branching=True, rate_V=0.0, horizon_T=1.0,
                              step_delta=0.1)
        measure = PointMeasure((0, 5), np.arange(5.0))
        record = simulate_system(config, measure, [self.phi], [0.5, 1.0],
                                 np.random.default_rng(3))
        np.testing.assert_array_equal(record.population, [5, 5])

    def test_step_budget(self):
        config = SystemConfig(self.stable, horizon_T=1.0, step_delta=0.01, max_particle_steps=50)
        measure = PointMeasure((0, 10), np.arange(10.0))
        with self.assertRaises(PopulationExplosionError):
            simulate_system(config, measure, [self.phi], [1.0], np.random.default_rng(0))

    def test_observation_times_validated(self):
        config = SystemConfig(self.stable, horizon_T=1.0, step_delta=0.1)
        measure = PointMeasure((0, 1), np.zeros(1))
        rng = np.random.default_rng(0)
        with self.assertRaises(ValueError):
            simulate_system(config, measure, [self.phi], [1.0, 0.5], rng)
        with self.assertRaises(ValueError):
            simulate_system(config, measure, [self.phi], [1.5], rng)

    def test_same_seed_same_result(self):
        config = SystemConfig(StableParams(0.75), branching=True, rate_V=1.0, horizon_T=1.0,
                              step_delta=0.05)
        measure = PointMeasure((-5, 5), np.arange(-5.0, 5.0))
        first = simulate_occupation(config, measure, [self.phi], [0.5, 1.0],
                                    np.random.default_rng(42))
        second = simulate_occupation(config, measure, [self.phi], [0.5, 1.0],
                                     np.random.default_rng(42))
        np.testing.assert_array_equal(first, second)


class TestMixedMoment(unittest.TestCase):

    def test_matches_oracle_without_branching(self):
        stable = StableParams(2.0)
        phi = TestFunction.gaussian_bump(width=1.0)
        mean, se = mc_mixed_moment(stable, False, 0.0, 0.0, 1.0, 2.0, phi, phi, 20000,
                                   np.random.default_rng(8))
        oracle = moment_oracle(stable, False, 0.0, 0.0, 1.0, 2.0, phi, phi)
        self.assertGreater(se, 0.0)
        self.assertLess(abs(mean - oracle), 4 * se)

    def test_time_zero_product(self):
        phi = TestFunction.gaussian_bump(width=1.0)
        psi = TestFunction.gaussian_bump(center=0.5, width=2.0)
        mean, se = mc_mixed_moment(StableParams(1.5), True, 1.0, 0.3, 0.0, 0.0, phi, psi, 10,
                                   np.random.default_rng(0))
        self.assertAlmostEqual(mean, float(phi(0.3) * psi(0.3)))
        self.assertEqual(se, 0.0)

    def test_needs_two_replicas(self):
        phi = TestFunction.gaussian_bump()
        with self.assertRaises(ValueError):
            mc_mixed_moment(StableParams(1.5), False, 0.0, 0.0, 1.0, 1.0, phi, phi, 1,
                            np.random.default_rng(0))


class TestFluctuationSample(unittest.TestCase):
    """Centred and normed replicas of <X_T(t_i), phi_j>."""

    def setUp(self):
        self.config = SystemConfig(StableParams(2.0), horizon_T=10.0, step_delta=0.05)
        self.theta = ThetaLaw.deterministic(1)
        self.placement = PlacementRule.left_endpoint()
        self.phis = (TestFunction.unit_gaussian(1.0),)
        self.times = (0.5, 1.0)
        self.regime = classify_regime(2.0, False, self.theta)

    def test_check_regime(self):
        check_regime(self.config, self.theta, self.regime)
        with self.assertRaises(RegimeMismatchError):
            check_regime(self.config, self.theta, classify_regime(0.8, False, self.theta))
        with self.assertRaises(UnsupportedRegimeError):
            check_regime(self.config, self.theta, classify_regime(1.2, True, self.theta, 1.0))

    def test_sample_shape_and_norming(self):
        sample = fluctuation_sample(self.config, self.theta, self.placement, self.phis,
                                    self.times, self.regime, np.random.default_rng(1))
        self.assertEqual(sample.values.shape, (2, 1))
        self.assertAlmostEqual(sample.norming, 10.0**0.75)
        self.assertEqual(sample.regime_label, "NB_low")
        rows = sample.rows(4)
        self.assertEqual([r[:3] for r in rows], [(4, 0, 0), (4, 1, 0)])

    def test_centering_removes_the_mean(self):
        window = (-30, 30)
        centering = centering_matrix(self.config, self.theta, self.placement, self.phis,
                                     self.times, window)
        self.assertEqual(centering.shape, (2, 1))
        rng = np.random.default_rng(2024)
        values = np.array([
            fluctuation_sample(self.config, self.theta, self.placement, self.phis, self.times,
                               self.regime, rng, window=window, centering=centering).values[-1, 0]
            for _ in range(200)])
        se = values.std(ddof=1) / np.sqrt(values.size)
        self.assertLess(abs(values.mean()), 4 * se)


if __name__ == "__main__":
    unittest.main()

#!/usr/bin/env python3
"""
Long-running checks: discretisation sensitivity, the second-moment oracle and
desk-scale runs of the shipped configurations.

OCCLAB_RUN_SLOW=1 enables the minute-scale checks; OCCLAB_RUN_DESK_SCALE=1
enables the full configurations (hours on a desktop).
"""

import json
import os
import shutil
import sys
import tempfile
import unittest
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent.parent / "occupation-lab"))

import importlib.util
spec = importlib.util.spec_from_file_location(
    "occupation_lab",
    Path(__file__).parent.parent.parent / "occupation-lab" / "occupation-lab.py"
)
occupation_lab = importlib.util.module_from_spec(spec)
spec.loader.exec_module(occupation_lab)

from core import load_config, prepare_plan, step_halving_check, window_doubling_check
from particles import PlacementRule, SystemConfig, TestFunction, ThetaLaw
from stable import StableParams

CONFIG_DIR = Path(__file__).parent.parent.parent / "occupation-lab" / "configs"
RUN_SLOW = os.getenv("OCCLAB_RUN_SLOW") == "1"
RUN_DESK_SCALE = os.getenv("OCCLAB_RUN_DESK_SCALE") == "1"


@unittest.skipUnless(RUN_SLOW, "set OCCLAB_RUN_SLOW=1 to run")
class TestDiscretisation(unittest.TestCase):
    """Variance shifts under a wider window and a finer step stay within noise."""

    def setUp(self):
        config = SystemConfig(StableParams(2.0), horizon_T=10.0, step_delta=0.1)
        self.plan = prepare_plan(config, ThetaLaw.poisson(1.0), PlacementRule.iid_uniform(),
                                 [TestFunction.unit_gaussian(1.0)], [0.5, 1.0],
                                 window=(-25, 25))

    def test_window_doubling(self):
        result = window_doubling_check(self.plan, 400, 11, target=(1, 0))
        self.assertGreater(result["se"], 0.0)
        self.assertLessEqual(abs(result["shift"]), 4.0 * result["se"])

    def test_step_halving(self):
        result = step_halving_check(self.plan, 400, 12, target=(1, 0))
        self.assertLessEqual(abs(result["shift"]), 4.0 * result["se"])


@unittest.skipUnless(RUN_SLOW, "set OCCLAB_RUN_SLOW=1 to run")
class TestOracleCheck(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_branching_oracle_agrees_with_monte_carlo(self):
        lab = occupation_lab.OccupationLab(
            load_config(CONFIG_DIR / "oracle_branching.json").with_overrides(
                output_dir=self.temp_dir))
        result = lab.oracle_check(replicas=40000)
        self.assertEqual(len(result["rows"]), 2)
        for row in result["rows"]:
            with self.subTest(r=row["r"], r_prime=row["r_prime"]):
                self.assertGreater(row["branching_term"], 0.0)
                self.assertLess(abs(row["z"]), 5.0)
        saved = json.loads((Path(self.temp_dir) / "oracle_check.json").read_text())
        self.assertEqual(saved["replicas"], 40000)


@unittest.skipUnless(RUN_DESK_SCALE, "set OCCLAB_RUN_DESK_SCALE=1 to run")
class TestDeskScale(unittest.TestCase):
    """Shipped configurations simulated in full and verified against their limits."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def _simulate_and_verify(self, name):
        config = load_config(CONFIG_DIR / name).with_overrides(
            output_dir=str(Path(self.temp_dir) / name))
        lab = occupation_lab.OccupationLab(config)
        lab.simulate()
        return lab.verify()

    def test_non_branching_low(self):
        summary = self._simulate_and_verify("nb_low_poisson.json")
        self.assertGreaterEqual(summary["pass_fraction"], 0.8)

    def test_branching_low(self):
        summary = self._simulate_and_verify("b_low_poisson.json")
        self.assertGreaterEqual(summary["pass_fraction"], 0.8)


if __name__ == "__main__":
    unittest.main()

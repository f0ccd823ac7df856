#!/usr/bin/env python3
"""
Integration tests for the complete simulate -> verify workflow through the CLI.
Every test works on a small configuration inside a temporary directory.
"""

import contextlib
import io
import json
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

SMALL_CONFIG = {
    "schema_version": 1,
    "stable": {"alpha": 2.0},
    "system": {"branching": False, "horizon_T": 4.0, "tau": 1.0, "step_delta": 0.5},
    "theta": {"kind": "deterministic", "k": 1},
    "placement": {"kind": "left_endpoint"},
    "test_functions": [{"kind": "unit_gaussian", "width": 1.0}],
    "obs_times": [0.5, 1.0],
    "window": [-10, 10],
    "replicas": 120,
    "master_seed": 424242,
    "output_dir": "runs/small",
}


def run_cli(*argv):
    buffer = io.StringIO()
    with contextlib.redirect_stdout(buffer):
        code = occupation_lab.main(list(argv))
    text = buffer.getvalue().strip()
    return code, json.loads(text) if text else None


class TestCliWorkflow(unittest.TestCase):
    """simulate, sample-limit and verify against files on disk."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.root = Path(self.temp_dir)
        self.config_path = self.root / "small.json"
        self.config_path.write_text(json.dumps(SMALL_CONFIG), encoding="utf-8")

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def _simulate(self, out, *extra):
        return run_cli("simulate", "--config", str(self.config_path), "--out", str(out),
                       "--threads", "1", *extra)

    def test_simulation_is_reproducible(self):
        code, first = self._simulate(self.root / "a")
        self.assertEqual(code, occupation_lab.EXIT_OK)
        self.assertEqual(first["replicas"], 120)
        self.assertEqual(first["regime"], "NB_low")
        code, second = self._simulate(self.root / "b")
        self.assertEqual(code, occupation_lab.EXIT_OK)
        self.assertEqual(first["fingerprint"], second["fingerprint"])

        table_a = (self.root / "a" / "replicas.csv").read_bytes()
        self.assertEqual(table_a, (self.root / "b" / "replicas.csv").read_bytes())
        code, _ = self._simulate(self.root / "c", "--threads", "2")
        self.assertEqual(code, occupation_lab.EXIT_OK)
        self.assertEqual(table_a, (self.root / "c" / "replicas.csv").read_bytes())

        code, _ = self._simulate(self.root / "d", "--seed", "1")
        self.assertEqual(code, occupation_lab.EXIT_OK)
        self.assertNotEqual(table_a, (self.root / "d" / "replicas.csv").read_bytes())

    def test_reports_are_reproducible(self):
        for name in ("a", "b"):
            self._simulate(self.root / name)
            code, _ = run_cli("verify", "--config", str(self.config_path),
                              "--out", str(self.root / name))
            self.assertEqual(code, occupation_lab.EXIT_OK)
        for relative in ("report.json", "plots/theory_vs_empirical.csv",
                         "plots/lag_covariance.csv"):
            with self.subTest(file=relative):
                self.assertEqual((self.root / "a" / relative).read_bytes(),
                                 (self.root / "b" / relative).read_bytes())

    def test_run_directory_contents(self):
        self._simulate(self.root / "run")
        run_dir = self.root / "run"
        for name in ("config.json", "replicas.csv", "meta.json"):
            self.assertTrue((run_dir / name).exists(), name)
        meta = json.loads((run_dir / "meta.json").read_text())
        self.assertEqual(meta["source"], "simulation")
        self.assertEqual(meta["window"], [-10, 10])
        self.assertEqual(meta["seeds"]["master_seed"], 424242)
        saved = json.loads((run_dir / "config.json").read_text())
        self.assertEqual(saved["output_dir"], str(run_dir))
        lines = (run_dir / "replicas.csv").read_text().splitlines()
        self.assertEqual(lines[0], "replica,t_index,phi_index,value")
        self.assertEqual(len(lines), 1 + 120 * 2)

    def test_verify_simulated_run(self):
        self._simulate(self.root / "run")
        code, summary = run_cli("verify", "--config", str(self.config_path),
                                "--out", str(self.root / "run"))
        self.assertEqual(code, occupation_lab.EXIT_OK)
        self.assertEqual(summary["entries"], 4)
        report = json.loads((self.root / "run" / "report.json").read_text())
        self.assertEqual(report["replicas"], 120)
        self.assertEqual(report["normality"], [])
        self.assertTrue((self.root / "run" / "plots" / "theory_vs_empirical.csv").exists())

    def test_sample_limit_then_verify(self):
        out = self.root / "limit"
        code, summary = run_cli("sample-limit", "--config", str(self.config_path),
                                "--out", str(out), "--replicas", "800")
        self.assertEqual(code, occupation_lab.EXIT_OK)
        self.assertEqual(summary["replicas"], 800)
        meta = json.loads((out / "meta.json").read_text())
        self.assertEqual(meta["source"], "limit")

        code, summary = run_cli("verify", "--config", str(self.config_path),
                                "--out", str(out), "--replicas", "800")
        self.assertEqual(code, occupation_lab.EXIT_OK)
        report = json.loads((out / "report.json").read_text())
        self.assertEqual(len(report["entries"]), 4)
        self.assertEqual(len(report["normality"]), 2)
        self.assertGreaterEqual(report["pass_fraction"], 0.5)
        plots = sorted(p.name for p in (out / "plots").iterdir())
        self.assertIn("lag_covariance.csv", plots)
        self.assertIn("theory_vs_empirical.csv", plots)

    def test_verify_with_other_seed_is_rejected(self):
        self._simulate(self.root / "run")
        code, output = run_cli("verify", "--config", str(self.config_path),
                               "--out", str(self.root / "run"), "--seed", "7")
        self.assertEqual(code, occupation_lab.EXIT_INCONSISTENT)
        self.assertIsNone(output)

    def test_verify_missing_run(self):
        code, _ = run_cli("verify", "--config", str(self.config_path),
                          "--run-dir", str(self.root / "nowhere"))
        self.assertEqual(code, occupation_lab.EXIT_INCONSISTENT)

    def test_unsupported_regime_exits_two(self):
        data = dict(SMALL_CONFIG, stable={"alpha": 1.5},
                    system={"branching": True, "V": 1.0, "horizon_T": 4.0})
        path = self.root / "unsupported.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        for command in ("simulate", "sample-limit"):
            with self.subTest(command=command):
                code, _ = run_cli(command, "--config", str(path), "--out",
                                  str(self.root / command), "--threads", "1")
                self.assertEqual(code, occupation_lab.EXIT_UNSUPPORTED)

    def test_invalid_config_exits_three(self):
        path = self.root / "invalid.json"
        path.write_text(json.dumps(dict(SMALL_CONFIG, obs_times=[1.0, 0.5])), encoding="utf-8")
        code, _ = run_cli("simulate", "--config", str(path), "--threads", "1")
        self.assertEqual(code, occupation_lab.EXIT_INCONSISTENT)


if __name__ == "__main__":
    unittest.main()

#!/usr/bin/env python3
"""
Occupation Lab - occupation-time fluctuations of alpha-stable particle systems.

SUBCOMMANDS:
- classify:     which limit theorem applies to (alpha, branching, V, theta)
- simulate:     replica-parallel simulation of <X_T(t_i), phi_k> from a config
- verify:       compare a replica table with the limit covariance of its regime
- oracle-check: finite-time second-moment oracle against single-particle Monte Carlo
- sample-limit: draw replicas from the limit process itself (self-consistency runs)

GUARANTEES:
- Every subcommand is deterministic given (config, seed)
- Replica i depends on (master seed, i) only, not on --threads
- Exit codes: 0 ok, 1 runtime failure, 2 unsupported regime, 3 input inconsistency
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from core import (
    CONFIG_FILE,
    META_FILE,
    PLOTS_DIR,
    REPLICAS_FILE,
    REPORT_FILE,
    ConfigError,
    RunConfig,
    RunFileError,
    array_rows,
    load_config,
    plan_from_config,
    read_json,
    read_replicas_csv,
    run_metadata,
    run_replicas,
    sample_rows,
    save_config,
    write_json,
    write_plot_csvs,
    write_replicas_csv,
)
from core.run_config import OracleSpec
from particles import MeasureConstructionError, ThetaLaw, mc_mixed_moment
from theory import (
    RegimeMismatchError,
    UnsupportedRegimeError,
    classify_regime,
    moment_oracle_detail,
    sample_limit_field,
)
from utils import auxiliary_stream
from verification import (
    Z_BAND,
    InsufficientReplicasError,
    compare_to_limit,
    estimate_cov,
    plot_data,
)

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_UNSUPPORTED = 2
EXIT_INCONSISTENT = 3

ORACLE_FILE = "oracle_check.json"


class FingerprintMismatchError(ValueError):
    """Run files were produced by a different configuration."""
    pass


class OccupationLab:
    """Front end tying configuration, execution and reporting together."""

    def __init__(self, config: RunConfig, threads: Optional[int] = None):
        """Initialize with a validated configuration (overrides already applied)."""
        self.config = config
        self.threads = threads
        self.out_dir = Path(config.output_dir)

    def simulate(self) -> Dict[str, Any]:
        """Run all replicas and write config.json, replicas.csv and meta.json."""
        plan = plan_from_config(self.config)
        samples = run_replicas(plan, self.config.replicas, self.config.master_seed, self.threads)
        fingerprint = self.config.fingerprint()

        save_config(self.config, self.out_dir / CONFIG_FILE)
        write_replicas_csv(sample_rows(samples), self.out_dir / REPLICAS_FILE)
        meta = run_metadata(plan, samples, self.config.master_seed, fingerprint, self.threads)
        meta["source"] = "simulation"
        write_json(meta, self.out_dir / META_FILE)
        logger.info(f"✅ Wrote {len(samples)} replicas to {self.out_dir}")
        return {"out": str(self.out_dir), "replicas": len(samples), "fingerprint": fingerprint,
                "regime": plan.regime.label.value}

    def sample_limit(self) -> Dict[str, Any]:
        """Replicas drawn from the limit process on the configured grid."""
        regime = self._regime().require_supported()
        data = sample_limit_field(regime, self.config.phis(), self.config.obs_times,
                                  self.config.replicas,
                                  auxiliary_stream(self.config.master_seed, 0),
                                  self.config.theory_grid())
        fingerprint = self.config.fingerprint()

        save_config(self.config, self.out_dir / CONFIG_FILE)
        write_replicas_csv(array_rows(data), self.out_dir / REPLICAS_FILE)
        write_json({"fingerprint": fingerprint, "source": "limit", "regime": regime.to_dict(),
                    "replicas": int(data.shape[0]), "obs_times": list(self.config.obs_times),
                    "seeds": {"master_seed": self.config.master_seed}},
                   self.out_dir / META_FILE)
        logger.info(f"✅ Wrote {data.shape[0]} limit-process replicas to {self.out_dir}")
        return {"out": str(self.out_dir), "replicas": int(data.shape[0]),
                "fingerprint": fingerprint, "regime": regime.label.value}

    def verify(self, run_dir: Optional[Path] = None) -> Dict[str, Any]:
        """report.json and plots/*.csv for the replicas in run_dir."""
        run_dir = Path(run_dir) if run_dir else self.out_dir
        meta = read_json(run_dir / META_FILE)
        fingerprint = self.config.fingerprint()
        if meta.get("fingerprint") != fingerprint:
            raise FingerprintMismatchError(
                f"{run_dir / META_FILE} has fingerprint {meta.get('fingerprint')}, "
                f"configuration has {fingerprint}")

        data = read_replicas_csv(run_dir / REPLICAS_FILE)
        regime = self._regime().require_supported()
        phis = self.config.phis()
        grid = self.config.theory_grid()
        estimates = estimate_cov(data)
        report = compare_to_limit(estimates, regime, phis, self.config.obs_times,
                                  self.config.theta_law(), samples=data, fingerprint=fingerprint,
                                  horizon_T=self.config.system.horizon_T, grid=grid)

        (run_dir / REPORT_FILE).write_text(report.to_json() + "\n", encoding="utf-8")
        write_plot_csvs(plot_data(report, data, regime, phis, grid), run_dir / PLOTS_DIR)
        return {"report": str(run_dir / REPORT_FILE), "entries": len(report.entries),
                "flagged": report.flagged, "pass_fraction": report.pass_fraction,
                "escalation": report.escalation}

    def oracle_check(self, replicas: Optional[int] = None) -> Dict[str, Any]:
        """Second-moment oracle against Monte Carlo for every configured (r, r') pair."""
        spec = self.config.oracle or OracleSpec()
        n = replicas or spec.replicas
        stable = self.config.stable_params()
        system = self.config.system
        phis = self.config.phis()
        phi, psi = phis[0], phis[-1]
        grid = self.config.theory_grid()

        rows: List[Dict[str, Any]] = []
        for k, (r, r_prime) in enumerate(spec.pairs):
            oracle = moment_oracle_detail(stable, system.branching, system.V, spec.x, r, r_prime,
                                          phi, psi, grid)
            mean, se = mc_mixed_moment(stable, system.branching, system.V, spec.x, r, r_prime,
                                       phi, psi, n, auxiliary_stream(self.config.master_seed, k))
            z = (mean - oracle.value) / se if se > 0 else 0.0
            rows.append({"r": r, "r_prime": r_prime, "oracle": oracle.value,
                         "nonbranching_term": oracle.nonbranching_term,
                         "branching_term": oracle.branching_term,
                         "richardson_gap": oracle.richardson_gap,
                         "mc_mean": mean, "mc_se": se, "z": z, "passed": abs(z) <= Z_BAND})
            status = "✅" if abs(z) <= Z_BAND else "⚠️"
            logger.info(f"{status} r={r:g}, r'={r_prime:g}: oracle {oracle.value:.6g}, "
                        f"MC {mean:.6g} +/- {se:.2g} (z={z:+.2f})")

        result = {"fingerprint": self.config.fingerprint(), "x": spec.x, "replicas": n,
                  "rows": rows, "passed": all(row["passed"] for row in rows)}
        write_json(result, self.out_dir / ORACLE_FILE)
        return result

    def _regime(self):
        system = self.config.system
        return classify_regime(self.config.stable.alpha, system.branching,
                               self.config.theta_law(), system.V)


def theta_from_args(args: argparse.Namespace) -> ThetaLaw:
    if args.theta == "deterministic":
        return ThetaLaw.deterministic(args.theta_k)
    if args.theta == "categorical":
        if not args.theta_probs:
            raise ConfigError("--theta-probs is required for a categorical law")
        return ThetaLaw.categorical([float(p) for p in args.theta_probs.split(",")])
    return ThetaLaw.poisson(args.theta_mean)


def cmd_classify(args: argparse.Namespace) -> int:
    regime = classify_regime(args.alpha, args.branching, theta_from_args(args), args.V)
    print(regime.to_json())
    if not regime.supported:
        logger.error(f"❌ {regime.label.value}: no limit theorem implemented for this case")
        return EXIT_UNSUPPORTED
    return EXIT_OK


def _lab(args: argparse.Namespace) -> OccupationLab:
    config = load_config(args.config).with_overrides(
        replicas=args.replicas if args.command != "oracle-check" else None,
        master_seed=args.seed, output_dir=args.out)
    return OccupationLab(config, args.threads)


def cmd_simulate(args: argparse.Namespace) -> int:
    print(json.dumps(_lab(args).simulate(), sort_keys=True))
    return EXIT_OK


def cmd_sample_limit(args: argparse.Namespace) -> int:
    print(json.dumps(_lab(args).sample_limit(), sort_keys=True))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    print(json.dumps(_lab(args).verify(args.run_dir), sort_keys=True))
    return EXIT_OK


def cmd_oracle_check(args: argparse.Namespace) -> int:
    print(json.dumps(_lab(args).oracle_check(args.replicas), sort_keys=True))
    return EXIT_OK


def _env_int(name: str) -> Optional[int]:
    value = os.getenv(name)
    return int(value) if value else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Simulate and verify occupation-time fluctuation limits of "
                    "alpha-stable particle systems.",
        epilog="""
Examples:
  %(prog)s classify --alpha 1.5                           # NB_low, H = 2/3
  %(prog)s classify --alpha 0.75 --branching --V 1        # B_low, H = 5/6
  %(prog)s simulate --config configs/nb_low_poisson.json --threads 8
  %(prog)s verify --config configs/nb_low_poisson.json    # report.json + plots/
  %(prog)s oracle-check --config configs/oracle_branching.json
  %(prog)s sample-limit --config configs/nb_low_poisson.json --out runs/limit

Environment (.env is read at start; explicit flags win):
  OCCLAB_THREADS, OCCLAB_OUT_DIR, OCCLAB_SEED
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="Enable verbose logging")
    parser.add_argument("-d", "--debug", action="store_true",
                        help="Enable debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    classify = subparsers.add_parser("classify", help="Classify the limit regime")
    classify.add_argument("--alpha", type=float, required=True,
                          help="Stability index in (0, 2]")
    classify.add_argument("--branching", action="store_true",
                          help="Critical binary branching system")
    classify.add_argument("--V", type=float, default=0.0,
                          help="Branching rate (default: 0)")
    classify.add_argument("--theta", choices=["poisson", "deterministic", "categorical"],
                          default="poisson",
                          help="Law of atoms per unit interval (default: poisson)")
    classify.add_argument("--theta-mean", type=float, default=1.0,
                          help="Poisson mean (default: 1)")
    classify.add_argument("--theta-k", type=int, default=1,
                          help="Deterministic count (default: 1)")
    classify.add_argument("--theta-probs", type=str, default=None,
                          help="Comma-separated categorical probabilities of 0, 1, 2, ...")
    classify.set_defaults(handler=cmd_classify)

    handlers = {
        "simulate": (cmd_simulate, "Simulate replicas of the fluctuation field"),
        "verify": (cmd_verify, "Compare replicas with the limit covariance"),
        "oracle-check": (cmd_oracle_check, "Check the second-moment oracle by Monte Carlo"),
        "sample-limit": (cmd_sample_limit, "Draw replicas from the limit process"),
    }
    for name, (handler, help_text) in handlers.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", type=str, required=True,
                         help="Run configuration (JSON, schema version 1)")
        sub.add_argument("--seed", type=int, default=_env_int("OCCLAB_SEED"),
                         help="Master seed override (unsigned 64-bit)")
        sub.add_argument("--threads", type=int, default=_env_int("OCCLAB_THREADS"),
                         help="Worker processes (default: all logical cores)")
        sub.add_argument("--out", type=str, default=os.getenv("OCCLAB_OUT_DIR"),
                         help="Output directory override")
        sub.add_argument("--replicas", type=int, default=None,
                         help="Replica count override")
        if name == "verify":
            sub.add_argument("--run-dir", type=str, default=None,
                             help="Directory holding replicas.csv and meta.json "
                                  "(default: the output directory)")
        sub.set_defaults(handler=handler)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point with argument parsing."""
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    # Configure logging level
    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.verbose:
        logging.getLogger().setLevel(logging.INFO)

    try:
        return args.handler(args)
    except UnsupportedRegimeError as e:
        logger.error(f"❌ Unsupported regime: {e}")
        return EXIT_UNSUPPORTED
    except (ConfigError, RunFileError, FingerprintMismatchError, RegimeMismatchError,
            MeasureConstructionError, InsufficientReplicasError) as e:
        logger.error(f"❌ Input inconsistency: {e}")
        return EXIT_INCONSISTENT
    except Exception as e:
        logger.error(f"❌ {args.command} failed: {e}")
        logger.debug("Traceback:", exc_info=True)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

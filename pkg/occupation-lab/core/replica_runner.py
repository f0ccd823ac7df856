"""
Replica-parallel execution of a run configuration.

The deterministic centering is computed once per run and shared by every
replica. Replica i draws from its own stream, so the collected samples do not
depend on the number of workers.
"""

import logging
import platform
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import joblib
import numpy as np
import scipy
from joblib import Parallel, delayed

from particles import (
    FluctuationSample,
    PhiLike,
    PlacementRule,
    SystemConfig,
    ThetaLaw,
    Window,
    centering_matrix,
    check_regime,
    default_window,
    fluctuation_sample,
)
from theory import Regime, classify_regime
from utils import replica_stream
from verification import estimate_cov

from .run_config import RunConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RunPlan:
    """Everything a worker needs to produce replica i."""

    config: SystemConfig
    theta: ThetaLaw
    placement: PlacementRule
    phis: Tuple[PhiLike, ...]
    obs_times: Tuple[float, ...]
    regime: Regime
    window: Window
    centering: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.obs_times), len(self.phis)


def prepare_plan(config: SystemConfig, theta: ThetaLaw, placement: PlacementRule,
                 phis: Sequence[PhiLike], obs_times: Sequence[float],
                 window: Optional[Window] = None) -> RunPlan:
    """Classify the regime, fix the window and compute the centering once."""
    regime = classify_regime(config.stable.alpha, config.branching, theta, config.effective_rate)
    check_regime(config, theta, regime)
    phis = tuple(phis)
    obs_times = tuple(float(t) for t in obs_times)
    if window is None:
        window = default_window(phis, config.stable, config.span)
    centering = centering_matrix(config, theta, placement, phis, obs_times, window)
    logger.debug(f"Plan: regime {regime.label.value}, window {window}, delta {config.delta:.4g}")
    return RunPlan(config, theta, placement, phis, obs_times, regime, window, centering)


def plan_from_config(run_config: RunConfig) -> RunPlan:
    return prepare_plan(run_config.system_config(), run_config.theta_law(),
                        run_config.placement_rule(), run_config.phis(), run_config.obs_times,
                        run_config.window)


def _replica(plan: RunPlan, master_seed: int, index: int) -> FluctuationSample:
    rng = replica_stream(master_seed, index)
    return fluctuation_sample(plan.config, plan.theta, plan.placement, plan.phis,
                              plan.obs_times, plan.regime, rng, window=plan.window,
                              centering=plan.centering)


def run_replicas(plan: RunPlan, replicas: int, master_seed: int,
                 threads: Optional[int] = None) -> List[FluctuationSample]:
    """FluctuationSample of replicas 0..replicas-1, in replica order."""
    if replicas < 1:
        raise ValueError(f"Need at least one replica, got {replicas}")
    n_jobs = threads or -1
    logger.info(f"🚀 Running {replicas} replicas of {plan.regime.label.value} "
                f"(window {plan.window}, n_jobs={n_jobs})")
    if n_jobs == 1:
        samples = [_replica(plan, master_seed, i) for i in range(replicas)]
    else:
        samples = Parallel(n_jobs=n_jobs)(
            delayed(_replica)(plan, master_seed, i) for i in range(replicas))
    steps = sum(s.particle_steps for s in samples)
    logger.info(f"✅ {replicas} replicas done ({steps} particle-steps)")
    return list(samples)


def _variance_shift(base: RunPlan, changed: RunPlan, replicas: int, master_seed: int,
                    threads: Optional[int], target: Tuple[int, int]) -> Dict[str, float]:
    first = estimate_cov(run_replicas(base, replicas, master_seed, threads))
    second = estimate_cov(run_replicas(changed, replicas, master_seed, threads))
    a = first.index(*target)
    before, after = float(first.cov[a, a]), float(second.cov[a, a])
    se = float(np.hypot(first.se[a, a], second.se[a, a]))
    return {"before": before, "after": after, "shift": after - before, "se": se}


def window_doubling_check(plan: RunPlan, replicas: int, master_seed: int,
                          threads: Optional[int] = None,
                          target: Tuple[int, int] = (0, 0)) -> Dict[str, float]:
    """Shift of Var<X_T(t_i), phi_k> when the window half-width doubles."""
    j_min, j_max = plan.window
    doubled = (2 * j_min, 2 * j_max) if j_min < 0 < j_max else (j_min, j_min + 2 * (j_max - j_min))
    changed = prepare_plan(plan.config, plan.theta, plan.placement, plan.phis,
                           plan.obs_times, doubled)
    result = _variance_shift(plan, changed, replicas, master_seed, threads, target)
    logger.info(f"Window {plan.window} -> {doubled}: variance shift "
                f"{result['shift']:.4g} +/- {result['se']:.2g}")
    return result


def step_halving_check(plan: RunPlan, replicas: int, master_seed: int,
                       threads: Optional[int] = None,
                       target: Tuple[int, int] = (0, 0)) -> Dict[str, float]:
    """Shift of Var<X_T(t_i), phi_k> when the Riemann step is halved."""
    changed = replace(plan, config=plan.config.with_step(plan.config.delta / 2.0))
    result = _variance_shift(plan, changed, replicas, master_seed, threads, target)
    logger.info(f"Step {plan.config.delta:.4g} -> {plan.config.delta / 2:.4g}: variance shift "
                f"{result['shift']:.4g} +/- {result['se']:.2g}")
    return result


def run_metadata(plan: RunPlan, samples: Sequence[FluctuationSample], master_seed: int,
                 fingerprint: str, threads: Optional[int] = None) -> Dict[str, Any]:
    """Contents of meta.json."""
    steps = [int(s.particle_steps) for s in samples]
    return {
        "fingerprint": fingerprint,
        "regime": plan.regime.to_dict(),
        "norming_value": plan.regime.norming_value(plan.config.horizon_T),
        "horizon_T": plan.config.horizon_T,
        "tau": plan.config.tau,
        "step_delta": plan.config.delta,
        "window": list(plan.window),
        "obs_times": list(plan.obs_times),
        "test_functions": [phi.to_dict() for phi in plan.phis],
        "replicas": len(samples),
        "seeds": {"master_seed": int(master_seed),
                  "scheme": "SeedSequence(master_seed, spawn_key=(replica,))"},
        "particle_steps": {"total": sum(steps), "max": max(steps, default=0)},
        "threads": threads,
        "versions": {"python": platform.python_version(), "numpy": np.__version__,
                     "scipy": scipy.__version__, "joblib": joblib.__version__},
    }

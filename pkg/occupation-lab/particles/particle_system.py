"""
Simulation of the empirical process N_t and of the occupation-time fluctuations.

Every initial atom starts an independent subtree. All particles of a run are
advanced together on the Riemann grid (step Delta, refined at the observation
times T t_i). With branching, each particle carries an exponential(V) clock; a
step is split at the clock so the branch event happens at its exact time, where
the particle dies or is replaced by two particles at its position (probability
1/2 each). The occupation integral accumulates phi(position) x elapsed over every
segment with its left-endpoint value.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from stable import StableParams, sample_increment
from theory import Regime, RegimeMismatchError, UnsupportedRegimeError, classify_regime

from .initial_measure import (
    PlacementRule,
    PointMeasure,
    ThetaLaw,
    Window,
    build_measure,
    default_window,
    mean_occupation_integral,
)
from .test_functions import PhiLike

logger = logging.getLogger(__name__)

MAX_PARTICLE_STEPS = 500_000_000
DEFAULT_MAX_STEP = 0.05
STEPS_PER_HORIZON = 2000


class PopulationExplosionError(RuntimeError):
    """The particle-step budget of a run was exhausted."""
    pass


@dataclass(frozen=True)
class SystemConfig:
    """Dynamics and time scales of one particle system."""

    stable: StableParams
    branching: bool = False
    rate_V: float = 0.0
    horizon_T: float = 200.0
    tau: float = 1.0
    step_delta: Optional[float] = None
    max_particle_steps: int = MAX_PARTICLE_STEPS

    def __post_init__(self) -> None:
        if not self.horizon_T > 0:
            raise ValueError(f"Horizon T must be positive: {self.horizon_T}")
        if not self.tau > 0:
            raise ValueError(f"Time scale tau must be positive: {self.tau}")
        if self.rate_V < 0:
            raise ValueError(f"Branching rate must be non-negative: {self.rate_V}")
        if self.step_delta is not None:
            if not self.step_delta > 0:
                raise ValueError(f"Riemann step must be positive: {self.step_delta}")
            if self.step_delta > self.horizon_T * self.tau:
                raise ValueError(f"Riemann step {self.step_delta} exceeds T*tau = "
                                 f"{self.horizon_T * self.tau}")

    @property
    def delta(self) -> float:
        """Riemann step; defaults to min(0.05, T tau / 2000)."""
        if self.step_delta is not None:
            return self.step_delta
        return min(DEFAULT_MAX_STEP, self.horizon_T * self.tau / STEPS_PER_HORIZON)

    @property
    def effective_rate(self) -> float:
        return self.rate_V if self.branching else 0.0

    @property
    def span(self) -> float:
        return self.horizon_T * self.tau

    def with_step(self, step_delta: float) -> "SystemConfig":
        return SystemConfig(self.stable, self.branching, self.rate_V, self.horizon_T,
                            self.tau, step_delta, self.max_particle_steps)


@dataclass(eq=False)
class Population:
    """Living particles: positions, the index of their initial atom, time to next event."""

    positions: np.ndarray
    origins: np.ndarray
    clocks: np.ndarray

    @classmethod
    def from_measure(cls, measure: PointMeasure, rate: float,
                     rng: np.random.Generator) -> "Population":
        n = measure.size
        return cls(measure.atoms.copy(), np.arange(n), _fresh_clocks(rate, n, rng))

    @property
    def size(self) -> int:
        return int(self.positions.size)


@dataclass(frozen=True, eq=False)
class OccupationRecord:
    """Raw output of one run, indexed [time, phi] (and [..., atom] when tracked)."""

    times: np.ndarray
    integrals: np.ndarray
    pairings: np.ndarray
    population: np.ndarray
    initial_count: int
    particle_steps: int
    atom_integrals: Optional[np.ndarray] = None
    atom_pairings: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class FluctuationSample:
    """<X_T(t_i), phi_j> for one replica."""

    times: np.ndarray
    test_functions: Tuple[PhiLike, ...]
    values: np.ndarray
    norming: float
    regime_label: str
    window: Window
    particle_steps: int = 0
    population: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Fluctuation values must be finite")
        if not self.norming > 0:
            raise ValueError(f"Norming must be positive: {self.norming}")

    def rows(self, replica: int) -> List[Tuple[int, int, int, float]]:
        """(replica, t_index, phi_index, value) rows in time-major order."""
        n_t, n_phi = self.values.shape
        return [(replica, i, j, float(self.values[i, j]))
                for i in range(n_t) for j in range(n_phi)]


def _fresh_clocks(rate: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if rate <= 0:
        return np.full(n, np.inf)
    return rng.exponential(1.0 / rate, size=n)


def _check_obs_times(obs_times: Sequence[float], tau: float) -> np.ndarray:
    times = np.asarray(obs_times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("Observation times must be a non-empty 1-d sequence")
    if np.any(np.diff(times) < 0):
        raise ValueError(f"Observation times must be sorted: {times.tolist()}")
    if times[0] < 0 or times[-1] > tau:
        raise ValueError(f"Observation times must lie in [0, {tau}]: {times.tolist()}")
    return times


class _Accumulator:
    """Running occupation integrals, total and optionally per initial atom."""

    def __init__(self, phis: Sequence[PhiLike], n_atoms: int, per_atom: bool):
        self.phis = phis
        self.n_atoms = n_atoms
        self.per_atom = per_atom
        self.total = np.zeros(len(phis))
        self.atoms = np.zeros((len(phis), n_atoms)) if per_atom else None

    def values(self, positions: np.ndarray) -> np.ndarray:
        return np.stack([np.asarray(phi(positions), dtype=float) for phi in self.phis])

    def add(self, positions: np.ndarray, origins: np.ndarray, durations: np.ndarray) -> None:
        if positions.size == 0:
            return
        weighted = self.values(positions) * durations
        self.total += weighted.sum(axis=1)
        if self.per_atom:
            for j in range(len(self.phis)):
                self.atoms[j] += np.bincount(origins, weights=weighted[j], minlength=self.n_atoms)

    def pairings(self, population: Population) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        if population.size == 0:
            per_atom = np.zeros((len(self.phis), self.n_atoms)) if self.per_atom else None
            return np.zeros(len(self.phis)), per_atom
        values = self.values(population.positions)
        per_atom = None
        if self.per_atom:
            per_atom = np.stack([np.bincount(population.origins, weights=row,
                                             minlength=self.n_atoms) for row in values])
        return values.sum(axis=1), per_atom


def _advance(population: Population, duration: float, config: SystemConfig,
             acc: _Accumulator, rng: np.random.Generator) -> Tuple[Population, int]:
    """Move every particle through one step, resolving branch events inside it."""
    rate = config.effective_rate
    pos, org, clk = population.positions, population.origins, population.clocks
    elapsed = np.zeros(pos.size)
    done: List[Tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    steps = 0

    while pos.size:
        left = duration - elapsed
        hit = clk < left
        run = np.where(hit, clk, left)
        acc.add(pos, org, run)
        pos = pos + sample_increment(config.stable, run, rng)
        steps += pos.size

        stay = ~hit
        done.append((pos[stay], org[stay], clk[stay] - left[stay]))

        # branch events: die or split in two, with probability 1/2 each
        split = rng.random(int(hit.sum())) < 0.5
        parents = np.flatnonzero(hit)[split]
        pos = np.repeat(pos[parents], 2)
        org = np.repeat(org[parents], 2)
        elapsed = np.repeat(elapsed[parents] + clk[parents], 2)
        clk = _fresh_clocks(rate, pos.size, rng)

    if done:
        merged = Population(*(np.concatenate(parts) for parts in zip(*done)))
    else:
        merged = Population(np.empty(0), np.empty(0, dtype=np.int64), np.empty(0))
    return merged, steps


def simulate_system(config: SystemConfig, measure: PointMeasure, phis: Sequence[PhiLike],
                    obs_times: Sequence[float], rng: np.random.Generator,
                    per_atom: bool = False) -> OccupationRecord:
    """
    Run the system started from `measure` up to T max(t_i).

    Records int_0^{T t_i} <N_s, phi_j> ds, <N_{T t_i}, phi_j> and the population
    size at every observation time.
    """
    times = _check_obs_times(obs_times, config.tau)
    phis = tuple(phis)
    targets = config.horizon_T * times
    horizon = float(targets[-1])
    breakpoints = np.union1d(np.arange(0.0, horizon, config.delta), np.append(targets, 0.0))
    target_index = np.searchsorted(breakpoints, targets)

    n_t, n_phi, n_atoms = times.size, len(phis), measure.size
    integrals = np.zeros((n_t, n_phi))
    pairings = np.zeros((n_t, n_phi))
    population_sizes = np.zeros(n_t, dtype=np.int64)
    atom_integrals = np.zeros((n_t, n_phi, n_atoms)) if per_atom else None
    atom_pairings = np.zeros((n_t, n_phi, n_atoms)) if per_atom else None

    acc = _Accumulator(phis, n_atoms, per_atom)
    population = Population.from_measure(measure, config.effective_rate, rng)
    particle_steps = 0

    def snapshot(k: int) -> None:
        for i in np.flatnonzero(target_index == k):
            integrals[i] = acc.total
            pairing, per_atom_pairing = acc.pairings(population)
            pairings[i] = pairing
            population_sizes[i] = population.size
            if per_atom:
                atom_integrals[i] = acc.atoms
                atom_pairings[i] = per_atom_pairing

    snapshot(0)
    for k in range(1, breakpoints.size):
        population, steps = _advance(population, breakpoints[k] - breakpoints[k - 1],
                                     config, acc, rng)
        particle_steps += steps
        if particle_steps > config.max_particle_steps:
            raise PopulationExplosionError(
                f"Particle-step budget {config.max_particle_steps} exhausted at time "
                f"{breakpoints[k]:.4g} with {population.size} particles "
                f"(initial {n_atoms})")
        snapshot(k)

    logger.debug(f"Run finished: {n_atoms} atoms, {particle_steps} particle-steps, "
                 f"final population {population.size}")
    return OccupationRecord(times, integrals, pairings, population_sizes, n_atoms,
                            particle_steps, atom_integrals, atom_pairings)


def simulate_occupation(config: SystemConfig, measure: PointMeasure, phis: Sequence[PhiLike],
                        obs_times: Sequence[float], rng: np.random.Generator) -> np.ndarray:
    """Matrix [t_i, phi_j] of raw occupation integrals int_0^{T t_i} <N_s, phi_j> ds."""
    return simulate_system(config, measure, phis, obs_times, rng).integrals


def check_regime(config: SystemConfig, theta: ThetaLaw, regime: Regime) -> None:
    """Reject a regime that does not match (alpha, branching) of the system."""
    regime.require_supported()
    expected = classify_regime(config.stable.alpha, config.branching, theta,
                               config.effective_rate)
    if expected.label is not regime.label:
        raise RegimeMismatchError(
            f"System with alpha={config.stable.alpha}, branching={config.branching} is "
            f"{expected.label.value}, not {regime.label.value}")


def centering_matrix(config: SystemConfig, theta: ThetaLaw, placement: PlacementRule,
                     phis: Sequence[PhiLike], obs_times: Sequence[float],
                     window: Window) -> np.ndarray:
    """int_0^{T t_i} E<N_s, phi_j> ds for the system started inside `window`."""
    times = _check_obs_times(obs_times, config.tau)
    return np.array([[mean_occupation_integral(theta, placement, config.stable, phi,
                                               config.horizon_T * t, window=window)
                      for phi in phis] for t in times])


def fluctuation_sample(config: SystemConfig, theta: ThetaLaw, placement: PlacementRule,
                       phis: Sequence[PhiLike], obs_times: Sequence[float], regime: Regime,
                       rng: np.random.Generator, window: Optional[Window] = None,
                       centering: Optional[np.ndarray] = None) -> FluctuationSample:
    """
    One replica of <X_T(t_i), phi_j>: draw nu, run the system, centre, divide by F_T.

    `centering` may be precomputed with centering_matrix for the same window.
    """
    check_regime(config, theta, regime)
    phis = tuple(phis)
    if window is None:
        window = default_window(phis, config.stable, config.span)
    if centering is None:
        centering = centering_matrix(config, theta, placement, phis, obs_times, window)

    measure = build_measure(theta, placement, window, rng)
    record = simulate_system(config, measure, phis, obs_times, rng)
    norming = regime.norming_value(config.horizon_T)
    values = (record.integrals - centering) / norming
    return FluctuationSample(record.times, phis, values, norming, regime.label.value, window,
                             record.particle_steps, record.population)


def mc_mixed_moment(stable: StableParams, branching: bool, V: float, x: float, r: float,
                    r_prime: float, phi: PhiLike, psi: PhiLike, replicas: int,
                    rng: np.random.Generator) -> Tuple[float, float]:
    """
    Monte Carlo mean and standard error of <N^x_r, phi><N^x_r', psi>.

    Each replica is an independent single-ancestor system started at x; positions
    at the observation times are exact, so no Riemann step is involved.
    """
    if replicas < 2:
        raise ValueError(f"Need at least 2 replicas, got {replicas}")
    if r > r_prime:
        r, r_prime, phi, psi = r_prime, r, psi, phi
    if r_prime == 0:
        value = float(phi(x) * psi(x))
        return value, 0.0

    config = SystemConfig(stable, branching, V if branching else 0.0, horizon_T=1.0,
                          tau=r_prime, step_delta=r_prime)
    cell = int(np.floor(x))
    measure = PointMeasure((cell, cell + 1), np.full(replicas, float(x)))
    record = simulate_system(config, measure, (phi, psi), (r, r_prime), rng, per_atom=True)
    products = record.atom_pairings[0, 0] * record.atom_pairings[1, 1]
    # mean of i.i.d. terms: the delete-1 jackknife SE equals std / sqrt(n)
    return float(products.mean()), float(products.std(ddof=1) / np.sqrt(replicas))

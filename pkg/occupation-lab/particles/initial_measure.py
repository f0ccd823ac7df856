"""
Quasi-homogeneous random point measures and their mean functionals.

A measure nu is built interval by interval: the unit interval [j, j+1) receives
theta_j atoms, the theta_j being i.i.d. copies of a ThetaLaw, and a PlacementRule
decides where inside the interval they sit. Intervals are independent. Only this
product form is constructible; spatially dependent measures (equilibria of the
branching system) cannot be expressed with these types.

The infinite measure is truncated to an integer window [j_min, j_max).
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from stable import DEFAULT_GRID, StableParams, UniformGrid, cdf, semigroup_apply

from .test_functions import PhiLike

logger = logging.getLogger(__name__)

DETERMINISTIC = "deterministic"
POISSON = "poisson"
CATEGORICAL = "categorical"

LEFT_ENDPOINT = "left_endpoint"
FIXED_OFFSETS = "fixed_offsets"
IID_UNIFORM = "iid_uniform"

WINDOW_FACTOR = 12.0
SUPPORT_EPS = 1e-8
PROBABILITY_FLOOR = 1e-12
FOURIER_TERMS = 200

Window = Tuple[int, int]


class MeasureConstructionError(ValueError):
    """Invalid law, placement rule or window for a point measure."""
    pass


class TruncationError(RuntimeError):
    """A window or grid is too small for the requested tail tolerance."""
    pass


def _check_window(window: Window) -> Window:
    j_min, j_max = int(window[0]), int(window[1])
    if j_max <= j_min:
        raise MeasureConstructionError(f"Empty window [{j_min}, {j_max})")
    return j_min, j_max


# ---------------------------------------------------------------------------
# Laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaLaw:
    """Law of the number of atoms per unit interval."""

    kind: str
    k: int = 1
    mean_param: float = 1.0
    probs: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind == DETERMINISTIC:
            if self.k < 0:
                raise MeasureConstructionError(f"Deterministic count must be >= 0: {self.k}")
        elif self.kind == POISSON:
            if not self.mean_param > 0:
                raise MeasureConstructionError(f"Poisson mean must be positive: {self.mean_param}")
        elif self.kind == CATEGORICAL:
            p = np.asarray(self.probs, dtype=float)
            if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise MeasureConstructionError(
                    f"Categorical probabilities must be non-negative and sum to 1: {self.probs}")
        else:
            raise MeasureConstructionError(f"Unknown theta law: {self.kind}")

    @classmethod
    def deterministic(cls, k: int) -> "ThetaLaw":
        return cls(DETERMINISTIC, k=int(k))

    @classmethod
    def poisson(cls, mean: float) -> "ThetaLaw":
        return cls(POISSON, mean_param=float(mean))

    @classmethod
    def categorical(cls, probs: Sequence[float]) -> "ThetaLaw":
        return cls(CATEGORICAL, probs=tuple(float(p) for p in probs))

    def _raw_moment(self, order: int) -> float:
        if self.kind == DETERMINISTIC:
            return float(self.k**order)
        if self.kind == POISSON:
            return float(stats.poisson.moment(order, self.mean_param))
        ks = np.arange(len(self.probs), dtype=float)
        return float(np.dot(np.asarray(self.probs), ks**order))

    @property
    def mean(self) -> float:
        return self._raw_moment(1)

    @property
    def variance(self) -> float:
        if self.kind == POISSON:
            return self.mean_param
        return max(self._raw_moment(2) - self.mean**2, 0.0)

    @property
    def third_moment(self) -> float:
        """E theta^3, finite for every supported kind."""
        return self._raw_moment(3)

    def pmf(self, k) -> np.ndarray:
        k = np.asarray(k)
        if self.kind == DETERMINISTIC:
            return (k == self.k).astype(float)
        if self.kind == POISSON:
            return stats.poisson.pmf(k, self.mean_param)
        p = np.asarray(self.probs)
        inside = (k >= 0) & (k < p.size)
        return np.where(inside, p[np.clip(k, 0, p.size - 1)], 0.0)

    def support_max(self, tol: float = PROBABILITY_FLOOR) -> int:
        """Largest k carrying probability above tol (Poisson tail cut at tol)."""
        if self.kind == DETERMINISTIC:
            return self.k
        if self.kind == POISSON:
            return int(stats.poisson.isf(tol, self.mean_param))
        return int(np.nonzero(np.asarray(self.probs) > 0)[0].max())

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == DETERMINISTIC:
            return np.full(size, self.k, dtype=np.int64)
        if self.kind == POISSON:
            return rng.poisson(self.mean_param, size=size).astype(np.int64)
        return rng.choice(len(self.probs), size=size, p=np.asarray(self.probs)).astype(np.int64)

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == DETERMINISTIC:
            return {"kind": self.kind, "k": self.k}
        if self.kind == POISSON:
            return {"kind": self.kind, "mean": self.mean_param}
        return {"kind": self.kind, "probs": list(self.probs)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ThetaLaw":
        kind = data["kind"]
        if kind == DETERMINISTIC:
            return cls.deterministic(data["k"])
        if kind == POISSON:
            return cls.poisson(data["mean"])
        return cls.categorical(data["probs"])


@dataclass(frozen=True)
class PlacementRule:
    """Where the atoms of one unit interval sit, as offsets in [0, 1)."""

    kind: str
    offsets: Tuple[Tuple[int, Tuple[float, ...]], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in (LEFT_ENDPOINT, FIXED_OFFSETS, IID_UNIFORM):
            raise MeasureConstructionError(f"Unknown placement rule: {self.kind}")
        for count, offs in self.offsets:
            if len(offs) != count:
                raise MeasureConstructionError(
                    f"Placement for count {count} lists {len(offs)} offsets")
            if any(not 0.0 <= o < 1.0 for o in offs):
                raise MeasureConstructionError(f"Offsets must lie in [0, 1): {offs}")

    @classmethod
    def left_endpoint(cls) -> "PlacementRule":
        return cls(LEFT_ENDPOINT)

    @classmethod
    def iid_uniform(cls) -> "PlacementRule":
        return cls(IID_UNIFORM)

    @classmethod
    def fixed_offsets(cls, offsets: Dict[int, Sequence[float]]) -> "PlacementRule":
        items = tuple(sorted((int(k), tuple(float(o) for o in v)) for k, v in offsets.items()))
        return cls(FIXED_OFFSETS, offsets=items)

    @property
    def offset_table(self) -> Dict[int, Tuple[float, ...]]:
        return dict(self.offsets)

    def _offsets_for(self, count: int) -> np.ndarray:
        if count == 0:
            return np.empty(0)
        table = self.offset_table
        if count not in table:
            raise MeasureConstructionError(f"fixed_offsets rule has no offsets for count {count}")
        return np.asarray(table[count])

    def place(self, starts: np.ndarray, counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Atom positions for intervals [starts[i], starts[i]+1) holding counts[i] atoms."""
        base = np.repeat(starts.astype(float), counts)
        if self.kind == LEFT_ENDPOINT:
            return base
        if self.kind == IID_UNIFORM:
            return base + rng.random(base.size)

        parts = []
        for count in np.unique(counts):
            if count == 0:
                continue
            offs = self._offsets_for(int(count))
            sel = starts[counts == count].astype(float)
            parts.append((sel[:, None] + offs[None, :]).ravel())
        return np.concatenate(parts) if parts else np.empty(0)

    def expected_offsets(self, theta: ThetaLaw) -> Tuple[np.ndarray, np.ndarray]:
        """Offsets o and weights w with E sum_n f(j + rho_n) = sum_o w_o f(j + o)."""
        if self.kind == IID_UNIFORM:
            raise MeasureConstructionError("iid_uniform placement has no lattice offsets")
        if self.kind == LEFT_ENDPOINT:
            return np.zeros(1), np.array([theta.mean])

        offsets, weights = [], []
        for count in range(1, theta.support_max() + 1):
            p = float(theta.pmf(count))
            if p <= PROBABILITY_FLOOR:
                continue
            offs = self._offsets_for(count)
            offsets.extend(offs)
            weights.extend([p] * count)
        return np.asarray(offsets), np.asarray(weights)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind}
        if self.kind == FIXED_OFFSETS:
            data["offsets"] = {str(k): list(v) for k, v in self.offsets}
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PlacementRule":
        if data["kind"] == FIXED_OFFSETS:
            return cls.fixed_offsets({int(k): v for k, v in data.get("offsets", {}).items()})
        return cls(data["kind"])


# ---------------------------------------------------------------------------
# Point measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PointMeasure:
    """A realisation of nu restricted to the window [j_min, j_max)."""

    window: Window
    atoms: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self) -> None:
        j_min, j_max = _check_window(self.window)
        atoms = np.sort(np.asarray(self.atoms, dtype=float))
        if atoms.size and (atoms[0] < j_min or atoms[-1] >= j_max):
            raise MeasureConstructionError(f"Atoms outside window [{j_min}, {j_max})")
        object.__setattr__(self, "window", (j_min, j_max))
        object.__setattr__(self, "atoms", atoms)

    @property
    def size(self) -> int:
        return int(self.atoms.size)

    def counts(self) -> np.ndarray:
        """Number of atoms in each unit interval of the window."""
        j_min, j_max = self.window
        cells = np.floor(self.atoms).astype(np.int64) - j_min
        return np.bincount(cells, minlength=j_max - j_min)

    def to_json(self) -> str:
        return json.dumps({"window": list(self.window), "atoms": self.atoms.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "PointMeasure":
        data = json.loads(text)
        return cls(tuple(data["window"]), np.asarray(data["atoms"], dtype=float))


def build_measure(theta: ThetaLaw, placement: PlacementRule, window: Window,
                  rng: np.random.Generator) -> PointMeasure:
    """Draw nu on the window: independent (theta_j, placement) per unit interval."""
    j_min, j_max = _check_window(window)
    starts = np.arange(j_min, j_max)
    counts = theta.sample(rng, starts.size)
    atoms = placement.place(starts, counts, rng)
    logger.debug(f"Built measure with {atoms.size} atoms on [{j_min}, {j_max})")
    return PointMeasure((j_min, j_max), atoms)


def default_window(phis: Sequence[PhiLike], stable: StableParams, span: float,
                   eps: float = SUPPORT_EPS, factor: float = WINDOW_FACTOR) -> Window:
    """Symmetric window of half-width support_radius + factor * span^(1/alpha)."""
    radius = max(phi.support_radius(eps) for phi in phis)
    half = int(math.ceil(radius + factor * float(stable.scale(span))))
    return -half, half


# ---------------------------------------------------------------------------
# Mean functionals
# ---------------------------------------------------------------------------

def _lattice_fourier_terms(phi: PhiLike, offsets: np.ndarray,
                           weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Frequencies 2 pi k (k >= 1) and 2 Re sum_o w_o phi_hat(2 pi k) e^{2 pi i k o}."""
    freqs = 2.0 * np.pi * np.arange(1, FOURIER_TERMS + 1)
    phases = np.exp(1j * np.outer(freqs, offsets)) @ weights
    return freqs, 2.0 * np.real(phi.fourier_transform(freqs) * phases)


def _full_line_mass(theta: ThetaLaw, placement: PlacementRule, stable: StableParams,
                    phi: PhiLike, s: float) -> float:
    if placement.kind == IID_UNIFORM:
        return theta.mean * phi.integral
    offsets, weights = placement.expected_offsets(theta)
    freqs, amps = _lattice_fourier_terms(phi, offsets, weights)
    return float(weights.sum() * phi.integral
                 + np.dot(amps, np.exp(-s * freqs**stable.alpha)))


def mean_occupation_mass(theta: ThetaLaw, placement: PlacementRule, stable: StableParams,
                         phi: PhiLike, s: float, window: Optional[Window] = None,
                         grid: UniformGrid = DEFAULT_GRID,
                         tail_tol: Optional[float] = None) -> float:
    """
    E <N_s, phi> = E theta * sum_j E[T_s phi(kappa_j)].

    Without a window the full-line value is returned: E theta * int phi for uniform
    placement, Poisson summation of the lattice sum otherwise. With a window, T_s phi
    is computed on the grid and summed over the window (integrated for uniform
    placement). If tail_tol is given, a window that drops more than tail_tol of the
    full-line value raises TruncationError.
    """
    if s < 0:
        raise ValueError(f"Time must be non-negative: {s}")
    if window is None:
        return _full_line_mass(theta, placement, stable, phi, s)

    j_min, j_max = _check_window(window)
    if not (grid.contains(j_min) and grid.contains(j_max - 1)):
        raise TruncationError(
            f"Window [{j_min}, {j_max}) exceeds grid [-{grid.half_width}, {grid.half_width})")

    evolved = semigroup_apply(stable, s, grid.sample(phi), grid)
    if placement.kind == IID_UNIFORM:
        inside = (grid.xs >= j_min) & (grid.xs < j_max)
        value = theta.mean * grid.step * float(evolved[inside].sum())
    else:
        offsets, weights = placement.expected_offsets(theta)
        points = (np.arange(j_min, j_max)[:, None] + offsets[None, :])
        value = float((grid.interpolate(evolved, points) * weights).sum())

    if tail_tol is not None:
        full = _full_line_mass(theta, placement, stable, phi, s)
        dropped = abs(full - value) / max(abs(full), np.finfo(float).tiny)
        if dropped > tail_tol:
            raise TruncationError(
                f"Window [{j_min}, {j_max}) drops {dropped:.2e} of the mean at s={s} "
                f"(tolerance {tail_tol:.1e})")
    return value


def window_deficit(theta: ThetaLaw, stable: StableParams, phi: PhiLike, window: Window,
                   upper: float, grid: UniformGrid = DEFAULT_GRID) -> float:
    """
    Mean occupation lost by starting particles only inside the window.

    E theta * int_0^upper int phi(z) P(z + eta_s outside window) dz ds, the
    contribution of a uniform far field. Lattice placements differ from it only by
    terms that are exponentially small away from the support of phi.
    """
    j_min, j_max = _check_window(window)
    if upper <= 0:
        return 0.0
    radius = min(phi.support_radius(SUPPORT_EPS), grid.half_width)
    z = grid.xs[np.abs(grid.xs) <= radius]
    weights = phi(z) * grid.step

    def escaped(s: float) -> float:
        if s <= 0:
            return 0.0
        above = 1.0 - cdf(stable, s, j_max - z)
        below = cdf(stable, s, j_min - z)
        return float(np.dot(weights, above + below))

    value, _ = integrate.quad(escaped, 0.0, upper, limit=200, epsrel=1e-8)
    return theta.mean * value


def mean_occupation_integral(theta: ThetaLaw, placement: PlacementRule, stable: StableParams,
                             phi: PhiLike, upper: float,
                             window: Optional[Window] = None) -> float:
    """
    int_0^upper E <N_s, phi> ds in closed form.

    Full-line value without a window; with a window the far-field deficit is
    subtracted so the result centres the window-restricted system.
    """
    if upper < 0:
        raise ValueError(f"Upper limit must be non-negative: {upper}")
    if placement.kind == IID_UNIFORM:
        full = upper * theta.mean * phi.integral
    else:
        offsets, weights = placement.expected_offsets(theta)
        freqs, amps = _lattice_fourier_terms(phi, offsets, weights)
        rates = freqs**stable.alpha
        full = float(upper * weights.sum() * phi.integral
                     + np.dot(amps, -np.expm1(-upper * rates) / rates))
    if window is None:
        return full
    return full - window_deficit(theta, stable, phi, window, upper)

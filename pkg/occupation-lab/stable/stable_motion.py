"""
Standard symmetric alpha-stable motion on the real line.

The process eta has characteristic function E exp(i xi eta_t) = exp(-t |xi|^alpha).
This module samples its increments, evaluates the transition density p_t and its
distribution function, and applies the semigroup T_t f = p_t * f to grid-functions.

The unit-time density p_1 is obtained once per alpha by Fourier inversion
(1/pi) int_0^inf exp(-xi^alpha) cos(x xi) dxi on a node table, then served by a
cubic spline on log p_1. Far tails use the series expansion in |x|^(-alpha k - 1)
(convergent for alpha < 1, asymptotic for alpha > 1). Every p_t is derived from
p_1 by self-similarity, p_t(x) = t^(-1/alpha) p_1(t^(-1/alpha) x).
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from .grid import DEFAULT_GRID, UniformGrid

logger = logging.getLogger(__name__)

TAIL_TOL = 1e-8
ALIAS_TOL = 1e-6

# Node table for the inversion of p_1: geometric nodes up to _INNER_END (they resolve
# the narrow peak at small alpha), a linear part, then log-spaced out to the point
# where the series tail takes over.
_INNER_START = 1e-4
_INNER_END = 1.0
_INNER_NODES = 100
_LINEAR_END = 20.0
_LINEAR_NODES = 381
_ASYMPTOTIC_START = 200.0
_LOG_NODES = 121
# Inversion near the origin: truncation level and panel count of [0, xi_max]
_CUTOFF = 1e-17
_PANELS = 24
_QAWF_MIN_X = 4.0
# quadrature noise allowed when checking the table is a unimodal density
_TABLE_RTOL = 1e-6

ArrayLike = Union[float, np.ndarray]


class StableParameterError(ValueError):
    """Stability index or time argument outside its domain."""
    pass


class AliasingError(ValueError):
    """Grid-function too wide for its grid: FFT convolution would wrap around."""
    pass


class DensityInversionError(RuntimeError):
    """Fourier inversion of p_1 produced values that are not a unimodal density."""
    pass


@dataclass(frozen=True)
class StableParams:
    """Stability index of the standard symmetric alpha-stable motion."""

    alpha: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 2.0) or not np.isfinite(self.alpha):
            raise StableParameterError(f"Stability index must lie in (0, 2]: {self.alpha}")

    @property
    def is_gaussian(self) -> bool:
        return self.alpha == 2.0

    @property
    def is_cauchy(self) -> bool:
        return self.alpha == 1.0

    def scale(self, t: ArrayLike) -> ArrayLike:
        """Displacement scale t^(1/alpha) of eta_t."""
        return np.power(t, 1.0 / self.alpha)


@dataclass(frozen=True)
class DensityGrid:
    """Values of p_t on the nodes of a grid."""

    t: float
    xs: np.ndarray
    values: np.ndarray

    @property
    def mass(self) -> float:
        return float(np.trapezoid(self.values, self.xs))

    def check(self, tail_tol: float = TAIL_TOL) -> bool:
        """Non-negative values and trapezoid mass in [1 - tail_tol, 1]."""
        return bool(np.all(self.values >= 0.0)) and 1.0 - tail_tol <= self.mass <= 1.0 + 1e-12


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _standard_sample(alpha: float, rng: np.random.Generator, shape) -> np.ndarray:
    """Draws of eta_1 (characteristic function exp(-|xi|^alpha))."""
    if alpha == 2.0:
        return rng.normal(0.0, np.sqrt(2.0), size=shape)
    if alpha == 1.0:
        return rng.standard_cauchy(size=shape)

    # Chambers-Mallows-Stuck, symmetric case
    u = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, size=shape)
    w = rng.standard_exponential(size=shape)
    head = np.sin(alpha * u) / np.power(np.cos(u), 1.0 / alpha)
    tail = np.power(np.cos((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha)
    return head * tail


def sample_increment(params: StableParams, dt: ArrayLike, rng: np.random.Generator,
                     size: Optional[Union[int, Tuple[int, ...]]] = None) -> ArrayLike:
    """
    Increments eta_{s+dt} - eta_s.

    A scalar dt must be positive and yields one draw (or `size` draws). An array of
    durations yields one independent increment per entry; zero durations give zero.
    """
    dt_arr = np.asarray(dt, dtype=float)
    if dt_arr.ndim == 0:
        if not dt_arr > 0.0:
            raise StableParameterError(f"Increment duration must be positive: {dt}")
        draws = _standard_sample(params.alpha, rng, size)
        return draws * params.scale(float(dt_arr))

    if np.any(dt_arr < 0.0):
        raise StableParameterError("Increment durations must be non-negative")
    shape = dt_arr.shape if size is None else size
    return _standard_sample(params.alpha, rng, shape) * params.scale(dt_arr)


# ---------------------------------------------------------------------------
# Density and distribution function
# ---------------------------------------------------------------------------

def tail_constant(alpha: float) -> float:
    """c_alpha with p_1(x) ~ c_alpha |x|^(-1-alpha) as |x| -> infinity (alpha < 2)."""
    return float(special.gamma(1.0 + alpha) * np.sin(0.5 * np.pi * alpha) / np.pi)


def _series_terms(alpha: float) -> np.ndarray:
    # convergent for alpha < 1, three asymptotic terms otherwise
    return np.arange(1, 81) if alpha < 1.0 else np.arange(1, 4)


def _series_density(alpha: float, x: np.ndarray) -> np.ndarray:
    k = _series_terms(alpha)
    coef = (-1.0) ** (k + 1) * np.exp(special.gammaln(alpha * k + 1) - special.gammaln(k + 1))
    coef = coef * np.sin(0.5 * np.pi * alpha * k)
    powers = np.power(x[:, None], -(alpha * k + 1.0))
    return (powers * coef).sum(axis=1) / np.pi


def _series_tail_mass(alpha: float, x: np.ndarray) -> np.ndarray:
    """int_x^inf p_1 from the same series."""
    k = _series_terms(alpha)
    coef = (-1.0) ** (k + 1) * np.exp(special.gammaln(alpha * k + 1) - special.gammaln(k + 1))
    coef = coef * np.sin(0.5 * np.pi * alpha * k) / (alpha * k)
    powers = np.power(x[:, None], -(alpha * k))
    return (powers * coef).sum(axis=1) / np.pi


def _finite_range(alpha: float, t: float) -> float:
    """xi beyond which exp(-t xi^alpha) is below _CUTOFF."""
    return float((-np.log(_CUTOFF) / t) ** (1.0 / alpha))


def invert_characteristic(params: StableParams, t: float, x: float) -> float:
    """
    p_t(x) by direct adaptive quadrature of the Fourier inversion integral.

    Near the origin the integral runs over [0, xi_max] in geometric panels, each with
    the finite-range cosine weight; QAWF on [0, inf) is used only for |x| >= _QAWF_MIN_X.
    """
    if t <= 0:
        raise StableParameterError(f"Time must be positive: {t}")
    alpha = params.alpha
    if x == 0.0:
        return float(special.gamma(1.0 + 1.0 / alpha) / (np.pi * t ** (1.0 / alpha)))

    def integrand(xi):
        return np.exp(-t * xi**alpha)

    if abs(x) < _QAWF_MIN_X:
        xi_max = _finite_range(alpha, t)
        edges = np.concatenate([[0.0], np.geomspace(1e-4 * xi_max, xi_max, _PANELS)])
        value = sum(integrate.quad(integrand, a, b, weight="cos", wvar=abs(x),
                                   epsabs=1e-14, epsrel=1e-10, limit=200)[0]
                    for a, b in zip(edges[:-1], edges[1:]))
    else:
        value, _ = integrate.quad(integrand, 0.0, np.inf, weight="cos", wvar=abs(x),
                                  epsabs=1e-13, limlst=200)
    return float(value / np.pi)


@dataclass(frozen=True)
class _UnitDensityTable:
    switch: float
    log_spline: CubicSpline
    cumulative: CubicSpline


def _check_table(alpha: float, nodes: np.ndarray, values: np.ndarray) -> None:
    """Finite, positive, and non-increasing in |x| up to quadrature noise."""
    peak = values[0]
    bad = ~np.isfinite(values) | (values <= 0.0) | (values > peak * (1.0 + _TABLE_RTOL))
    if np.any(bad):
        x = float(nodes[np.argmax(bad)])
        raise DensityInversionError(
            f"Inverted p_1 for alpha={alpha} is not a density at x={x:g} "
            f"({int(bad.sum())} bad nodes)")
    rises = np.diff(values) > _TABLE_RTOL * peak
    if np.any(rises):
        x = float(nodes[1:][np.argmax(rises)])
        raise DensityInversionError(
            f"Inverted p_1 for alpha={alpha} increases at x={x:g}")


@lru_cache(maxsize=32)
def _unit_table(alpha: float) -> _UnitDensityTable:
    params = StableParams(alpha)
    switch = _LINEAR_END if alpha < 1.0 else _ASYMPTOTIC_START
    nodes = np.concatenate([[0.0],
                            np.geomspace(_INNER_START, _INNER_END, _INNER_NODES, endpoint=False),
                            np.linspace(_INNER_END, _LINEAR_END, _LINEAR_NODES)])
    if switch > _LINEAR_END:
        nodes = np.concatenate([nodes, np.geomspace(_LINEAR_END, switch, _LOG_NODES)[1:]])

    logger.debug(f"Inverting p_1 for alpha={alpha} on {nodes.size} nodes")
    values = np.array([invert_characteristic(params, 1.0, x) for x in nodes])
    _check_table(alpha, nodes, values)

    density_spline = CubicSpline(nodes, values, bc_type=((1, 0.0), "not-a-knot"))
    return _UnitDensityTable(
        switch=switch,
        log_spline=CubicSpline(nodes, np.log(values), bc_type=((1, 0.0), "not-a-knot")),
        cumulative=density_spline.antiderivative(),
    )


def _unit_density(alpha: float, x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    if alpha == 2.0:
        return np.exp(-0.25 * ax**2) / (2.0 * np.sqrt(np.pi))
    if alpha == 1.0:
        return 1.0 / (np.pi * (1.0 + ax**2))

    table = _unit_table(alpha)
    out = np.empty_like(ax)
    inner = ax <= table.switch
    out[inner] = np.exp(table.log_spline(ax[inner]))
    if np.any(~inner):
        out[~inner] = _series_density(alpha, ax[~inner])
    return out


def _unit_cdf(alpha: float, x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    if alpha == 2.0:
        upper = special.ndtr(ax / np.sqrt(2.0))
    elif alpha == 1.0:
        upper = 0.5 + np.arctan(ax) / np.pi
    else:
        table = _unit_table(alpha)
        upper = np.empty_like(ax)
        inner = ax <= table.switch
        upper[inner] = 0.5 + table.cumulative(ax[inner])
        if np.any(~inner):
            upper[~inner] = 1.0 - _series_tail_mass(alpha, ax[~inner])
    upper = np.clip(upper, 0.5, 1.0)
    return np.where(x >= 0, upper, 1.0 - upper)


def density(params: StableParams, t: float, x: ArrayLike) -> ArrayLike:
    """Transition density p_t(x)."""
    if t <= 0:
        raise StableParameterError(f"Time must be positive: {t}")
    scale = params.scale(t)
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    values = _unit_density(params.alpha, x_arr / scale) / scale
    return float(values[0]) if np.ndim(x) == 0 else values.reshape(np.shape(x))


def cdf(params: StableParams, t: float, x: ArrayLike) -> ArrayLike:
    """Distribution function P(eta_t <= x)."""
    if t <= 0:
        raise StableParameterError(f"Time must be positive: {t}")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    values = _unit_cdf(params.alpha, x_arr / params.scale(t))
    return float(values[0]) if np.ndim(x) == 0 else values.reshape(np.shape(x))


def density_grid(params: StableParams, t: float, grid: UniformGrid = DEFAULT_GRID) -> DensityGrid:
    return DensityGrid(t=t, xs=grid.xs, values=density(params, t, grid.xs))


# ---------------------------------------------------------------------------
# Semigroup
# ---------------------------------------------------------------------------

def check_aliasing(f: np.ndarray, alias_tol: float = ALIAS_TOL,
                   what: str = "grid-function") -> None:
    """Reject grid-functions that have not decayed at the grid boundary."""
    peak = float(np.max(np.abs(f))) if f.size else 0.0
    if peak == 0.0:
        return
    edge = max(abs(float(f[0])), abs(float(f[-1])))
    if edge > alias_tol * peak:
        raise AliasingError(
            f"{what} has boundary value {edge:.3e} (peak {peak:.3e}, ratio {edge / peak:.2e} > "
            f"{alias_tol:.1e}); widen the grid"
        )


def semigroup_apply(params: StableParams, t: float, f: np.ndarray,
                    grid: UniformGrid = DEFAULT_GRID, alias_tol: float = ALIAS_TOL) -> np.ndarray:
    """T_t f on the same grid, by multiplying the DFT of f with exp(-t |xi|^alpha)."""
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n_nodes,):
        raise ValueError(f"Grid-function has shape {f.shape}, grid has {grid.n_nodes} nodes")
    if t < 0:
        raise StableParameterError(f"Semigroup time must be non-negative: {t}")
    if t == 0:
        return f.copy()

    check_aliasing(f, alias_tol)
    multiplier = np.exp(-t * np.power(grid.frequencies, params.alpha))
    return np.fft.irfft(np.fft.rfft(f) * multiplier, n=grid.n_nodes)

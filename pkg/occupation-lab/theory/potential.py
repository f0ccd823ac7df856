"""
Potential operator G = int_0^inf T_t dt of the alpha-stable semigroup (alpha < 1).

G phi(x) = C_alpha int phi(y) |x - y|^(alpha - 1) dy. On a uniform grid the kernel
is integrated exactly against the piecewise-linear interpolant of phi (the
singular cell included), which turns G into a Toeplitz convolution evaluated by
FFT. The product rule has an error expansion a h^2 + b h^(2+alpha) + O(h^4); two
Richardson levels (steps h, h/2, h/4) remove both leading terms.

Two independent schemes back the grid one: pointwise adaptive quadrature with
algebraic end-point weights (`evaluate`) and Fourier quadrature
(1/2pi) int phi_hat psi_hat |xi|^(-power) dxi (`fourier_pairing`).
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, List, Union

import numpy as np
from scipy import integrate, special
from scipy.signal import fftconvolve

from stable import DEFAULT_GRID, UniformGrid

if TYPE_CHECKING:
    from particles.test_functions import PhiLike

logger = logging.getLogger(__name__)

# beyond this lag the second difference of |d|^(alpha+1) is taken from its series
_SERIES_LAG = 50


class PotentialDomainError(ValueError):
    """The potential operator exists only for 0 < alpha < 1."""
    pass


def c_alpha(alpha: float) -> float:
    """Gamma((1-alpha)/2) / (2^alpha sqrt(pi) Gamma(alpha/2))."""
    return float(special.gamma(0.5 * (1.0 - alpha))
                 / (2.0**alpha * np.sqrt(np.pi) * special.gamma(0.5 * alpha)))


def _kernel_weights(alpha: float, n_nodes: int, step: float) -> np.ndarray:
    """Product-integration weights for lags d = -(n-1)..(n-1), without C_alpha."""
    d = np.abs(np.arange(-(n_nodes - 1), n_nodes, dtype=float))
    beta = alpha + 1.0
    near = d < _SERIES_LAG
    w = np.empty_like(d)
    dn = d[near]
    w[near] = (np.abs(dn + 1.0) ** beta - 2.0 * dn**beta
               + np.abs(dn - 1.0) ** beta) / (alpha * beta)
    df = d[~near]
    w[~near] = (df ** (alpha - 1.0)
                + (alpha - 1.0) * (alpha - 2.0) * df ** (alpha - 3.0) / 12.0
                + (alpha - 1.0) * (alpha - 2.0) * (alpha - 3.0) * (alpha - 4.0)
                * df ** (alpha - 5.0) / 360.0)
    return w * step**alpha


def _convolve(alpha: float, values: np.ndarray, grid: UniformGrid) -> np.ndarray:
    n = grid.n_nodes
    weights = _kernel_weights(alpha, n, grid.step)
    return c_alpha(alpha) * fftconvolve(values, weights, mode="full")[n - 1:2 * n - 1]


def _extrapolate(alpha: float, levels: List) -> Union[float, np.ndarray]:
    """Combine values on steps h, h/2, h/4 so the h^2 and h^(2+alpha) terms cancel."""
    coarse, middle, fine = levels
    first = [(4.0 * middle - coarse) / 3.0, (4.0 * fine - middle) / 3.0]
    ratio = 2.0 ** (2.0 + alpha)
    return (ratio * first[1] - first[0]) / (ratio - 1.0)


def _levels(grid: UniformGrid, richardson: bool) -> List[UniformGrid]:
    if not richardson:
        return [grid]
    return [grid, grid.refined(), grid.refined().refined()]


@dataclass(frozen=True)
class PotentialOperator:
    """G for a fixed alpha in (0, 1)."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise PotentialDomainError(f"Potential operator needs 0 < alpha < 1, got {self.alpha}")

    @property
    def C_alpha(self) -> float:
        return c_alpha(self.alpha)

    def apply(self, phi: "PhiLike", grid: UniformGrid = DEFAULT_GRID,
              richardson: bool = True) -> np.ndarray:
        """G phi on the grid nodes (phi is taken as zero outside the grid)."""
        return _cached_apply(self.alpha, phi, grid, richardson)

    def evaluate(self, phi: "PhiLike", x: float) -> float:
        """G phi(x) by adaptive quadrature on each side of the singularity."""
        radius = phi.support_radius(1e-14)
        if abs(x) > radius + 1.0:
            # the kernel is smooth on the support of phi
            value, _ = integrate.quad(lambda y: phi(y) * abs(x - y) ** (self.alpha - 1.0),
                                      -radius, radius, limit=400, epsabs=1e-14)
            return self.C_alpha * value

        reach = abs(x) + radius
        total = 0.0
        for sign in (1.0, -1.0):
            def shifted(u, sign=sign):
                return phi(x + sign * u)

            near, _ = integrate.quad(shifted, 0.0, reach, weight="alg",
                                     wvar=(self.alpha - 1.0, 0.0), limit=400, epsabs=1e-14)
            far, _ = integrate.quad(lambda u: shifted(u) * u ** (self.alpha - 1.0),
                                    reach, np.inf, limit=400, epsabs=1e-14)
            total += near + far
        return self.C_alpha * total

    def grid_pairing(self, phi: "PhiLike", psi: "PhiLike", grid: UniformGrid = DEFAULT_GRID,
                     richardson: bool = True) -> float:
        """int phi G psi; each level is a symmetric bilinear form, so is the result."""
        values = [level.integrate(level.sample(phi)
                                  * _convolve(self.alpha, level.sample(psi), level))
                  for level in _levels(grid, richardson)]
        if not richardson:
            return float(values[0])
        logger.debug(f"int phi G psi levels for alpha={self.alpha}: {values}")
        return float(_extrapolate(self.alpha, values))

    def grid_product_integral(self, phi: "PhiLike", psi: "PhiLike",
                              grid: UniformGrid = DEFAULT_GRID) -> float:
        """int (G phi)(G psi) over the line: grid part plus the analytic far field."""
        if self.alpha >= 0.5:
            raise PotentialDomainError(
                f"int (G phi)(G psi) diverges for alpha >= 1/2: {self.alpha}")
        inside = grid.integrate(self.apply(phi, grid) * self.apply(psi, grid))
        return inside + self.far_field(phi, psi, grid.half_width)

    def far_field(self, phi: "PhiLike", psi: "PhiLike", radius: float) -> float:
        """int_{|x| > radius} (G phi)(G psi) dx from the multipole expansion of G phi."""
        a = self.alpha
        leading = phi.moment(0) * psi.moment(0) * radius ** (2.0 * a - 1.0) / (1.0 - 2.0 * a)
        second = (0.5 * (1.0 - a) * (2.0 - a) * (phi.moment(2) * psi.moment(0)
                                                 + phi.moment(0) * psi.moment(2))
                  + (1.0 - a) ** 2 * phi.moment(1) * psi.moment(1))
        if not np.isfinite(second):
            logger.debug("Second moments diverge; far field keeps its leading term only")
            second = 0.0
        correction = second * radius ** (2.0 * a - 3.0) / (3.0 - 2.0 * a)
        return 2.0 * self.C_alpha**2 * (leading + correction)

    def fourier_pairing(self, phi: "PhiLike", psi: "PhiLike", power: float) -> float:
        """(1/2pi) int phi_hat(xi) conj(psi_hat(xi)) |xi|^(-power) dxi, 0 < power < 1."""
        if not 0.0 < power < 1.0:
            raise PotentialDomainError(f"Fourier pairing needs 0 < power < 1, got {power}")

        def spectrum(xi: float) -> float:
            return float(np.real(phi.fourier_transform(xi) * np.conj(psi.fourier_transform(xi))))

        near, _ = integrate.quad(spectrum, 0.0, 1.0, weight="alg", wvar=(-power, 0.0),
                                 limit=200, epsabs=1e-14)
        far, _ = integrate.quad(lambda xi: spectrum(xi) * xi ** (-power), 1.0, np.inf,
                                limit=400, epsabs=1e-14)
        return (near + far) / np.pi


@lru_cache(maxsize=64)
def _cached_apply(alpha: float, phi: "PhiLike", grid: UniformGrid, richardson: bool) -> np.ndarray:
    levels = _levels(grid, richardson)
    values = [_convolve(alpha, level.sample(phi), level)[::2**i] for i, level in enumerate(levels)]
    if not richardson:
        return values[0]
    gap = float(np.max(np.abs(values[2] - values[0])))
    logger.debug(f"Potential extrapolation for alpha={alpha}: coarse/fine gap {gap:.2e}")
    return _extrapolate(alpha, values)



def potential_apply(op: PotentialOperator, phi: "PhiLike",
                    grid: UniformGrid = DEFAULT_GRID) -> np.ndarray:
    """G phi as a grid-function."""
    return op.apply(phi, grid)

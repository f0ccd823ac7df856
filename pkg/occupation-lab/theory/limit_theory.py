"""
What the limit theorems predict for the occupation-time fluctuations.

Regime classification with its norming F_T and constant K, the covariance kernels
of the limit processes (sub-fBm, theta-process, their mixture xi, fBm, Brownian
motion), the distribution-valued Wiener covariances built from the potential
operator, and the covariance of <X(s), phi>, <X(t), psi> for every regime.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import TYPE_CHECKING, Any, Dict, Optional

import numpy as np
from scipy import special

from stable import DEFAULT_GRID, UniformGrid

from .potential import PotentialOperator

if TYPE_CHECKING:
    from particles.initial_measure import ThetaLaw
    from particles.test_functions import PhiLike

logger = logging.getLogger(__name__)


class RegimeMismatchError(ValueError):
    """Parameters inconsistent with the regime a computation was asked for."""
    pass


class UnsupportedRegimeError(ValueError):
    """Branching with alpha >= 1: no limit theorem is implemented."""
    pass


class KernelDomainError(ValueError):
    """Hurst parameter or time argument outside the kernel's domain."""
    pass


class RegimeLabel(str, Enum):
    NB_LOW = "NB_low"
    NB_CRITICAL = "NB_critical"
    NB_HIGH = "NB_high"
    B_LOW = "B_low"
    B_CRITICAL = "B_critical"
    B_HIGH = "B_high"
    B_UNSUPPORTED = "B_unsupported"

    @property
    def is_low(self) -> bool:
        return self in (RegimeLabel.NB_LOW, RegimeLabel.B_LOW)

    @property
    def is_critical(self) -> bool:
        return self in (RegimeLabel.NB_CRITICAL, RegimeLabel.B_CRITICAL)

    @property
    def is_high(self) -> bool:
        return self in (RegimeLabel.NB_HIGH, RegimeLabel.B_HIGH)


POWER_NORMING = "power"
LOG_NORMING = "sqrt_log"
SQRT_NORMING = "sqrt"


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

def long_memory_constant(alpha: float, H: float) -> float:
    """(Gamma(2-2H) / (2 pi alpha H (2H-1)))^(1/2), shared by K_1 and K_3."""
    if not 0.5 < H < 1.0:
        raise KernelDomainError(f"Long-memory constant needs 1/2 < H < 1, got {H}")
    return math.sqrt(special.gamma(2.0 - 2.0 * H) / (2.0 * np.pi * alpha * H * (2.0 * H - 1.0)))


def k1_constant(alpha: float) -> float:
    """K_1 for the non-branching low regime, H = 1 - 1/(2 alpha)."""
    return long_memory_constant(alpha, 1.0 - 0.5 / alpha)


def k2_constant(etheta: float) -> float:
    return math.sqrt(2.0 * etheta / np.pi)


def k3_constant(alpha: float, etheta: float, V: float) -> float:
    """K_3 for the branching low regime, H = (3 - 1/alpha) / 2."""
    return math.sqrt(etheta * V) * long_memory_constant(alpha, 0.5 * (3.0 - 1.0 / alpha))


def k4_constant(etheta: float, V: float) -> float:
    return math.sqrt(2.0 * V * etheta / np.pi)


# ---------------------------------------------------------------------------
# Regimes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Regime:
    """Which limit theorem applies, with its norming F_T and constant K."""

    label: RegimeLabel
    alpha: float
    branching: bool
    V: float
    etheta: float
    vartheta: float
    H: Optional[float] = None
    K: Optional[float] = None
    norming_kind: str = SQRT_NORMING

    @property
    def supported(self) -> bool:
        return self.label is not RegimeLabel.B_UNSUPPORTED

    def require_supported(self) -> "Regime":
        if not self.supported:
            raise UnsupportedRegimeError(
                f"Branching systems with alpha={self.alpha} >= 1 have no implemented limit")
        return self

    @property
    def norming(self) -> str:
        """Symbolic F_T."""
        if self.norming_kind == POWER_NORMING:
            return f"T^{self.H:.6g}"
        if self.norming_kind == LOG_NORMING:
            return "sqrt(T log T)"
        return "sqrt(T)"

    def norming_value(self, T: float) -> float:
        self.require_supported()
        if T <= 0:
            raise ValueError(f"Horizon must be positive: {T}")
        if self.norming_kind == POWER_NORMING:
            return float(T ** self.H)
        if self.norming_kind == LOG_NORMING:
            if T <= 1:
                raise ValueError(f"sqrt(T log T) norming needs T > 1, got {T}")
            return math.sqrt(T * math.log(T))
        return math.sqrt(T)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label.value,
            "H": self.H,
            "F_T": self.norming if self.supported else None,
            "K": self.K,
            "alpha": self.alpha,
            "branching": self.branching,
            "V": self.V,
            "Etheta": self.etheta,
            "Vartheta": self.vartheta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def classify_regime(alpha: float, branching: bool, theta: "ThetaLaw", V: float = 0.0) -> Regime:
    """Case split of the limit theorems for (alpha, branching)."""
    if not 0.0 < alpha <= 2.0:
        raise RegimeMismatchError(f"Stability index must lie in (0, 2]: {alpha}")
    rate = float(V) if branching else 0.0
    base = dict(alpha=float(alpha), branching=bool(branching), V=rate,
                etheta=theta.mean, vartheta=theta.variance)

    if not branching:
        if alpha > 1.0:
            H = 1.0 - 0.5 / alpha
            return Regime(RegimeLabel.NB_LOW, H=H, K=k1_constant(alpha),
                          norming_kind=POWER_NORMING, **base)
        if alpha == 1.0:
            return Regime(RegimeLabel.NB_CRITICAL, K=k2_constant(theta.mean),
                          norming_kind=LOG_NORMING, **base)
        return Regime(RegimeLabel.NB_HIGH, norming_kind=SQRT_NORMING, **base)

    if alpha >= 1.0:
        logger.warning(f"⚠️ Branching with alpha={alpha} >= 1 is outside the "
                       f"implemented theorems")
        return Regime(RegimeLabel.B_UNSUPPORTED, **base)
    if V <= 0:
        raise RegimeMismatchError(f"Branching systems need a positive rate V, got {V}")
    if alpha > 0.5:
        H = 0.5 * (3.0 - 1.0 / alpha)
        return Regime(RegimeLabel.B_LOW, H=H, K=k3_constant(alpha, theta.mean, rate),
                      norming_kind=POWER_NORMING, **base)
    if alpha == 0.5:
        return Regime(RegimeLabel.B_CRITICAL, K=k4_constant(theta.mean, rate),
                      norming_kind=LOG_NORMING, **base)
    return Regime(RegimeLabel.B_HIGH, norming_kind=SQRT_NORMING, **base)


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

def _check_kernel_args(H: float, s, t):
    if not 0.0 < H < 1.0:
        raise KernelDomainError(f"Hurst parameter must lie in (0, 1): {H}")
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise KernelDomainError("Kernel times must be non-negative")
    return s, t


def _scalar_or_array(value: np.ndarray):
    return float(value) if value.ndim == 0 else value


def subfbm_cov(H: float, s, t):
    """C^H(s,t) = s^2H + t^2H - ((s+t)^2H + |s-t|^2H) / 2."""
    s, t = _check_kernel_args(H, s, t)
    h2 = 2.0 * H
    value = s**h2 + t**h2 - 0.5 * ((s + t) ** h2 + np.abs(s - t) ** h2)
    return _scalar_or_array(value)


def theta_cov(H: float, s, t):
    """Q^H(s,t) = sgn(2H-1) ((s+t)^2H - s^2H - t^2H) / 2; identically 0 at H = 1/2."""
    s, t = _check_kernel_args(H, s, t)
    h2 = 2.0 * H
    value = np.sign(h2 - 1.0) * 0.5 * ((s + t) ** h2 - s**h2 - t**h2)
    return _scalar_or_array(value)


def xi_cov(etheta: float, vartheta: float, H: float, s, t):
    if etheta < 0 or vartheta < 0:
        raise KernelDomainError(f"Moments must be non-negative: E={etheta}, Var={vartheta}")
    value = (etheta * np.asarray(subfbm_cov(H, s, t))
             + vartheta * np.asarray(theta_cov(H, s, t)))
    return _scalar_or_array(value)


def fbm_cov(H: float, s, t):
    """(s^2H + t^2H - |s-t|^2H) / 2."""
    s, t = _check_kernel_args(H, s, t)
    h2 = 2.0 * H
    return _scalar_or_array(0.5 * (s**h2 + t**h2 - np.abs(s - t) ** h2))


def brownian_cov(s, t, scale: float = 1.0):
    s, t = _check_kernel_args(0.5, s, t)
    return _scalar_or_array(scale * np.minimum(s, t))


# ---------------------------------------------------------------------------
# Wiener covariances
# ---------------------------------------------------------------------------

WIENER_NB = "nb"
WIENER_B = "b"
GRID_SCHEME = "grid"
FOURIER_SCHEME = "fourier"


@lru_cache(maxsize=128)
def _spatial_parts(alpha: float, phi: "PhiLike", psi: "PhiLike", grid: UniformGrid,
                   scheme: str, with_product: bool):
    op = PotentialOperator(alpha)
    if scheme == FOURIER_SCHEME:
        pairing = op.fourier_pairing(phi, psi, alpha)
        product = op.fourier_pairing(phi, psi, 2.0 * alpha) if with_product else 0.0
    elif scheme == GRID_SCHEME:
        pairing = op.grid_pairing(phi, psi, grid)
        product = op.grid_product_integral(phi, psi, grid) if with_product else 0.0
    else:
        raise ValueError(f"Unknown quadrature scheme: {scheme}")
    return pairing, product


def wiener_cov(kind: str, etheta: float, V: float, phi: "PhiLike", psi: "PhiLike", s, t,
               alpha: float, grid: UniformGrid = DEFAULT_GRID, scheme: str = GRID_SCHEME):
    """
    Covariance of <X(s), phi>, <X(t), psi> for the homogeneous Wiener limits.

    nb: 2 E theta (s^t) int phi G psi.
    b:  E theta (s^t) int (2 phi G psi + V (G phi)(G psi)).
    """
    if kind == WIENER_NB:
        if not 0.0 < alpha < 1.0:
            raise RegimeMismatchError(f"Non-branching Wiener limit needs alpha < 1, got {alpha}")
        pairing, _ = _spatial_parts(alpha, phi, psi, grid, scheme, False)
        spatial = 2.0 * etheta * pairing
    elif kind == WIENER_B:
        if not 0.0 < alpha < 0.5:
            raise RegimeMismatchError(f"Branching Wiener limit needs alpha < 1/2, got {alpha}")
        pairing, product = _spatial_parts(alpha, phi, psi, grid, scheme, True)
        spatial = etheta * (2.0 * pairing + V * product)
    else:
        raise ValueError(f"Unknown Wiener kind: {kind}")
    return _scalar_or_array(spatial * np.asarray(brownian_cov(s, t)))


# ---------------------------------------------------------------------------
# Covariance models
# ---------------------------------------------------------------------------

SUBFBM = "subfbm"
THETA_PROC = "theta_proc"
XI = "xi"
FBM = "fbm"
BROWNIAN = "brownian"
WIENER_NB_KIND = "wiener_nb"
WIENER_B_KIND = "wiener_b"

_HURST_KINDS = (SUBFBM, THETA_PROC, XI, FBM)
_WIENER_KINDS = (WIENER_NB_KIND, WIENER_B_KIND)


@dataclass(frozen=True)
class CovarianceModel:
    """An evaluable bivariate covariance function of one of the limit processes."""

    kind: str
    H: Optional[float] = None
    etheta: float = 1.0
    vartheta: float = 0.0
    scale: float = 1.0
    V: float = 0.0
    alpha: Optional[float] = None
    phi: Any = None
    psi: Any = None
    grid: UniformGrid = field(default=DEFAULT_GRID, compare=False)

    def __post_init__(self) -> None:
        if self.kind in _HURST_KINDS:
            if self.H is None or not 0.0 < self.H < 1.0:
                raise KernelDomainError(f"{self.kind} needs a Hurst parameter in (0, 1): {self.H}")
        elif self.kind in _WIENER_KINDS:
            if self.alpha is None or self.phi is None or self.psi is None:
                raise KernelDomainError(f"{self.kind} needs alpha and a test-function pair")
        elif self.kind != BROWNIAN:
            raise KernelDomainError(f"Unknown covariance kind: {self.kind}")

    @classmethod
    def subfbm(cls, H: float) -> "CovarianceModel":
        return cls(SUBFBM, H=H)

    @classmethod
    def theta_proc(cls, H: float) -> "CovarianceModel":
        return cls(THETA_PROC, H=H)

    @classmethod
    def xi(cls, etheta: float, vartheta: float, H: float) -> "CovarianceModel":
        return cls(XI, H=H, etheta=etheta, vartheta=vartheta)

    @classmethod
    def fbm(cls, H: float) -> "CovarianceModel":
        return cls(FBM, H=H)

    @classmethod
    def brownian(cls, scale: float = 1.0) -> "CovarianceModel":
        return cls(BROWNIAN, scale=scale)

    @classmethod
    def wiener_nb(cls, alpha: float, etheta: float, phi, psi,
                  grid: UniformGrid = DEFAULT_GRID) -> "CovarianceModel":
        return cls(WIENER_NB_KIND, alpha=alpha, etheta=etheta, phi=phi, psi=psi, grid=grid)

    @classmethod
    def wiener_b(cls, alpha: float, etheta: float, V: float, phi, psi,
                 grid: UniformGrid = DEFAULT_GRID) -> "CovarianceModel":
        return cls(WIENER_B_KIND, alpha=alpha, etheta=etheta, V=V, phi=phi, psi=psi, grid=grid)

    @property
    def name(self) -> str:
        if self.kind in _HURST_KINDS:
            return f"{self.kind}(H={self.H:.6g})"
        if self.kind == BROWNIAN:
            return f"brownian(scale={self.scale:.6g})"
        return f"{self.kind}(alpha={self.alpha:.6g})"

    def __call__(self, s, t):
        if self.kind == SUBFBM:
            return subfbm_cov(self.H, s, t)
        if self.kind == THETA_PROC:
            return theta_cov(self.H, s, t)
        if self.kind == XI:
            return xi_cov(self.etheta, self.vartheta, self.H, s, t)
        if self.kind == FBM:
            return fbm_cov(self.H, s, t)
        if self.kind == BROWNIAN:
            return brownian_cov(s, t, self.scale)
        kind = WIENER_NB if self.kind == WIENER_NB_KIND else WIENER_B
        return wiener_cov(kind, self.etheta, self.V, self.phi, self.psi, s, t,
                          self.alpha, self.grid)

    def matrix(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        return np.asarray(self(times[:, None], times[None, :]), dtype=float)


def limit_covariance(regime: Regime, phi: "PhiLike", psi: "PhiLike", s, t,
                     grid: UniformGrid = DEFAULT_GRID):
    """Limit covariance of <X(s), phi> and <X(t), psi> in the given regime."""
    regime.require_supported()
    label = regime.label
    if label.is_high:
        kind = WIENER_NB if label is RegimeLabel.NB_HIGH else WIENER_B
        return wiener_cov(kind, regime.etheta, regime.V, phi, psi, s, t, regime.alpha, grid)

    lebesgue = regime.K**2 * phi.integral * psi.integral
    if label.is_critical:
        return _scalar_or_array(lebesgue * np.asarray(brownian_cov(s, t)))
    if label is RegimeLabel.NB_LOW:
        time_part = xi_cov(regime.etheta, regime.vartheta, regime.H, s, t)
    else:
        time_part = subfbm_cov(regime.H, s, t)
    return _scalar_or_array(lebesgue * np.asarray(time_part))


def time_model(regime: Regime) -> CovarianceModel:
    """The real-valued limit process of a low or critical regime (before K and Lebesgue)."""
    regime.require_supported()
    if regime.label is RegimeLabel.NB_LOW:
        return CovarianceModel.xi(regime.etheta, regime.vartheta, regime.H)
    if regime.label is RegimeLabel.B_LOW:
        return CovarianceModel.subfbm(regime.H)
    if regime.label.is_critical:
        return CovarianceModel.brownian()
    raise RegimeMismatchError(f"{regime.label.value} has a distribution-valued limit")

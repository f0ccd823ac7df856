"""
Exact simulation of the limit processes on finite time grids.

The covariance matrix of the kernel on the grid is factorised once (Cholesky with
an escalating diagonal jitter) and paths are drawn as factor @ N(0, I).
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from stable import DEFAULT_GRID, UniformGrid

from .limit_theory import CovarianceModel, Regime, limit_covariance

if TYPE_CHECKING:
    from particles.test_functions import PhiLike

logger = logging.getLogger(__name__)

# diagonal jitter, in units of trace/n, tried in order
JITTER_LADDER = (0.0, 1e-12, 1e-10)
RECONSTRUCTION_TOL = 1e-8
DEFAULT_LRD_LAGS = (8, 16, 32, 64, 128, 256, 512)

Kernel = Callable[[float, float], float]


class IndefiniteCovarianceError(RuntimeError):
    """Covariance matrix not positive semidefinite within the jitter budget."""
    pass


@dataclass(frozen=True, eq=False)
class GaussianPathModel:
    """A covariance model frozen on a time grid together with its lower factor."""

    cov: CovarianceModel
    times: np.ndarray
    matrix: np.ndarray
    factor: np.ndarray
    jitter: float

    @property
    def degenerate(self) -> bool:
        return not np.any(self.matrix)

    @property
    def reconstruction_error(self) -> float:
        """Relative Frobenius error of factor factor^T against the matrix."""
        norm = linalg.norm(self.matrix)
        if norm == 0.0:
            return float(linalg.norm(self.factor))
        return float(linalg.norm(self.factor @ self.factor.T - self.matrix) / norm)


def _check_times(times: Sequence[float], allow_zero: bool) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("Time grid must be a non-empty 1-d sequence")
    if np.any(np.diff(times) <= 0):
        raise ValueError(f"Time grid must be strictly increasing: {times}")
    if times[0] < 0 or (times[0] == 0 and not allow_zero):
        raise ValueError(f"Time grid must be positive: {times}")
    return times


def _factor(matrix: np.ndarray, name: str) -> Tuple[np.ndarray, float]:
    """Lower Cholesky factor, escalating the diagonal jitter along JITTER_LADDER."""
    n = matrix.shape[0]
    unit = np.trace(matrix) / n
    for level in JITTER_LADDER:
        jitter = level * unit
        try:
            factor = linalg.cholesky(matrix + jitter * np.eye(n), lower=True)
        except linalg.LinAlgError:
            logger.debug(f"Cholesky of {name} failed with jitter {jitter:.3e}")
            continue
        if jitter:
            logger.debug(f"Cholesky of {name} needed jitter {jitter:.3e}")
        return factor, jitter
    raise IndefiniteCovarianceError(
        f"Covariance {name} is indefinite beyond jitter {JITTER_LADDER[-1]:.0e} x trace/n")


def build_model(cov: CovarianceModel, times: Sequence[float],
                allow_zero: bool = False) -> GaussianPathModel:
    """Covariance matrix of `cov` on `times` and its Cholesky factor."""
    times = _check_times(times, allow_zero)
    matrix = cov.matrix(times)

    if not np.any(matrix):
        logger.info(f"Covariance {cov.name} vanishes on the grid; model samples zero paths")
        return GaussianPathModel(cov, times, matrix, np.zeros_like(matrix), 0.0)

    try:
        factor, jitter = _factor(matrix, cov.name)
    except IndefiniteCovarianceError as e:
        raise IndefiniteCovarianceError(f"{e} on grid {times.tolist()}") from e
    model = GaussianPathModel(cov, times, matrix, factor, jitter)
    if model.reconstruction_error > RECONSTRUCTION_TOL:
        logger.warning(f"⚠️ Factor of {cov.name} reproduces the matrix only to "
                       f"{model.reconstruction_error:.2e}")
    return model


def sample_paths(model: GaussianPathModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """n independent centred Gaussian paths (rows) with the model covariance."""
    normals = rng.standard_normal((n, model.times.size))
    return normals @ model.factor.T


def sample_xi(etheta: float, vartheta: float, H: float, times: Sequence[float], n: int,
              rng: np.random.Generator) -> np.ndarray:
    """sqrt(E theta) zeta^H + sqrt(Var theta) theta^H with independent components."""
    if etheta < 0 or vartheta < 0:
        raise ValueError(f"Moments must be non-negative: E={etheta}, Var={vartheta}")
    zeta = sample_paths(build_model(CovarianceModel.subfbm(H), times), n, rng)
    vartheta_part = sample_paths(build_model(CovarianceModel.theta_proc(H), times), n, rng)
    return np.sqrt(etheta) * zeta + np.sqrt(vartheta) * vartheta_part


def limit_field_matrix(regime: Regime, phis: Sequence["PhiLike"], times: Sequence[float],
                       grid: UniformGrid = DEFAULT_GRID) -> np.ndarray:
    """Joint covariance of <X(t_i), phi_k>, flattened time-major."""
    times = _check_times(times, allow_zero=True)
    labels = [(t, phi) for t in times for phi in phis]
    n = len(labels)
    matrix = np.empty((n, n))
    for a, (s, phi) in enumerate(labels):
        for b in range(a, n):
            t, psi = labels[b]
            matrix[a, b] = matrix[b, a] = float(limit_covariance(regime, phi, psi, s, t, grid))
    return matrix


def sample_limit_field(regime: Regime, phis: Sequence["PhiLike"], times: Sequence[float],
                       n: int, rng: np.random.Generator,
                       grid: UniformGrid = DEFAULT_GRID) -> np.ndarray:
    """n draws of the limit fluctuation field, shaped (n, times, test functions)."""
    regime.require_supported()
    matrix = limit_field_matrix(regime, phis, times, grid)
    shape = (n, len(times), len(phis))
    # zero-variance entries (t = 0) stay identically zero
    active = np.diag(matrix) > 0
    if not np.any(active):
        return np.zeros(shape)
    factor, _ = _factor(matrix[np.ix_(active, active)], f"{regime.label.value} field")
    draws = np.zeros((n, matrix.shape[0]))
    draws[:, active] = rng.standard_normal((n, int(active.sum()))) @ factor.T
    return draws.reshape(shape)


def increment_covariance(kernel: Kernel, lag: float, width: float = 1.0) -> float:
    """Cov of the increments over [0, width] and [lag, lag + width]."""
    return float(kernel(width, lag + width) - kernel(width, lag)
                 - kernel(0.0, lag + width) + kernel(0.0, lag))


def lrd_slope(kernel: Kernel, lags: Sequence[float] = DEFAULT_LRD_LAGS) -> float:
    """Slope of log|increment covariance| against log lag."""
    lags = np.asarray(lags, dtype=float)
    covs = np.abs([increment_covariance(kernel, lag) for lag in lags])
    if np.any(covs == 0):
        raise ValueError("Increment covariance vanishes at some lag; slope undefined")
    slope, _ = np.polyfit(np.log(lags), np.log(covs), 1)
    return float(slope)


def export_paths_csv(paths: np.ndarray, times: Sequence[float], path: Union[str, Path]) -> Path:
    """One row per path, one column per grid time."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["path"] + [repr(float(t)) for t in times])
        for i, row in enumerate(np.asarray(paths)):
            writer.writerow([i] + [repr(float(v)) for v in row])
    logger.debug(f"Wrote {len(paths)} paths to {path}")
    return path

"""
Estimators for replica collections: covariances with delete-1 jackknife errors,
a generic delete-block jackknife, covariance ratios and normality tests.

Replica collections are arrays shaped (replicas, times, test functions) or
sequences of FluctuationSample; variables are flattened time-major.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np
from scipy import stats

logger = logging.getLogger(__name__)

MIN_COV_REPLICAS = 100
MIN_NORMALITY_REPLICAS = 500


class InsufficientReplicasError(ValueError):
    """Too few replicas for the requested estimator."""
    pass


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    """Unbiased covariance of the flattened variables and its jackknife standard errors."""

    cov: np.ndarray
    se: np.ndarray
    replicas: int
    shape: Tuple[int, int]

    def index(self, t_index: int, phi_index: int) -> int:
        return t_index * self.shape[1] + phi_index

    def labels(self) -> List[Tuple[int, int]]:
        return [(i, k) for i in range(self.shape[0]) for k in range(self.shape[1])]


@dataclass(frozen=True)
class NormalityResult:
    ad_statistic: float
    ad_pvalue: float
    ks_statistic: float
    ks_pvalue: float
    n: int


def as_array(samples: Union[np.ndarray, Sequence]) -> np.ndarray:
    """Replica collection as an array (replicas, times, test functions)."""
    if isinstance(samples, np.ndarray):
        data = samples.astype(float)
    else:
        data = np.stack([np.asarray(getattr(s, "values", s), dtype=float) for s in samples])
    if data.ndim == 1:
        data = data[:, None, None]
    elif data.ndim == 2:
        data = data[:, :, None]
    return data


def estimate_cov(samples, min_replicas: int = MIN_COV_REPLICAS) -> CovarianceEstimate:
    """Sample covariances across replicas with closed-form delete-1 jackknife SEs."""
    data = as_array(samples)
    n = data.shape[0]
    if n < max(min_replicas, 3):
        raise InsufficientReplicasError(f"Covariance estimation needs >= {min_replicas} "
                                        f"replicas, got {n}")
    flat = data.reshape(n, -1)
    d = flat - flat.mean(axis=0)
    # constant columns have exactly zero covariance and error
    d[:, np.ptp(flat, axis=0) == 0] = 0.0
    total = d.T @ d
    cov = total / (n - 1)

    # leave-one-out covariances are (S - n p_i / (n-1)) / (n-2) with p_i = d_i d_i^T
    squares = (d**2).T @ (d**2)
    spread = np.clip(squares - total**2 / n, 0.0, None)
    scale = n / ((n - 1.0) * (n - 2.0))
    se = scale * np.sqrt((n - 1.0) / n * spread)
    return CovarianceEstimate(cov, se, n, (data.shape[1], data.shape[2]))


def jackknife(data, estimator: Callable[[np.ndarray], object],
              block_size: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Delete-block jackknife estimate of `estimator` along axis 0, with its SE."""
    data = np.asarray(data, dtype=float)
    if block_size < 1:
        raise ValueError(f"Block size must be >= 1: {block_size}")
    n_blocks = data.shape[0] // block_size
    if n_blocks < 2:
        raise InsufficientReplicasError(f"Jackknife needs >= 2 blocks, got {n_blocks}")
    data = data[:n_blocks * block_size]
    full = np.asarray(estimator(data), dtype=float)
    leave_out = np.stack([
        np.asarray(estimator(np.delete(data, np.s_[b * block_size:(b + 1) * block_size], axis=0)),
                   dtype=float)
        for b in range(n_blocks)])
    mean = leave_out.mean(axis=0)
    variance = (n_blocks - 1.0) / n_blocks * np.sum((leave_out - mean) ** 2, axis=0)
    return full, np.sqrt(variance)


def ratio_estimate(samples, numerator: Tuple[int, int],
                   denominator: Tuple[int, int]) -> Tuple[float, float]:
    """
    Cov[numerator] / Cov[denominator] over flattened variable indices, with its
    delete-1 jackknife SE.
    """
    flat = as_array(samples)
    n = flat.shape[0]
    if n < 3:
        raise InsufficientReplicasError(f"Ratio estimation needs >= 3 replicas, got {n}")
    flat = flat.reshape(n, -1)
    d = flat - flat.mean(axis=0)

    def leave_one_out(pair: Tuple[int, int]) -> Tuple[float, np.ndarray]:
        products = d[:, pair[0]] * d[:, pair[1]]
        total = products.sum()
        return total / (n - 1), (total - n * products / (n - 1.0)) / (n - 2.0)

    num, num_loo = leave_one_out(numerator)
    den, den_loo = leave_one_out(denominator)
    if den == 0 or np.any(den_loo == 0):
        raise ZeroDivisionError("Denominator covariance vanishes")
    ratios = num_loo / den_loo
    se = np.sqrt((n - 1.0) / n * np.sum((ratios - ratios.mean()) ** 2))
    return float(num / den), float(se)


def anderson_darling_pvalue(statistic: float, n: int) -> float:
    """p-value of the normal A^2 statistic with estimated mean and variance."""
    a = statistic * (1.0 + 0.75 / n + 2.25 / n**2)
    if a >= 0.6:
        p = np.exp(1.2937 - 5.709 * a + 0.0186 * a**2)
    elif a >= 0.34:
        p = np.exp(0.9177 - 4.279 * a - 1.38 * a**2)
    elif a >= 0.2:
        p = 1.0 - np.exp(-8.318 + 42.796 * a - 59.938 * a**2)
    else:
        p = 1.0 - np.exp(-13.436 + 101.14 * a - 223.73 * a**2)
    return float(np.clip(p, 0.0, 1.0))


def normality_test(values, min_replicas: int = MIN_NORMALITY_REPLICAS) -> NormalityResult:
    """Anderson-Darling (primary) and Kolmogorov-Smirnov against the fitted normal."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size < min_replicas:
        raise InsufficientReplicasError(f"Normality test needs >= {min_replicas} replicas, "
                                        f"got {x.size}")
    sd = x.std(ddof=1)
    if sd == 0:
        logger.warning("⚠️ Constant sample: normality test is degenerate")
        return NormalityResult(np.inf, 0.0, 1.0, 0.0, int(x.size))
    ad = float(stats.anderson(x, dist="norm").statistic)
    ks = stats.kstest(x, "norm", args=(x.mean(), sd))
    return NormalityResult(ad, anderson_darling_pvalue(ad, x.size),
                           float(ks.statistic), float(ks.pvalue), int(x.size))

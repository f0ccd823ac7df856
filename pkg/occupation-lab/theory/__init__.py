"""
Limit theory: regimes, constants, covariance kernels, the potential operator,
finite-time moment oracles and exact samplers of the limit processes.
"""

from .gaussian_limits import (
    GaussianPathModel,
    IndefiniteCovarianceError,
    build_model,
    export_paths_csv,
    increment_covariance,
    limit_field_matrix,
    lrd_slope,
    sample_limit_field,
    sample_paths,
    sample_xi,
)
from .limit_theory import (
    CovarianceModel,
    KernelDomainError,
    Regime,
    RegimeLabel,
    RegimeMismatchError,
    UnsupportedRegimeError,
    brownian_cov,
    classify_regime,
    fbm_cov,
    k1_constant,
    k2_constant,
    k3_constant,
    k4_constant,
    limit_covariance,
    long_memory_constant,
    subfbm_cov,
    theta_cov,
    time_model,
    wiener_cov,
    xi_cov,
)
from .moment_oracle import OracleResult, moment_oracle, moment_oracle_detail
from .potential import PotentialDomainError, PotentialOperator, c_alpha, potential_apply

__all__ = [
    'CovarianceModel',
    'GaussianPathModel',
    'IndefiniteCovarianceError',
    'KernelDomainError',
    'OracleResult',
    'PotentialDomainError',
    'PotentialOperator',
    'Regime',
    'RegimeLabel',
    'RegimeMismatchError',
    'UnsupportedRegimeError',
    'brownian_cov',
    'build_model',
    'c_alpha',
    'classify_regime',
    'export_paths_csv',
    'fbm_cov',
    'increment_covariance',
    'k1_constant',
    'k2_constant',
    'k3_constant',
    'k4_constant',
    'limit_covariance',
    'limit_field_matrix',
    'long_memory_constant',
    'lrd_slope',
    'moment_oracle',
    'moment_oracle_detail',
    'potential_apply',
    'sample_limit_field',
    'sample_paths',
    'sample_xi',
    'subfbm_cov',
    'theta_cov',
    'time_model',
    'wiener_cov',
    'xi_cov',
]

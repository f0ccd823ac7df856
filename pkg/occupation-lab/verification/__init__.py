"""
Statistical verification of simulated fluctuations against the limit theorems.
"""

from .report import (
    ESCALATION_FACTOR,
    Z_BAND,
    McReport,
    NormalityEntry,
    ReportEntry,
    compare_to_limit,
    plot_data,
)
from .statistics import (
    MIN_COV_REPLICAS,
    MIN_NORMALITY_REPLICAS,
    CovarianceEstimate,
    InsufficientReplicasError,
    NormalityResult,
    anderson_darling_pvalue,
    as_array,
    estimate_cov,
    jackknife,
    normality_test,
    ratio_estimate,
)

__all__ = [
    'ESCALATION_FACTOR',
    'MIN_COV_REPLICAS',
    'MIN_NORMALITY_REPLICAS',
    'Z_BAND',
    'CovarianceEstimate',
    'InsufficientReplicasError',
    'McReport',
    'NormalityEntry',
    'NormalityResult',
    'ReportEntry',
    'anderson_darling_pvalue',
    'as_array',
    'compare_to_limit',
    'estimate_cov',
    'jackknife',
    'normality_test',
    'plot_data',
    'ratio_estimate',
]

"""
Particle systems: test functions, quasi-homogeneous initial measures and the
simulation of occupation-time fluctuations.
"""

from .initial_measure import (
    MeasureConstructionError,
    PlacementRule,
    PointMeasure,
    ThetaLaw,
    TruncationError,
    Window,
    build_measure,
    default_window,
    mean_occupation_integral,
    mean_occupation_mass,
    window_deficit,
)
from .particle_system import (
    MAX_PARTICLE_STEPS,
    FluctuationSample,
    OccupationRecord,
    Population,
    PopulationExplosionError,
    SystemConfig,
    centering_matrix,
    check_regime,
    fluctuation_sample,
    mc_mixed_moment,
    simulate_occupation,
    simulate_system,
)
from .test_functions import LinearCombination, PhiLike, TestFunction, phi_from_dict

__all__ = [
    'MAX_PARTICLE_STEPS',
    'FluctuationSample',
    'LinearCombination',
    'MeasureConstructionError',
    'OccupationRecord',
    'PhiLike',
    'PlacementRule',
    'PointMeasure',
    'Population',
    'PopulationExplosionError',
    'SystemConfig',
    'TestFunction',
    'ThetaLaw',
    'TruncationError',
    'Window',
    'build_measure',
    'centering_matrix',
    'check_regime',
    'default_window',
    'fluctuation_sample',
    'mc_mixed_moment',
    'mean_occupation_integral',
    'mean_occupation_mass',
    'phi_from_dict',
    'simulate_occupation',
    'simulate_system',
    'window_deficit',
]

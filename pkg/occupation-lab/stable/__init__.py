"""
Standard symmetric alpha-stable motion.

Grid convention, transition density, distribution function, increment sampler
and the semigroup T_t acting on grid-functions.
"""

from .grid import DEFAULT_GRID, GridError, UniformGrid
from .stable_motion import (
    ALIAS_TOL,
    TAIL_TOL,
    AliasingError,
    DensityGrid,
    DensityInversionError,
    StableParameterError,
    StableParams,
    cdf,
    check_aliasing,
    density,
    density_grid,
    invert_characteristic,
    sample_increment,
    semigroup_apply,
    tail_constant,
)

__all__ = [
    'ALIAS_TOL',
    'TAIL_TOL',
    'DEFAULT_GRID',
    'AliasingError',
    'DensityGrid',
    'DensityInversionError',
    'GridError',
    'StableParameterError',
    'StableParams',
    'UniformGrid',
    'cdf',
    'check_aliasing',
    'density',
    'density_grid',
    'invert_characteristic',
    'sample_increment',
    'semigroup_apply',
    'tail_constant',
]

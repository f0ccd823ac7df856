"""
Uniform spatial grids shared by every grid-function computation.

Grid-functions are plain numpy arrays sampled on the nodes of a UniformGrid.
Node counts are powers of two so the semigroup and potential FFTs stay fast.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_HALF_WIDTH = 64.0
DEFAULT_NODES = 2**13


class GridError(ValueError):
    """Invalid grid specification."""
    pass


@dataclass(frozen=True)
class UniformGrid:
    """Nodes x_k = -half_width + k*step, k = 0..n_nodes-1 (right end excluded)."""

    half_width: float = DEFAULT_HALF_WIDTH
    n_nodes: int = DEFAULT_NODES

    def __post_init__(self) -> None:
        if self.half_width <= 0:
            raise GridError(f"Grid half width must be positive: {self.half_width}")
        if self.n_nodes < 4 or self.n_nodes & (self.n_nodes - 1):
            raise GridError(f"Grid node count must be a power of two >= 4: {self.n_nodes}")

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / self.n_nodes

    @cached_property
    def xs(self) -> np.ndarray:
        return -self.half_width + self.step * np.arange(self.n_nodes)

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Angular frequencies matching numpy.fft.rfft of a grid-function."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n_nodes, d=self.step)

    def refined(self) -> "UniformGrid":
        """Same extent, half the step."""
        return UniformGrid(self.half_width, 2 * self.n_nodes)

    def sample(self, f) -> np.ndarray:
        """Evaluate a callable on the grid nodes."""
        return np.asarray(f(self.xs), dtype=float)

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoid rule on the periodic grid (step times the node sum)."""
        return self.step * float(np.sum(values, axis=-1))

    def interpolate(self, values: np.ndarray, x) -> np.ndarray:
        """Linear interpolation of a grid-function; zero outside the grid."""
        return np.interp(x, self.xs, values, left=0.0, right=0.0)

    def contains(self, x: float) -> bool:
        return -self.half_width <= x < self.half_width


DEFAULT_GRID = UniformGrid()

"""
Discrete 3D state spaces and the recursive refinement schedule.
"""

from dataclasses import dataclass
import numpy as np
from config import (
    RPSM_INITIAL_EDGE_LENGTH,
    RPSM_INITIAL_BINS,
    RPSM_REFINE_BINS,
    RPSM_ITERATIONS,
)
from utils.errors import ConfigError


@dataclass(frozen=True, eq=False)
class GridSpec:
    """
    Cube of edge length `edge_length` (mm) around `center`, split into N^3 bins.

    Bin index = (iz * N + iy) * N + ix, i.e. row-major over (z, y, x).
    """

    center: np.ndarray
    edge_length: float
    bins_per_axis: int

    def __post_init__(self):
        center = np.array(self.center, dtype=float).reshape(3)
        center.flags.writeable = False
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "edge_length", float(self.edge_length))
        object.__setattr__(self, "bins_per_axis", int(self.bins_per_axis))
        if self.edge_length <= 0:
            raise ConfigError("Grid edge length must be positive")
        if self.bins_per_axis < 2:
            raise ConfigError("Grid needs at least 2 bins per axis")
        object.__setattr__(self, "_centers", self._compute_centers())

    @property
    def spacing(self):
        return self.edge_length / self.bins_per_axis

    @property
    def num_bins(self):
        return self.bins_per_axis**3

    @property
    def max_quantization_error(self):
        """Worst-case per-axis distance to the nearest bin center."""
        return self.edge_length / (2 * self.bins_per_axis)

    def _compute_centers(self):
        offsets = -self.edge_length / 2 + (np.arange(self.bins_per_axis) + 0.5) * self.spacing
        iz, iy, ix = np.meshgrid(offsets, offsets, offsets, indexing="ij")
        centers = np.stack([ix.ravel(), iy.ravel(), iz.ravel()], axis=1) + self.center
        centers.flags.writeable = False
        return centers

    def centers(self):
        """(N^3, 3) bin centers in bin-index order."""
        return self._centers

    def contains(self, point):
        offset = np.abs(np.asarray(point, dtype=float) - self.center)
        return bool(np.all(offset <= self.edge_length / 2))

    def nearest_bin(self, point):
        """Index of the bin whose center is closest to `point` (clamped to the cube)."""
        relative = (np.asarray(point, dtype=float) - self.center + self.edge_length / 2) / self.spacing
        ix, iy, iz = np.clip(np.floor(relative).astype(int), 0, self.bins_per_axis - 1)
        return int((iz * self.bins_per_axis + iy) * self.bins_per_axis + ix)


def build_grid(center, edge_length, bins_per_axis):
    """
    Parameters:
    - center (3-vector): cube center, mm
    - edge_length (float): cube edge s, mm
    - bins_per_axis (int): N >= 2

    Returns:
    - GridSpec: N^3 bins of spacing s / N
    """
    return GridSpec(center=center, edge_length=edge_length, bins_per_axis=bins_per_axis)


@dataclass(frozen=True)
class RefinementSchedule:
    """
    Stage 0 uses one shared grid of `initial_bins`^3 bins over `initial_edge_length` mm.
    Stage t >= 1 gives every joint its own `refine_bins`^3 grid of edge length
    initial_edge_length / (initial_bins * refine_bins^(t-1)).
    """

    initial_edge_length: float = RPSM_INITIAL_EDGE_LENGTH
    initial_bins: int = RPSM_INITIAL_BINS
    refine_bins: int = RPSM_REFINE_BINS
    iterations: int = RPSM_ITERATIONS

    def __post_init__(self):
        if self.initial_edge_length <= 0:
            raise ConfigError("Initial edge length must be positive")
        if self.initial_bins < 2 or self.refine_bins < 2:
            raise ConfigError("Schedules need at least 2 bins per axis")
        if self.iterations < 0:
            raise ConfigError("Iteration count must be non-negative")

    def edge_length(self, stage):
        if stage == 0:
            return self.initial_edge_length
        return self.initial_edge_length / (self.initial_bins * self.refine_bins ** (stage - 1))

    def edge_lengths(self):
        return [self.edge_length(stage) for stage in range(self.iterations + 1)]

    def as_dict(self):
        return {
            "initial_edge_length": self.initial_edge_length,
            "initial_bins": self.initial_bins,
            "refine_bins": self.refine_bins,
            "iterations": self.iterations,
        }

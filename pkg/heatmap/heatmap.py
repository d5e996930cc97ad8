"""
2D joint-confidence grids: construction, rendering, sampling, and peak extraction.

Heatmap cell (row, col) is centered on image pixel (col * stride, row * stride).
"""

from dataclasses import dataclass
import numpy as np
from utils.errors import DataError, DimensionMismatch
from utils.logging import configure_logging

logger = configure_logging(__name__)

HEATMAP_DTYPE = np.float32


def _readonly(values, ndim):
    values = np.array(values, dtype=HEATMAP_DTYPE)
    if values.ndim != ndim or 0 in values.shape:
        raise DimensionMismatch(f"Expected a non-empty {ndim}-D heatmap array, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise DataError("Heatmap values must be finite")
    values.flags.writeable = False
    return values


@dataclass(frozen=True, eq=False)
class Heatmap:
    """
    One view's confidence grid for one joint.
    """

    values: np.ndarray
    joint: int
    view: str
    stride: float

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values, 2))

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class HeatmapSet:
    """
    Heatmaps for every (view, joint) pair of a multi-camera frame.

    Fields:
    - values (V, M, H, W): confidences, view order follows `cameras`
    - cameras (tuple of CameraParams): one per view
    - stride (float): image pixels per heatmap cell
    """

    values: np.ndarray
    cameras: tuple
    stride: float

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values, 4))
        object.__setattr__(self, "cameras", tuple(self.cameras))
        object.__setattr__(self, "stride", float(self.stride))
        if len(self.cameras) != self.values.shape[0]:
            raise DimensionMismatch(
                f"{len(self.cameras)} cameras for {self.values.shape[0]} heatmap views"
            )
        if self.stride <= 0:
            raise DataError("Heatmap stride must be positive")

    @property
    def num_views(self):
        return self.values.shape[0]

    @property
    def num_joints(self):
        return self.values.shape[1]

    @property
    def map_shape(self):
        return self.values.shape[2:]

    @property
    def view_ids(self):
        return [camera.id for camera in self.cameras]

    def view_index(self, view):
        if isinstance(view, (int, np.integer)):
            return int(view)
        return self.view_ids.index(view)

    def heatmap(self, view, joint):
        index = self.view_index(view)
        return Heatmap(
            values=self.values[index, joint],
            joint=joint,
            view=self.cameras[index].id,
            stride=self.stride,
        )

    def with_values(self, values):
        """New set with the same cameras and stride."""
        return HeatmapSet(values=values, cameras=self.cameras, stride=self.stride)


@dataclass(frozen=True)
class Peak:
    """Hard peak of a heatmap; `degenerate` marks a map whose cells are all equal."""

    pixel: np.ndarray
    confidence: float
    degenerate: bool


def cell_pixels(shape, stride):
    """Image-pixel centers (H*W, 2) of all cells in row-major order."""
    rows, cols = np.indices(shape)
    return np.stack([cols.ravel() * stride, rows.ravel() * stride], axis=1).astype(float)


def gaussian_maps(centers, sigma, dims, stride):
    """
    Render one Gaussian per center into an (M, H, W) array.

    Parameters:
    - centers (M, 2): joint pixels
    - sigma (float): Gaussian sigma in image pixels
    - dims (H, W): heatmap dimensions
    - stride (float): image pixels per cell

    Returns:
    - np.ndarray: float32 maps; a map is all zero if its center lies more than
      3 sigma outside the heatmap's pixel extent
    """
    if sigma <= 0:
        raise DataError("Gaussian sigma must be positive")
    height, width = dims
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    xs = np.arange(width) * stride
    ys = np.arange(height) * stride
    maps = np.zeros((len(centers), height, width), dtype=HEATMAP_DTYPE)
    for index, (x, y) in enumerate(centers):
        outside_x = max(0.0, -x, x - xs[-1])
        outside_y = max(0.0, -y, y - ys[-1])
        if np.hypot(outside_x, outside_y) > 3 * sigma or not np.isfinite(x + y):
            continue
        gx = np.exp(-((xs - x) ** 2) / (2 * sigma**2))
        gy = np.exp(-((ys - y) ** 2) / (2 * sigma**2))
        maps[index] = np.outer(gy, gx)
    return maps


def render_gaussian(centers, sigma, dims, stride, view=""):
    """
    Per-joint Gaussian target heatmaps.

    Returns:
    - list of Heatmap: map j holds exp(-d^2 / (2 sigma^2)) at cell-center distance d
      from centers[j]
    """
    maps = gaussian_maps(centers, sigma, dims, stride)
    return [
        Heatmap(values=values, joint=joint, view=view, stride=stride)
        for joint, values in enumerate(maps)
    ]


def sample_bilinear_many(values, pixels, stride):
    """
    Bilinear samples of a 2D grid at continuous pixel positions.

    Cells outside the grid read as zero; NaN pixels sample to zero.

    Parameters:
    - values (H, W): grid
    - pixels (N, 2): image pixels
    - stride (float): image pixels per cell

    Returns:
    - np.ndarray: (N,) float64 samples
    """
    values = np.asarray(values, dtype=float)
    height, width = values.shape
    pixels = np.atleast_2d(np.asarray(pixels, dtype=float))
    finite = np.all(np.isfinite(pixels), axis=1)
    samples = np.zeros(len(pixels))
    if not np.any(finite):
        return samples

    u = pixels[finite, 0] / stride
    v = pixels[finite, 1] / stride
    col0 = np.floor(u).astype(np.int64)
    row0 = np.floor(v).astype(np.int64)
    fx = u - col0
    fy = v - row0

    accumulated = np.zeros(len(u))
    for d_row, d_col, weight in (
        (0, 0, (1 - fy) * (1 - fx)),
        (0, 1, (1 - fy) * fx),
        (1, 0, fy * (1 - fx)),
        (1, 1, fy * fx),
    ):
        rows = row0 + d_row
        cols = col0 + d_col
        inside = (rows >= 0) & (rows < height) & (cols >= 0) & (cols < width)
        cell = np.zeros(len(u))
        cell[inside] = values[rows[inside], cols[inside]]
        accumulated += weight * cell
    samples[finite] = accumulated
    return samples


def sample_bilinear(heatmap, pixel):
    """Bilinear confidence of one heatmap at one continuous pixel, zero-padded."""
    return float(sample_bilinear_many(heatmap.values, [pixel], heatmap.stride)[0])


def argmax_location(heatmap):
    """
    Hard peak of a heatmap.

    Ties go to the smallest row-major index. A map whose cells are all equal is
    flagged `degenerate` and reports index 0.

    Returns:
    - Peak: image pixel of the maximal cell, its value, and the degenerate flag
    """
    values = heatmap.values
    index = int(np.argmax(values))
    degenerate = bool(values.max() == values.min())
    if degenerate:
        logger.warning("Degenerate heatmap for joint %s in view %s", heatmap.joint, heatmap.view)
        index = 0
    row, col = divmod(index, values.shape[1])
    pixel = np.array([col * heatmap.stride, row * heatmap.stride], dtype=float)
    return Peak(pixel=pixel, confidence=float(values.flat[index]), degenerate=degenerate)


def peak_pixels(heatmap_set):
    """
    Argmax pixels and degenerate flags for every (view, joint) of a set.

    Returns:
    - pixels (V, M, 2), confidences (V, M), degenerate (V, M)
    """
    views, joints = heatmap_set.num_views, heatmap_set.num_joints
    pixels = np.zeros((views, joints, 2))
    confidences = np.zeros((views, joints))
    degenerate = np.zeros((views, joints), dtype=bool)
    for view in range(views):
        for joint in range(joints):
            peak = argmax_location(heatmap_set.heatmap(view, joint))
            pixels[view, joint] = peak.pixel
            confidences[view, joint] = peak.confidence
            degenerate[view, joint] = peak.degenerate
    return pixels, confidences, degenerate

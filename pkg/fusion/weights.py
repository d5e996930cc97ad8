"""
Epipolar fusion weights for ordered view pairs.

Row i of a weight matrix belongs to target cell i, column j to source cell j, both in
row-major heatmap order. Geometric weights are a truncated Gaussian of the distance
between source cell j and the epipolar line of target cell i, normalized per row.
"""

from dataclasses import dataclass
import itertools
import numpy as np
from scipy import sparse
from config import DP_CHUNK_ELEMENTS
from geometry.epipolar import fundamental_matrix, epipolar_lines, point_line_distances
from heatmap.heatmap import cell_pixels
from utils.logging import configure_logging

logger = configure_logging(__name__)

TRUNCATION = 3.0


@dataclass(frozen=True, eq=False)
class FusionWeights:
    """
    Sparse weight matrix fusing source-view cells into target-view cells.

    Fields:
    - source (str): source view id
    - target (str): target view id
    - matrix (csr_matrix): |Z_target| x |Z_source| weights
    - kernel_sigma (float): Gaussian kernel sigma, image pixels
    - threshold (float): support half-width around the epipolar line, image pixels
    """

    source: str
    target: str
    matrix: sparse.csr_matrix
    kernel_sigma: float
    threshold: float

    @property
    def shape(self):
        return self.matrix.shape

    def support(self):
        """Same sparsity pattern with every stored weight set to 1."""
        pattern = self.matrix.copy()
        pattern.data = np.ones_like(pattern.data)
        return pattern

    def with_matrix(self, matrix):
        return FusionWeights(
            source=self.source,
            target=self.target,
            matrix=sparse.csr_matrix(matrix),
            kernel_sigma=self.kernel_sigma,
            threshold=self.threshold,
        )


def build_epipolar_weights(cam_target, cam_source, dims, stride, kernel_sigma):
    """
    Geometric fusion weights for one ordered view pair.

    Parameters:
    - cam_target (CameraParams): view whose cells are updated
    - cam_source (CameraParams): view whose cells are read
    - dims (H, W): heatmap dimensions shared by both views
    - stride (float): image pixels per heatmap cell
    - kernel_sigma (float): kernel sigma, image pixels

    Returns:
    - FusionWeights: rows normalized to sum 1; rows whose epipolar line misses the
      source heatmap stay empty

    Throws:
    - CoincidentCameras: if the camera centers coincide
    """
    fundamental = fundamental_matrix(cam_target, cam_source)
    target_pixels = cell_pixels(dims, stride)
    source_pixels = cell_pixels(dims, stride)
    lines, _ = epipolar_lines(target_pixels, fundamental)

    threshold = TRUNCATION * kernel_sigma
    num_target, num_source = len(target_pixels), len(source_pixels)
    rows_per_block = max(1, DP_CHUNK_ELEMENTS // num_source)

    rows, cols, values = [], [], []
    for start in range(0, num_target, rows_per_block):
        distances = point_line_distances(source_pixels, lines[start : start + rows_per_block])
        # NaN distances (pixels at the epipole) fail the comparison and stay empty
        block_rows, block_cols = np.nonzero(distances <= threshold)
        block_distances = distances[block_rows, block_cols]
        rows.append(block_rows + start)
        cols.append(block_cols)
        values.append(np.exp(-(block_distances**2) / (2 * kernel_sigma**2)))

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    values = np.concatenate(values)
    row_sums = np.bincount(rows, weights=values, minlength=num_target)
    values = values / row_sums[rows]

    matrix = sparse.csr_matrix((values, (rows, cols)), shape=(num_target, num_source))
    logger.debug(
        "Built epipolar weights %s <- %s: %d entries, %d empty rows",
        cam_target.id,
        cam_source.id,
        matrix.nnz,
        int(np.sum(np.diff(matrix.indptr) == 0)),
    )
    return FusionWeights(
        source=cam_source.id,
        target=cam_target.id,
        matrix=matrix,
        kernel_sigma=float(kernel_sigma),
        threshold=float(threshold),
    )


def build_all_weights(cameras, dims, stride, kernel_sigma):
    """
    Geometric weights for every ordered pair of distinct views.

    Returns:
    - dict: (target id, source id) -> FusionWeights
    """
    weights = {}
    for cam_target, cam_source in itertools.permutations(cameras, 2):
        weights[(cam_target.id, cam_source.id)] = build_epipolar_weights(
            cam_target, cam_source, dims, stride, kernel_sigma
        )
    logger.info("Built fusion weights for %d ordered view pairs", len(weights))
    return weights

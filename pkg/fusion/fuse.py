"""
Cross-view heatmap fusion.

Every mode keeps the detected map of a view and adds evidence gathered from the other
views along epipolar lines; the same weights serve every joint channel.
"""

from enum import Enum
import numpy as np
from utils.errors import DimensionMismatch, MissingWeights
from utils.logging import configure_logging

logger = configure_logging(__name__)


class FusionMode(Enum):
    """How source-view evidence on an epipolar line is combined."""

    WEIGHTED = "weighted"
    LINE_SUM = "line-sum"
    LINE_MAX = "line-max"
    IDENTITY = "identity"


def _line_max(matrix, channels):
    """Per-row max of `channels` over the row's stored columns; empty rows give 0."""
    result = np.zeros((matrix.shape[0], channels.shape[1]))
    counts = np.diff(matrix.indptr)
    nonempty = counts > 0
    if not np.any(nonempty):
        return result
    gathered = channels[matrix.indices]
    result[nonempty] = np.maximum.reduceat(gathered, matrix.indptr[:-1][nonempty], axis=0)
    return result


def _contribution(fusion_weights, channels, mode):
    matrix = fusion_weights.matrix
    if mode is FusionMode.WEIGHTED:
        return matrix @ channels
    if mode is FusionMode.LINE_SUM:
        return fusion_weights.support() @ channels
    return _line_max(matrix, channels)


def warped_heatmaps(heatmap_set, weights, mode=FusionMode.WEIGHTED):
    """
    Evidence each view receives from all other views, without its own detection.

    Parameters:
    - heatmap_set (HeatmapSet): detected maps
    - weights (dict): (target id, source id) -> FusionWeights, every ordered pair
    - mode (FusionMode): any mode but IDENTITY

    Returns:
    - np.ndarray: (V, M, H, W) float64 warped maps

    Throws:
    - MissingWeights: a required ordered pair has no weights
    - DimensionMismatch: weight shapes disagree with the heatmaps
    """
    views, joints = heatmap_set.num_views, heatmap_set.num_joints
    height, width = heatmap_set.map_shape
    cells = height * width
    # (V, cells, M) so each view is one matrix with a column per joint
    channels = heatmap_set.values.reshape(views, joints, cells).transpose(0, 2, 1).astype(float)

    warped = np.zeros((views, cells, joints))
    for target, cam_target in enumerate(heatmap_set.cameras):
        for source, cam_source in enumerate(heatmap_set.cameras):
            if source == target:
                continue
            key = (cam_target.id, cam_source.id)
            if key not in weights:
                raise MissingWeights(f"No fusion weights for target {key[0]} <- source {key[1]}")
            fusion_weights = weights[key]
            if fusion_weights.shape != (cells, cells):
                raise DimensionMismatch(
                    f"Weights {key} have shape {fusion_weights.shape}, heatmaps need {(cells, cells)}"
                )
            warped[target] += _contribution(fusion_weights, channels[source], mode)
    return warped.transpose(0, 2, 1).reshape(views, joints, height, width)


def fuse_heatmaps(heatmap_set, weights, mode=FusionMode.WEIGHTED):
    """
    Fuse each view's heatmaps with the heatmaps of all other views.

    weighted:  out_i^u = x_i^u + sum_{v != u} sum_j w_{j,i} x_j^v
    line-sum:  the inner weighted sum becomes a plain sum over the epipolar support
    line-max:  the inner weighted sum becomes a max over the epipolar support
    identity:  the input values, unchanged

    The input set is never mutated.

    Returns:
    - HeatmapSet: fused maps (not renormalized or clamped)
    """
    mode = FusionMode(mode)
    if mode is FusionMode.IDENTITY or heatmap_set.num_views < 2:
        return heatmap_set.with_values(heatmap_set.values.copy())

    warped = warped_heatmaps(heatmap_set, weights, mode)
    fused = heatmap_set.values.astype(float) + warped
    logger.debug(
        "Fused %d views x %d joints with mode %s", heatmap_set.num_views, heatmap_set.num_joints, mode.value
    )
    return heatmap_set.with_values(fused)

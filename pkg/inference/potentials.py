"""
Unary and pairwise potentials of the pictorial structure model.
"""

import numpy as np
from geometry.camera import project_many
from heatmap.heatmap import sample_bilinear_many


def limb_bounds_squared(low, high):
    """Squared (low, high) limb-length interval; comparisons run on squared distances."""
    return low * low, high * high


def limb_allowed(distance_squared, low, high):
    """Indicator of distances in [low, high], boundary inclusive, on squared distances."""
    low_sq, high_sq = limb_bounds_squared(low, high)
    return (distance_squared >= low_sq) & (distance_squared <= high_sq)


def pairwise_potential(pos_m, pos_n, length, tolerance):
    """
    Limb-length indicator.

    Returns:
    - int: 1 if ||pos_m - pos_n|| lies in [length - tolerance, length + tolerance], else 0
    """
    offset = np.asarray(pos_m, dtype=float) - np.asarray(pos_n, dtype=float)
    low = max(length - tolerance, 0.0)
    return int(limb_allowed(float(offset @ offset), low, length + tolerance))


def _view_pixels(points, camera):
    """Projections with out-of-image and behind-camera points set to NaN."""
    pixels, _ = project_many(points, camera)
    outside = (
        (pixels[:, 0] < -0.5)
        | (pixels[:, 0] > camera.width - 0.5)
        | (pixels[:, 1] < -0.5)
        | (pixels[:, 1] > camera.height - 0.5)
    )
    pixels[outside] = np.nan
    return pixels


def unary_potentials(grids, heatmap_set, cameras=None):
    """
    Average heatmap confidence of every bin over all views.

    A bin whose projection is behind the camera or outside the image contributes 0 for
    that view; the denominator is always the view count.

    Parameters:
    - grids (list of GridSpec): one per joint (the same object may be shared)
    - heatmap_set (HeatmapSet): heatmaps for every (view, joint)
    - cameras (list of CameraParams): defaults to the set's cameras

    Returns:
    - list of np.ndarray: (N^3,) unary table per joint
    """
    cameras = heatmap_set.cameras if cameras is None else cameras
    projections = {}
    unaries = []
    for joint, grid in enumerate(grids):
        key = id(grid)
        if key not in projections:
            centers = grid.centers()
            projections[key] = [_view_pixels(centers, camera) for camera in cameras]
        total = np.zeros(grid.num_bins)
        for view, pixels in enumerate(projections[key]):
            total += sample_bilinear_many(heatmap_set.values[view, joint], pixels, heatmap_set.stride)
        unaries.append(total / len(cameras))
    return unaries


def score_pose(graph, grids, unaries, priors, bins):
    """
    Unnormalized posterior of a bin assignment: product of unaries and limb indicators.
    """
    for edge, (parent, child) in enumerate(graph.edges):
        offset = grids[parent].centers()[bins[parent]] - grids[child].centers()[bins[child]]
        if not limb_allowed(float(offset @ offset), *priors.bounds(edge)):
            return 0.0
    score = 1.0
    for joint, bin_index in enumerate(bins):
        score *= float(unaries[joint][bin_index])
    return score

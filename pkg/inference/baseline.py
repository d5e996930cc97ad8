"""
Triangulation from heatmap peaks: the root bootstrap for the pictorial structure model
and the structure-free triangulation baseline.
"""

import numpy as np
from geometry.camera import back_project_ray
from geometry.triangulation import triangulate
from heatmap.heatmap import argmax_location
from utils.errors import IllConditioned, InsufficientViews
from utils.logging import configure_logging
from .pose import Pose3D

logger = configure_logging(__name__)


def _joint_peaks(heatmap_set, joint):
    return [argmax_location(heatmap_set.heatmap(view, joint)) for view in range(heatmap_set.num_views)]


def _usable_peaks(heatmap_set, cameras, joint):
    peaks = _joint_peaks(heatmap_set, joint)
    return [(camera, peak) for camera, peak in zip(cameras, peaks) if not peak.degenerate]


def triangulate_root(heatmap_set, cameras=None, root_joint=0):
    """
    3D root position from the per-view argmax of the root heatmaps.

    Views whose root map is degenerate (all cells equal) are excluded.

    Throws:
    - InsufficientViews: fewer than 2 usable views
    - IllConditioned: propagated from triangulate
    """
    cameras = heatmap_set.cameras if cameras is None else cameras
    observations = [(camera, peak.pixel) for camera, peak in _usable_peaks(heatmap_set, cameras, root_joint)]
    if len(observations) < 2:
        raise InsufficientViews(
            f"Root joint {root_joint} is usable in {len(observations)} views, need 2"
        )
    point, residual = triangulate(observations)
    logger.debug("Triangulated root from %d views, residual %.3f px", len(observations), residual)
    return point


def locate_root(heatmap_set, cameras=None, root_joint=0):
    """
    Center for the first pictorial structure grid.

    Uses `triangulate_root`; when the root cannot be triangulated, falls back to the
    centroid of the joints `triangulate_pose` recovers, and logs a WARNING.

    Throws:
    - InsufficientViews: no joint at all can be triangulated
    """
    cameras = heatmap_set.cameras if cameras is None else cameras
    try:
        return triangulate_root(heatmap_set, cameras, root_joint)
    except IllConditioned as e:
        pose = triangulate_pose(heatmap_set, cameras)
        recovered = pose.confidence > 0
        if not np.any(recovered):
            raise InsufficientViews(f"{e}; no other joint can be triangulated either") from e
        logger.warning("%s; centering the grid on %d triangulated joints", e, int(recovered.sum()))
        return pose.positions[recovered].mean(axis=0)


def triangulate_pose(heatmap_set, cameras=None):
    """
    Per-joint DLT triangulation of heatmap peaks, without structural constraints.

    Only non-degenerate peaks are triangulated. A joint with fewer than 2 of them, or
    whose rays are near-parallel, is flagged with confidence 0: with one usable view it
    goes to the point of that view's ray nearest the centroid of the triangulated
    joints, otherwise to the centroid itself.

    Returns:
    - Pose3D: confidence = mean peak value of the views used, 0 when flagged
    """
    cameras = heatmap_set.cameras if cameras is None else cameras
    positions = np.full((heatmap_set.num_joints, 3), np.nan)
    confidence = np.zeros(heatmap_set.num_joints)
    single_rays = {}
    for joint in range(heatmap_set.num_joints):
        usable = _usable_peaks(heatmap_set, cameras, joint)
        try:
            positions[joint], _ = triangulate([(camera, peak.pixel) for camera, peak in usable])
            confidence[joint] = np.mean([peak.confidence for _, peak in usable])
        except IllConditioned as e:
            logger.warning("Joint %d cannot be triangulated: %s", joint, e)
            if len(usable) == 1:
                camera, peak = usable[0]
                single_rays[joint] = back_project_ray(peak.pixel, camera)

    missing = np.isnan(positions[:, 0])
    if np.any(missing):
        fallback = positions[~missing].mean(axis=0) if np.any(~missing) else np.zeros(3)
        for joint in np.flatnonzero(missing):
            ray = single_rays.get(joint)
            positions[joint] = fallback if ray is None else ray.closest_point(fallback)
    return Pose3D(positions=positions, confidence=confidence)

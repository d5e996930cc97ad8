"""
Linear (DLT) triangulation from two or more calibrated observations.
"""

import numpy as np
from utils.errors import IllConditioned, InsufficientViews
from utils.logging import configure_logging
from .camera import camera_center, projection_matrix, to_camera_frame, MIN_DEPTH

logger = configure_logging(__name__)

MAX_CONDITION = 1e12


def _world_normalization(cameras):
    """
    Similarity taking normalized homogeneous coordinates back to world coordinates,
    centered on the camera centers and scaled by their spread.
    """
    centers = np.array([camera_center(camera) for camera in cameras])
    centroid = centers.mean(axis=0)
    scale = np.linalg.norm(centers - centroid, axis=1).mean()
    if scale <= 0:
        scale = 1.0
    denormalize = np.eye(4)
    denormalize[:3, :3] *= scale
    denormalize[:3, 3] = centroid
    return denormalize


def _solve_dlt(cameras, pixels):
    rows = []
    for camera, (x, y) in zip(cameras, pixels):
        matrix = projection_matrix(camera)
        rows.append(x * matrix[2] - matrix[0])
        rows.append(y * matrix[2] - matrix[1])

    denormalize = _world_normalization(cameras)
    design = np.array(rows) @ denormalize
    design /= np.linalg.norm(design, axis=1, keepdims=True)

    spatial = design[:, :3]
    condition = np.linalg.cond(spatial.T @ spatial)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise IllConditioned(
            f"Triangulation normal matrix condition number {condition:.3g} exceeds {MAX_CONDITION:.0e}"
        )

    _, _, vt = np.linalg.svd(design)
    solution = denormalize @ vt[-1]
    if abs(solution[3]) < np.finfo(float).tiny:
        raise IllConditioned("Triangulated point lies at infinity")
    return solution[:3] / solution[3]


def reprojection_residual(point, cameras, pixels):
    """RMS reprojection error (px) of `point` over the observations."""
    errors = []
    for camera, pixel in zip(cameras, pixels):
        local = to_camera_frame(point, camera)
        homogeneous = camera.intrinsics @ local
        errors.append(np.sum((homogeneous[:2] / homogeneous[2] - pixel) ** 2))
    return float(np.sqrt(np.mean(errors)))


def triangulate(observations):
    """
    Recover a world point from pixel observations by homogeneous DLT.

    Observations whose camera sees the solution behind it are dropped and the
    system is solved again.

    Parameters:
    - observations (list): (CameraParams, pixel) pairs, at least 2

    Returns:
    - tuple: (point (3,) in mm, RMS reprojection residual in px)

    Throws:
    - InsufficientViews: fewer than 2 usable observations
    - IllConditioned: near-parallel rays (normal-matrix condition above 1e12)
    """
    cameras = [camera for camera, _ in observations]
    pixels = [np.asarray(pixel, dtype=float) for _, pixel in observations]

    while True:
        if len(cameras) < 2:
            raise InsufficientViews(
                f"Triangulation needs at least 2 observations, got {len(cameras)}"
            )
        point = _solve_dlt(cameras, pixels)
        in_front = [to_camera_frame(point, camera)[2] > MIN_DEPTH for camera in cameras]
        if all(in_front):
            return point, reprojection_residual(point, cameras, pixels)
        dropped = [camera.id for camera, keep in zip(cameras, in_front) if not keep]
        logger.debug("Excluding observations behind cameras %s", dropped)
        cameras = [camera for camera, keep in zip(cameras, in_front) if keep]
        pixels = [pixel for pixel, keep in zip(pixels, in_front) if keep]

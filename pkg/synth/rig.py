"""
Ring-shaped multi-camera rigs.
"""

import numpy as np
from config import RIG_FOCAL, RIG_IMAGE_HEIGHT, RIG_IMAGE_WIDTH, RIG_NUM_CAMERAS, RIG_RADIUS, RIG_TARGET
from geometry.camera import make_camera
from utils.errors import ConfigError

WORLD_UP = np.array([0.0, 0.0, 1.0])


def look_at(center, target):
    """
    World-to-camera rotation of a camera at `center` whose optical axis points at
    `target`, with image y pointing toward world -z.
    """
    forward = np.asarray(target, dtype=float) - np.asarray(center, dtype=float)
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, WORLD_UP)
    if np.linalg.norm(right) < 1e-9:
        raise ConfigError("Camera looks straight up or down; no horizon is defined")
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    return np.stack([right, down, forward])


def generate_rig(
    num_cameras=RIG_NUM_CAMERAS,
    radius=RIG_RADIUS,
    target=RIG_TARGET,
    image_dims=(RIG_IMAGE_WIDTH, RIG_IMAGE_HEIGHT),
    focal=RIG_FOCAL,
    height_offset=0.0,
):
    """
    Cameras equally spaced on a horizontal circle around `target`, all looking at it.

    Parameters:
    - num_cameras (int): at least 2
    - radius (float): circle radius, mm
    - target (3-vector): common look-at point, mm
    - image_dims (width, height): pixels; the principal point is the image center
    - focal (float): focal length, pixels
    - height_offset (float): circle height above the target, mm

    Returns:
    - list of CameraParams with ids cam0, cam1, ...
    """
    if num_cameras < 2:
        raise ConfigError("A rig needs at least 2 cameras")
    if radius <= 0:
        raise ConfigError("Rig radius must be positive")
    target = np.asarray(target, dtype=float)
    principal = (image_dims[0] / 2.0, image_dims[1] / 2.0)
    cameras = []
    for index in range(num_cameras):
        angle = 2 * np.pi * index / num_cameras
        center = target + np.array([radius * np.cos(angle), radius * np.sin(angle), height_offset])
        rotation = look_at(center, target)
        cameras.append(
            make_camera(
                f"cam{index}",
                focal,
                principal,
                rotation,
                -rotation @ center,
                image_dims,
            )
        )
    return cameras

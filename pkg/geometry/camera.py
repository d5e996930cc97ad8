"""
Calibrated pinhole cameras: projection and back-projection.

World unit is millimetres. Pixel coordinates are continuous with the origin at the
top-left pixel center, x to the right and y down.
"""

from dataclasses import dataclass
import numpy as np
from utils.errors import DegenerateDepth, GeometryError

ROTATION_TOLERANCE = 1e-9
MIN_DEPTH = 1e-6


def _frozen(array, shape, name):
    array = np.array(array, dtype=float).reshape(shape)
    if not np.all(np.isfinite(array)):
        raise GeometryError(f"Camera {name} holds non-finite entries")
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class CameraParams:
    """
    Calibrated pinhole camera mapping world points (mm) to pixels.

    Fields:
    - intrinsics (3x3): focal lengths and principal point, pixels
    - rotation (3x3): orthonormal world-to-camera rotation, det +1
    - translation (3,): world-to-camera translation, mm
    - image_dims (width, height): image size in pixels
    - id (str): view identifier
    """

    intrinsics: np.ndarray
    rotation: np.ndarray
    translation: np.ndarray
    image_dims: tuple
    id: str

    def __post_init__(self):
        object.__setattr__(self, "intrinsics", _frozen(self.intrinsics, (3, 3), "intrinsics"))
        object.__setattr__(self, "rotation", _frozen(self.rotation, (3, 3), "rotation"))
        object.__setattr__(
            self, "translation", _frozen(self.translation, (3,), "translation")
        )
        object.__setattr__(
            self, "image_dims", (int(self.image_dims[0]), int(self.image_dims[1]))
        )
        object.__setattr__(self, "id", str(self.id))

        rotation = self.rotation
        if not np.allclose(rotation @ rotation.T, np.eye(3), rtol=0, atol=ROTATION_TOLERANCE):
            raise GeometryError(f"Camera {self.id}: rotation is not orthonormal")
        if abs(np.linalg.det(rotation) - 1.0) > ROTATION_TOLERANCE:
            raise GeometryError(f"Camera {self.id}: rotation determinant is not +1")
        if self.intrinsics[0, 0] <= 0 or self.intrinsics[1, 1] <= 0:
            raise GeometryError(f"Camera {self.id}: focal lengths must be positive")
        if self.image_dims[0] <= 0 or self.image_dims[1] <= 0:
            raise GeometryError(f"Camera {self.id}: image dimensions must be positive")

    @property
    def width(self):
        return self.image_dims[0]

    @property
    def height(self):
        return self.image_dims[1]

    @property
    def focal(self):
        """Mean of the two focal lengths, pixels."""
        return 0.5 * (self.intrinsics[0, 0] + self.intrinsics[1, 1])


@dataclass(frozen=True, eq=False)
class Ray3D:
    """
    Half-line `origin + lambda * direction`, lambda > 0, in world coordinates.
    """

    origin: np.ndarray
    direction: np.ndarray

    def distance_to(self, point):
        """Perpendicular distance (mm) from `point` to the supporting line."""
        offset = np.asarray(point, dtype=float) - self.origin
        along = offset @ self.direction
        return float(np.linalg.norm(offset - along * self.direction))

    def closest_point(self, point):
        """Point of the half-line nearest to `point`; the origin when `point` is behind it."""
        along = (np.asarray(point, dtype=float) - self.origin) @ self.direction
        return self.origin + max(along, 0.0) * self.direction


def camera_center(camera):
    """Camera center in world coordinates, -R^T t."""
    return -camera.rotation.T @ camera.translation


def projection_matrix(camera):
    """3x4 matrix K [R | t]."""
    return camera.intrinsics @ np.hstack([camera.rotation, camera.translation[:, None]])


def to_camera_frame(points, camera):
    """
    Map world points (N, 3) or (3,) into the camera frame.
    """
    points = np.asarray(points, dtype=float)
    return points @ camera.rotation.T + camera.translation


def project(point, camera):
    """
    Project one world point onto the image plane.

    Parameters:
    - point (3-vector): world position, mm
    - camera (CameraParams): the camera to project into

    Returns:
    - np.ndarray: pixel (x, y); returned even when outside the image bounds

    Throws:
    - DegenerateDepth: if the camera-frame depth is <= 1e-6 mm
    """
    local = to_camera_frame(point, camera)
    if local[2] <= MIN_DEPTH:
        raise DegenerateDepth(
            f"Point {np.asarray(point).tolist()} has depth {local[2]:.3g} mm in camera {camera.id}"
        )
    homogeneous = camera.intrinsics @ local
    return homogeneous[:2] / homogeneous[2]


def project_many(points, camera):
    """
    Vectorized projection that never raises.

    Returns:
    - pixels (N, 2): NaN rows where the point is not in front of the camera
    - depths (N,): camera-frame depths, mm
    """
    local = to_camera_frame(np.atleast_2d(points), camera)
    depths = local[:, 2]
    homogeneous = local @ camera.intrinsics.T
    pixels = np.full((len(local), 2), np.nan)
    in_front = depths > MIN_DEPTH
    pixels[in_front] = homogeneous[in_front, :2] / homogeneous[in_front, 2:3]
    return pixels, depths


def back_project_ray(pixel, camera):
    """
    Ray of all world points imaged at `pixel`.

    Parameters:
    - pixel (2-vector): continuous pixel coordinates
    - camera (CameraParams): a valid camera

    Returns:
    - Ray3D: origin at the camera center, unit direction in world coordinates
    """
    homogeneous = np.array([pixel[0], pixel[1], 1.0])
    direction = camera.rotation.T @ np.linalg.solve(camera.intrinsics, homogeneous)
    direction /= np.linalg.norm(direction)
    direction.flags.writeable = False
    origin = camera_center(camera)
    origin.flags.writeable = False
    return Ray3D(origin=origin, direction=direction)


def make_camera(camera_id, focal, principal, rotation, translation, image_dims):
    """
    Build a camera from scalar focal length(s) and principal point.
    """
    fx, fy = (focal, focal) if np.isscalar(focal) else focal
    intrinsics = np.array(
        [[fx, 0.0, principal[0]], [0.0, fy, principal[1]], [0.0, 0.0, 1.0]]
    )
    return CameraParams(
        intrinsics=intrinsics,
        rotation=rotation,
        translation=translation,
        image_dims=image_dims,
        id=camera_id,
    )

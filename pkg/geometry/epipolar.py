"""
Fundamental matrices and epipolar lines between calibrated views.
"""

from dataclasses import dataclass
import numpy as np
from utils.errors import CoincidentCameras, DegenerateLine
from .camera import camera_center

MIN_BASELINE = 1e-6


def skew(vector):
    """Cross-product matrix [v]_x."""
    return np.array(
        [
            [0.0, -vector[2], vector[1]],
            [vector[2], 0.0, -vector[0]],
            [-vector[1], vector[0], 0.0],
        ]
    )


@dataclass(frozen=True)
class EpipolarLine:
    """
    Line a*x + b*y + c = 0 in target-view pixels, normalized so a^2 + b^2 = 1.
    """

    a: float
    b: float
    c: float

    @property
    def coefficients(self):
        return np.array([self.a, self.b, self.c])

    def distance(self, pixel):
        """Point-line distance in pixels."""
        return abs(self.a * pixel[0] + self.b * pixel[1] + self.c)


def fundamental_matrix(cam_u, cam_v):
    """
    Fundamental matrix F with y_v^T F y_u = 0 for corresponding homogeneous pixels.

    F is scaled to unit Frobenius norm, so F(v, u) equals F(u, v)^T exactly up to rounding.

    Throws:
    - CoincidentCameras: if the baseline is <= 1e-6 mm
    """
    baseline = np.linalg.norm(camera_center(cam_u) - camera_center(cam_v))
    if baseline <= MIN_BASELINE:
        raise CoincidentCameras(
            f"Cameras {cam_u.id} and {cam_v.id} share a center (baseline {baseline:.3g} mm)"
        )

    relative_rotation = cam_v.rotation @ cam_u.rotation.T
    relative_translation = cam_v.translation - relative_rotation @ cam_u.translation
    essential = skew(relative_translation) @ relative_rotation
    fundamental = (
        np.linalg.inv(cam_v.intrinsics).T @ essential @ np.linalg.inv(cam_u.intrinsics)
    )
    return fundamental / np.linalg.norm(fundamental)


def epipolar_lines(pixels_u, fundamental):
    """
    Normalized epipolar lines for many view-u pixels at once.

    Parameters:
    - pixels_u (N, 2): pixels in view u
    - fundamental (3x3): F(u, v)

    Returns:
    - lines (N, 3): (a, b, c) rows with a^2 + b^2 = 1, NaN where undefined
    - valid (N,): False for pixels at the epipole
    """
    pixels_u = np.atleast_2d(pixels_u)
    homogeneous = np.hstack([pixels_u, np.ones((len(pixels_u), 1))])
    lines = homogeneous @ fundamental.T
    norms = np.hypot(lines[:, 0], lines[:, 1])
    valid = norms > 1e-12 * np.linalg.norm(homogeneous, axis=1) * np.linalg.norm(fundamental)
    normalized = np.full_like(lines, np.nan)
    normalized[valid] = lines[valid] / norms[valid, None]
    return normalized, valid


def epipolar_line(pixel_u, cam_u, cam_v):
    """
    Epipolar line in view v of a pixel in view u.

    Throws:
    - CoincidentCameras: propagated from fundamental_matrix
    - DegenerateLine: if the pixel is the epipole of view v in view u
    """
    lines, valid = epipolar_lines(
        np.asarray(pixel_u, dtype=float)[None, :], fundamental_matrix(cam_u, cam_v)
    )
    if not valid[0]:
        raise DegenerateLine(f"Pixel {list(pixel_u)} is the epipole of {cam_v.id} in {cam_u.id}")
    a, b, c = lines[0]
    return EpipolarLine(float(a), float(b), float(c))


def point_line_distances(pixels, lines):
    """
    Distances between every line (L, 3) and every pixel (P, 2), shape (L, P).
    """
    pixels = np.atleast_2d(pixels)
    return np.abs(lines[:, :2] @ pixels.T + lines[:, 2:3])

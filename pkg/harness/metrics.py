"""
Evaluation metrics: 3D joint error, 2D joint detection rate, and the per-scene
pixel-quantization floor.
"""

from dataclasses import dataclass, field
import numpy as np
from geometry.camera import to_camera_frame
from utils.errors import ConfigError, JointCountMismatch

HEAD_SEGMENT = ("head", "head_top")
JDR_HEAD_FRACTION = 0.5


def per_joint_errors(estimated, truth):
    """
    Euclidean error per joint, mm, without any alignment.

    Throws:
    - JointCountMismatch: poses of different sizes
    """
    if estimated.num_joints != truth.num_joints:
        raise JointCountMismatch(
            f"Estimated pose has {estimated.num_joints} joints, truth has {truth.num_joints}"
        )
    return np.linalg.norm(estimated.positions - truth.positions, axis=1)


def mpjpe(estimated, truth):
    """Mean per-joint position error, mm."""
    return float(per_joint_errors(estimated, truth).mean())


def detection_hits(estimated, truth, threshold):
    """
    Boolean hit mask of 2D detections.

    Parameters:
    - estimated (..., M, 2): detected pixels
    - truth (..., M, 2): true pixels, NaN where the joint is not visible
    - threshold (float or array broadcastable to the leading dims): px

    Returns:
    - hits, valid: boolean arrays of shape (..., M); hits are strict `error < threshold`
    """
    estimated = np.asarray(estimated, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimated.shape != truth.shape:
        raise JointCountMismatch(f"Detections {estimated.shape} vs truth {truth.shape}")
    threshold = np.asarray(threshold, dtype=float)
    if threshold.ndim:
        threshold = threshold.reshape(threshold.shape + (1,) * (truth.ndim - 1 - threshold.ndim))
    valid = np.all(np.isfinite(truth), axis=-1)
    errors = np.linalg.norm(np.where(valid[..., None], estimated - truth, np.inf), axis=-1)
    return valid & (errors < threshold), valid


def jdr(estimated, truth, threshold):
    """
    Joint detection rate per joint, percent.

    The leading axes (frames, views, ...) are pooled; entries whose true projection is
    NaN are ignored. A joint with no valid entry reports NaN.

    Returns:
    - np.ndarray (M,): percent of detections within `threshold`
    """
    hits, valid = detection_hits(estimated, truth, threshold)
    axes = tuple(range(hits.ndim - 1))
    counted = valid.sum(axis=axes)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counted > 0, 100.0 * hits.sum(axis=axes) / counted, np.nan)


def head_threshold(projections, graph, fraction=JDR_HEAD_FRACTION):
    """
    Per-frame JDR threshold: `fraction` of the projected head segment length, averaged
    over the views that see both of its ends.

    This stands in for the annotated head size of real datasets.

    Throws:
    - ConfigError: the body model has no head segment
    """
    try:
        head, top = (graph.index(name) for name in HEAD_SEGMENT)
    except ConfigError as e:
        raise ConfigError("The body model has no head segment; configure a fixed JDR threshold") from e
    lengths = np.linalg.norm(projections[:, head] - projections[:, top], axis=-1)
    lengths = lengths[np.isfinite(lengths)]
    if lengths.size == 0:
        return 0.0
    return float(fraction * lengths.mean())


def pixel_quantization_floor(pose, cameras, stride):
    """
    3D error a half-cell detection error induces at the pose's depth:
    the mean over joints and views of (stride / 2) * depth / focal, mm.
    """
    floors = []
    for camera in cameras:
        depths = to_camera_frame(pose.positions, camera)[:, 2]
        floors.append((stride / 2.0) * depths / camera.focal)
    return float(np.mean(floors))


@dataclass
class EvalReport:
    """
    Aggregated evaluation of one method over a corpus.

    Fields:
    - method (str): row label, e.g. "fusion-rpsm-T10"
    - joint_names (list of str)
    - per_joint_mpjpe (np.ndarray): mm, mean over frames
    - per_joint_jdr (np.ndarray): percent, NaN for joints never visible
    - occluded_jdr (np.ndarray): percent over (view, joint) maps hidden by peak-drop
    - stage_mpjpe (list of float): mean MPJPE after every reported stage
    - stage_ms (list of float): mean wall-clock per stage
    - frames (int): frames evaluated
    - config (dict): echo of the benchmark settings
    """

    method: str
    joint_names: list
    per_joint_mpjpe: np.ndarray
    per_joint_jdr: np.ndarray
    occluded_jdr: np.ndarray
    stage_mpjpe: list = field(default_factory=list)
    stage_ms: list = field(default_factory=list)
    frames: int = 0
    config: dict = field(default_factory=dict)

    @property
    def mpjpe(self):
        return float(np.mean(self.per_joint_mpjpe))

    @property
    def jdr(self):
        finite = self.per_joint_jdr[np.isfinite(self.per_joint_jdr)]
        return float(finite.mean()) if finite.size else None

    def as_dict(self, include_timings=False):
        def by_joint(values):
            return {
                name: None if not np.isfinite(value) else float(value)
                for name, value in zip(self.joint_names, values)
            }

        document = {
            "method": self.method,
            "frames": self.frames,
            "mpjpe": self.mpjpe,
            "per_joint_mpjpe": by_joint(self.per_joint_mpjpe),
            "jdr": self.jdr,
            "per_joint_jdr": by_joint(self.per_joint_jdr),
            "occluded_jdr": by_joint(self.occluded_jdr),
            "stage_mpjpe": [float(value) for value in self.stage_mpjpe],
        }
        if include_timings:
            document["stage_ms"] = [float(value) for value in self.stage_ms]
        return document

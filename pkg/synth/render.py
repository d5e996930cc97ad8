"""
Multi-view heatmap rendering with controllable noise, occlusion, and distractors.
"""

from dataclasses import dataclass
import numpy as np
from config import HEATMAP_STRIDE
from geometry.camera import project
from heatmap.heatmap import HeatmapSet, gaussian_maps
from utils.errors import ConfigError, DegenerateDepth
from utils.logging import configure_logging

logger = configure_logging(__name__)

DISTRACTOR_MODES = ("random", "symmetric")


@dataclass(frozen=True)
class NoiseModel:
    """
    Fields:
    - jitter_sigma (float): Gaussian jitter of rendered centers, px
    - drop_prob (float): chance a (view, joint) map is zeroed (simulated occlusion)
    - distractor_prob (float): chance a spurious Gaussian is added to a map
    - distractor_amplitude (float): peak value of the spurious Gaussian
    - distractor_mode (str): "random" places it anywhere in the image, "symmetric" on
      the left/right counterpart joint's projection
    - drop_joints (tuple of str): joint names peak-drop applies to; None means all
    - seed (int): randomness source
    """

    jitter_sigma: float = 0.0
    drop_prob: float = 0.0
    distractor_prob: float = 0.0
    distractor_amplitude: float = 1.0
    distractor_mode: str = "random"
    drop_joints: tuple = None
    seed: int = 0

    def __post_init__(self):
        if self.jitter_sigma < 0:
            raise ConfigError("Jitter sigma must be non-negative")
        for name in ("drop_prob", "distractor_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.distractor_mode not in DISTRACTOR_MODES:
            raise ConfigError(f"distractor_mode must be one of {DISTRACTOR_MODES}")
        if self.drop_joints is not None:
            object.__setattr__(self, "drop_joints", tuple(self.drop_joints))

    def as_dict(self):
        return {
            "jitter_sigma": self.jitter_sigma,
            "drop_prob": self.drop_prob,
            "distractor_prob": self.distractor_prob,
            "distractor_amplitude": self.distractor_amplitude,
            "distractor_mode": self.distractor_mode,
            "drop_joints": list(self.drop_joints) if self.drop_joints is not None else None,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class SceneTruth:
    """
    Ground truth of one rendered frame.

    Fields:
    - pose (Pose3D): true 3D pose
    - projections (V, M, 2): unjittered projections, NaN behind a camera
    - occluded (V, M): maps zeroed by peak-drop
    - distracted (V, M): maps carrying a spurious peak
    """

    pose: object
    projections: np.ndarray
    occluded: np.ndarray
    distracted: np.ndarray


def true_projections(pose, cameras):
    projections = np.full((len(cameras), pose.num_joints, 2), np.nan)
    for view, camera in enumerate(cameras):
        for joint, position in enumerate(pose.positions):
            try:
                projections[view, joint] = project(position, camera)
            except DegenerateDepth:
                logger.debug("Joint %d is behind camera %s", joint, camera.id)
    return projections


def render_views(pose, cameras, sigma, noise, stride=HEATMAP_STRIDE, graph=None):
    """
    Render noisy per-view heatmaps of a pose.

    Per (view, joint), in that order: jitter the true projection, render a Gaussian,
    zero it with probability drop_prob, then add a distractor with probability
    distractor_prob. Every random number is drawn whether or not it is used, so each
    noise source is independent of the others' settings.

    Parameters:
    - pose (Pose3D): true pose
    - cameras (list of CameraParams): the rig
    - sigma (float): Gaussian sigma, image pixels
    - noise (NoiseModel): noise parameters and seed
    - stride (int): image pixels per heatmap cell
    - graph (BodyGraph): needed when noise names joints or mirrors them

    Returns:
    - tuple: (HeatmapSet, SceneTruth)
    """
    rng = np.random.default_rng(noise.seed)
    views, joints = len(cameras), pose.num_joints
    dims = (cameras[0].height // stride, cameras[0].width // stride)
    if any((camera.height // stride, camera.width // stride) != dims for camera in cameras):
        raise ConfigError("Every camera of a rig must share the same image size")

    droppable = np.ones(joints, dtype=bool)
    if noise.drop_joints is not None:
        if graph is None:
            raise ConfigError("drop_joints needs a body graph")
        droppable[:] = False
        droppable[[graph.index(name) for name in noise.drop_joints]] = True
    counterparts = graph.counterparts() if graph is not None else list(range(joints))

    projections = true_projections(pose, cameras)
    values = np.zeros((views, joints) + dims, dtype=np.float32)
    occluded = np.zeros((views, joints), dtype=bool)
    distracted = np.zeros((views, joints), dtype=bool)

    for view, camera in enumerate(cameras):
        for joint in range(joints):
            jitter = rng.normal(0.0, 1.0, 2) * noise.jitter_sigma
            drop_draw, distractor_draw = rng.uniform(size=2)
            random_location = rng.uniform(size=2) * (camera.width, camera.height)

            center = projections[view, joint] + jitter
            heatmap = gaussian_maps(center, sigma, dims, stride)[0]
            if droppable[joint] and drop_draw < noise.drop_prob:
                heatmap[:] = 0.0
                occluded[view, joint] = True
            if distractor_draw < noise.distractor_prob:
                if noise.distractor_mode == "symmetric":
                    location = projections[view, counterparts[joint]]
                else:
                    location = random_location
                heatmap += noise.distractor_amplitude * gaussian_maps(location, sigma, dims, stride)[0]
                distracted[view, joint] = True
            values[view, joint] = heatmap

    truth = SceneTruth(
        pose=pose, projections=projections, occluded=occluded, distracted=distracted
    )
    return HeatmapSet(values=values, cameras=cameras, stride=stride), truth

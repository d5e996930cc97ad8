"""
Random articulated poses consistent with the limb-length priors.
"""

import numpy as np
from scipy.spatial.transform import Rotation
from config import RIG_TARGET
from inference.pose import Pose3D

# Rest direction of each limb (parent -> joint) for a body facing +y, z up,
# and the largest deviation from it, in degrees
LIMB_DIRECTIONS = {
    "right_hip": ((-1.0, 0.0, 0.0), 15.0),
    "left_hip": ((1.0, 0.0, 0.0), 15.0),
    "right_knee": ((0.0, 0.0, -1.0), 30.0),
    "left_knee": ((0.0, 0.0, -1.0), 30.0),
    "right_ankle": ((0.0, 0.0, -1.0), 30.0),
    "left_ankle": ((0.0, 0.0, -1.0), 30.0),
    "spine": ((0.0, 0.0, 1.0), 20.0),
    "neck": ((0.0, 0.0, 1.0), 15.0),
    "head": ((0.0, 0.3, 1.0), 20.0),
    "head_top": ((0.0, 0.0, 1.0), 20.0),
    "right_shoulder": ((-1.0, 0.0, 0.2), 15.0),
    "left_shoulder": ((1.0, 0.0, 0.2), 15.0),
    "right_elbow": ((-0.3, 0.0, -1.0), 60.0),
    "left_elbow": ((0.3, 0.0, -1.0), 60.0),
    "right_wrist": ((0.0, 0.5, -1.0), 60.0),
    "left_wrist": ((0.0, 0.5, -1.0), 60.0),
}
DEFAULT_CONE = 30.0
ROOT_JITTER = 100.0


def _cone_direction(axis, max_angle_deg, rng):
    """Unit vector within `max_angle_deg` of `axis`."""
    axis = np.asarray(axis, dtype=float)
    axis /= np.linalg.norm(axis)
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    perpendicular = np.cross(axis, helper)
    perpendicular /= np.linalg.norm(perpendicular)
    tilt = rng.uniform(0.0, np.radians(max_angle_deg))
    azimuth = rng.uniform(0.0, 2 * np.pi)
    tilt_axis = Rotation.from_rotvec(axis * azimuth).apply(perpendicular)
    return Rotation.from_rotvec(tilt_axis * tilt).apply(axis)


def sample_pose(priors, graph, seed, target=RIG_TARGET):
    """
    Draw a pose whose every limb satisfies the limb-length prior.

    The root lands within +-100 mm (horizontally) of `target`; each limb length is
    uniform in [l - eps/2, l + eps/2] and its direction stays within a per-limb cone
    around a rest direction; the whole body is rotated by a random yaw.

    Parameters:
    - priors (LimbPriors): mean limb lengths and tolerance
    - graph (BodyGraph): tree to sample
    - seed (int or np.random.Generator): randomness source

    Returns:
    - Pose3D
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    yaw = Rotation.from_euler("z", rng.uniform(0.0, 2 * np.pi))
    root = np.asarray(target, dtype=float) + np.append(rng.uniform(-ROOT_JITTER, ROOT_JITTER, 2), 0.0)

    positions = np.zeros((graph.num_joints, 3))
    positions[graph.root] = root
    parents = graph.parents()
    edge_index = graph.edge_index()
    directions = {graph.root: np.array([0.0, 0.0, 1.0])}
    half_tolerance = priors.tolerance / 2

    for joint in graph.traversal_order():
        parent = parents[joint]
        if parent < 0:
            continue
        length_prior = priors.lengths[edge_index[joint]]
        length = rng.uniform(max(length_prior - half_tolerance, 0.0), length_prior + half_tolerance)
        rest, cone = LIMB_DIRECTIONS.get(graph.joint_names[joint], (directions[parent], DEFAULT_CONE))
        directions[joint] = _cone_direction(rest, cone, rng)
        positions[joint] = positions[parent] + length * yaw.apply(directions[joint])

    return Pose3D(positions=positions)

"""
Body graph and limb-length priors.

The default model is a 17-joint tree rooted at the pelvis with 16 limbs. A JSON body
model file can replace it:

    {"root": "pelvis", "epsilon": 150.0,
     "joints": [{"name": "pelvis", "parent": null},
                {"name": "right_hip", "parent": "pelvis", "limb_length": 130.0}, ...]}
"""

from collections import deque
from dataclasses import dataclass
import json
import numpy as np
from config import BODY_MODEL_PATH, LIMB_TOLERANCE
from utils.errors import ConfigError
from utils.logging import configure_logging

logger = configure_logging(__name__)

# (joint, parent, mean limb length in mm); the root has no parent
DEFAULT_SKELETON = [
    ("pelvis", None, None),
    ("right_hip", "pelvis", 130.0),
    ("right_knee", "right_hip", 450.0),
    ("right_ankle", "right_knee", 440.0),
    ("left_hip", "pelvis", 130.0),
    ("left_knee", "left_hip", 450.0),
    ("left_ankle", "left_knee", 440.0),
    ("spine", "pelvis", 230.0),
    ("neck", "spine", 250.0),
    ("head", "neck", 120.0),
    ("head_top", "head", 115.0),
    ("left_shoulder", "neck", 150.0),
    ("left_elbow", "left_shoulder", 280.0),
    ("left_wrist", "left_elbow", 250.0),
    ("right_shoulder", "neck", 150.0),
    ("right_elbow", "right_shoulder", 280.0),
    ("right_wrist", "right_elbow", 250.0),
]


@dataclass(frozen=True)
class BodyGraph:
    """
    Tree over M joints. `edges` are (parent, child) index pairs oriented away from the root.
    """

    joint_names: tuple
    edges: tuple
    root: int

    def __post_init__(self):
        names = tuple(self.joint_names)
        object.__setattr__(self, "joint_names", names)
        count = len(names)
        if count < 1:
            raise ConfigError("Body graph needs at least one joint")
        if len(set(names)) != count:
            raise ConfigError("Joint names must be unique")
        if not 0 <= self.root < count:
            raise ConfigError(f"Root index {self.root} out of range")
        if len(self.edges) != count - 1:
            raise ConfigError(f"A tree over {count} joints needs {count - 1} edges, got {len(self.edges)}")

        neighbours = {joint: [] for joint in range(count)}
        for m, n in self.edges:
            if not (0 <= m < count and 0 <= n < count) or m == n:
                raise ConfigError(f"Invalid edge ({m}, {n})")
            neighbours[m].append(n)
            neighbours[n].append(m)

        # Orient every edge away from the root; a tree with M-1 edges is connected iff acyclic
        oriented, seen, queue = [], {self.root}, deque([self.root])
        while queue:
            joint = queue.popleft()
            for other in neighbours[joint]:
                if other not in seen:
                    seen.add(other)
                    oriented.append((joint, other))
                    queue.append(other)
        if len(seen) != count:
            raise ConfigError("Body graph is not connected")

        # Keep the caller's edge order, flipping edges that point toward the root
        parent_of = {child: parent for parent, child in oriented}
        edges = tuple((parent_of[n], n) if parent_of.get(n) == m else (parent_of[m], m) for m, n in self.edges)
        object.__setattr__(self, "edges", edges)

    @property
    def num_joints(self):
        return len(self.joint_names)

    def index(self, name):
        try:
            return self.joint_names.index(name)
        except ValueError as e:
            raise ConfigError(f"Unknown joint `{name}`") from e

    def parents(self):
        """Parent index per joint, -1 for the root."""
        parents = [-1] * self.num_joints
        for parent, child in self.edges:
            parents[child] = parent
        return parents

    def children(self):
        children = {joint: [] for joint in range(self.num_joints)}
        for parent, child in self.edges:
            children[parent].append(child)
        return children

    def traversal_order(self):
        """Breadth-first joint order starting at the root."""
        children = self.children()
        order, queue = [], deque([self.root])
        while queue:
            joint = queue.popleft()
            order.append(joint)
            queue.extend(children[joint])
        return order

    def edge_index(self):
        """Map child joint -> index of the edge connecting it to its parent."""
        return {child: index for index, (_, child) in enumerate(self.edges)}

    def counterparts(self):
        """Index of the left/right mirror joint, or the joint itself when it has none."""
        mirrored = []
        for name in self.joint_names:
            if name.startswith("left_"):
                other = "right_" + name[len("left_") :]
            elif name.startswith("right_"):
                other = "left_" + name[len("right_") :]
            else:
                other = name
            mirrored.append(self.joint_names.index(other) if other in self.joint_names else self.joint_names.index(name))
        return mirrored


@dataclass(frozen=True)
class LimbPriors:
    """
    Mean limb length (mm) per graph edge, in `BodyGraph.edges` order, and tolerance epsilon.
    """

    lengths: tuple
    tolerance: float = LIMB_TOLERANCE

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(length) for length in self.lengths))
        if any(length <= 0 for length in self.lengths):
            raise ConfigError("Limb lengths must be positive")
        if self.tolerance < 0:
            raise ConfigError("Limb tolerance must be non-negative")

    def bounds(self, edge):
        """(low, high) allowed limb length of an edge, low clipped at 0."""
        length = self.lengths[edge]
        return max(length - self.tolerance, 0.0), length + self.tolerance

    def with_tolerance(self, tolerance):
        return LimbPriors(lengths=self.lengths, tolerance=tolerance)


def body_from_skeleton(skeleton, tolerance=LIMB_TOLERANCE):
    """
    Build (BodyGraph, LimbPriors) from (name, parent name, limb length) rows.
    """
    names = [name for name, _, _ in skeleton]
    roots = [name for name, parent, _ in skeleton if parent is None]
    if len(roots) != 1:
        raise ConfigError(f"Body model needs exactly one root, found {roots}")
    edges, lengths = [], []
    for name, parent, length in skeleton:
        if parent is None:
            continue
        if parent not in names:
            raise ConfigError(f"Joint `{name}` has unknown parent `{parent}`")
        if length is None:
            raise ConfigError(f"Joint `{name}` is missing a limb length")
        edges.append((names.index(parent), names.index(name)))
        lengths.append(length)
    graph = BodyGraph(joint_names=tuple(names), edges=tuple(edges), root=names.index(roots[0]))
    return graph, LimbPriors(lengths=tuple(lengths), tolerance=tolerance)


def default_body_model():
    """The built-in 17-joint model, or the file named by BODY_MODEL_PATH."""
    if BODY_MODEL_PATH:
        return load_body_model(BODY_MODEL_PATH)
    return body_from_skeleton(DEFAULT_SKELETON)


def load_body_model(path):
    """
    Read a JSON body model.

    Throws:
    - ConfigError: malformed model
    """
    with open(path, encoding="utf-8") as handle:
        document = json.load(handle)
    if "joints" not in document:
        raise ConfigError(f"{path}: missing `joints` list")
    skeleton = []
    for record in document["joints"]:
        if "name" not in record:
            raise ConfigError(f"{path}: joint record without a name")
        skeleton.append((record["name"], record.get("parent"), record.get("limb_length")))
    graph, priors = body_from_skeleton(skeleton, float(document.get("epsilon", LIMB_TOLERANCE)))
    if "root" in document and graph.joint_names[graph.root] != document["root"]:
        raise ConfigError(f"{path}: declared root `{document['root']}` has a parent")
    logger.debug("Loaded body model with %d joints from %s", graph.num_joints, path)
    return graph, priors


def save_body_model(graph, priors, path):
    parents = graph.parents()
    edge_index = graph.edge_index()
    joints = []
    for joint, name in enumerate(graph.joint_names):
        record = {"name": name, "parent": None}
        if parents[joint] >= 0:
            record["parent"] = graph.joint_names[parents[joint]]
            record["limb_length"] = priors.lengths[edge_index[joint]]
        joints.append(record)
    document = {
        "root": graph.joint_names[graph.root],
        "epsilon": priors.tolerance,
        "joints": joints,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=2)


def limb_priors_from_poses(graph, poses, tolerance=LIMB_TOLERANCE):
    """Mean limb lengths measured over a list of Pose3D."""
    lengths = np.zeros(len(graph.edges))
    for pose in poses:
        for edge, (parent, child) in enumerate(graph.edges):
            lengths[edge] += np.linalg.norm(pose.positions[parent] - pose.positions[child])
    return LimbPriors(lengths=tuple(lengths / len(poses)), tolerance=tolerance)

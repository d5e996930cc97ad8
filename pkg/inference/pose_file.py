"""
Pose output file.

A header of `# key: <json value>` lines followed by one line per joint:

    # method: "rpsm"
    # schedule: {"initial_edge_length": 2000.0, ...}
    # score: 0.0123
    pelvis 12.345678 -3.000000 1000.000000
"""

import json
from utils.errors import DataError
from .pose import Pose3D


def write_pose(path, pose, joint_names, metadata=None):
    if len(joint_names) != pose.num_joints:
        raise DataError(f"{len(joint_names)} names for a {pose.num_joints}-joint pose")
    lines = [f"# {key}: {json.dumps(value, sort_keys=True)}" for key, value in (metadata or {}).items()]
    for name, (x, y, z) in zip(joint_names, pose.positions):
        lines.append(f"{name} {x:.6f} {y:.6f} {z:.6f}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def read_pose(path):
    """
    Returns:
    - tuple: (Pose3D, joint names, metadata dict)

    Throws:
    - DataError: malformed lines
    """
    metadata, names, positions = {}, [], []
    with open(path, encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                try:
                    metadata[key.strip()] = json.loads(value)
                except json.JSONDecodeError as e:
                    raise DataError(f"{path}:{number}: bad header value") from e
                continue
            parts = line.split()
            if len(parts) != 4:
                raise DataError(f"{path}:{number}: expected `name x y z`")
            try:
                positions.append([float(value) for value in parts[1:]])
            except ValueError as e:
                raise DataError(f"{path}:{number}: non-numeric coordinate") from e
            names.append(parts[0])
    if not positions:
        raise DataError(f"{path}: no joints")
    return Pose3D(positions=positions), names, metadata

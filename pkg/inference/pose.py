"""
3D pose container.
"""

from dataclasses import dataclass
import numpy as np
from utils.errors import DataError


@dataclass(frozen=True, eq=False)
class Pose3D:
    """
    M joint positions (mm, world frame) with optional per-joint confidence.
    """

    positions: np.ndarray
    confidence: np.ndarray = None

    def __post_init__(self):
        positions = np.array(self.positions, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(positions)):
            raise DataError("Pose coordinates must be finite")
        positions.flags.writeable = False
        object.__setattr__(self, "positions", positions)
        if self.confidence is not None:
            confidence = np.array(self.confidence, dtype=float).reshape(-1)
            if len(confidence) != len(positions):
                raise DataError("Pose confidence needs one value per joint")
            confidence.flags.writeable = False
            object.__setattr__(self, "confidence", confidence)

    @property
    def num_joints(self):
        return len(self.positions)

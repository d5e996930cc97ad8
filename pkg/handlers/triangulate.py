"""
Structure-free baseline: per-joint triangulation of heatmap peaks.
"""

import time
from inference.baseline import triangulate_pose
from utils.logging import configure_logging
from .base import MethodOutcome, ReconstructionHandler

logger = configure_logging(__name__)


class TriangulationHandler(ReconstructionHandler):
    """
    Bound to method key `triangulate`. Ignores the limb priors.
    """

    def reconstruct(self, heatmap_set, graph, priors):
        started = time.perf_counter()
        pose = triangulate_pose(heatmap_set)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        logger.debug("Triangulated %d joints in %.1f ms", pose.num_joints, elapsed_ms)
        return MethodOutcome(pose=pose, stage_poses=[pose], stage_ms=[elapsed_ms])

    def metadata(self):
        return {"method": "triangulate"}

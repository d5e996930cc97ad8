"""
Module for base classes for reconstruction handlers.
"""

from dataclasses import dataclass, field


@dataclass(frozen=True, eq=False)
class MethodOutcome:
    """
    What a handler produced for one frame.

    Fields:
    - pose (Pose3D): final estimate
    - stage_poses (list of Pose3D): estimate after every stage; the last equals `pose`
    - stage_ms (list of float): wall-clock per stage
    - feasible (bool): False when any stage fell back to the unary argmax
    - score (float): posterior score of the final stage, None for methods without one
    """

    pose: object
    stage_poses: list = field(default_factory=list)
    stage_ms: list = field(default_factory=list)
    feasible: bool = True
    score: float = None


class ReconstructionHandler:
    """
    Base class for 3D reconstruction methods.
    """

    def reconstruct(self, heatmap_set, graph, priors):
        """
        Logic to turn one frame's multi-view heatmaps into a 3D pose.

        Parameters:
        - heatmap_set (HeatmapSet): detected or fused heatmaps with their cameras
        - graph (BodyGraph): body tree
        - priors (LimbPriors): limb-length priors

        Returns:
        - MethodOutcome
        """
        raise NotImplementedError("This method should be implemented by subclasses.")

    def metadata(self):
        """Settings echoed into pose files and reports."""
        return {"method": type(self).__name__}

"""
Pictorial structure handlers: plain PSM (no refinement) and recursive PSM.
"""

from dataclasses import replace
from config import (
    RPSM_INITIAL_BINS,
    RPSM_INITIAL_EDGE_LENGTH,
    RPSM_ITERATIONS,
    RPSM_REFINE_BINS,
)
from inference.grid import RefinementSchedule
from inference.rpsm import rpsm_reconstruct
from utils.logging import configure_logging
from .base import MethodOutcome, ReconstructionHandler

logger = configure_logging(__name__)


class PictorialHandler(ReconstructionHandler):
    """
    Bound to method keys `psm` (iterations = 0) and `rpsm`.

    Parameters:
    - schedule (RefinementSchedule): grid sizes and iteration count
    """

    def __init__(self, schedule=None):
        self.schedule = schedule or RefinementSchedule(
            initial_edge_length=RPSM_INITIAL_EDGE_LENGTH,
            initial_bins=RPSM_INITIAL_BINS,
            refine_bins=RPSM_REFINE_BINS,
            iterations=RPSM_ITERATIONS,
        )

    def with_iterations(self, iterations):
        return PictorialHandler(replace(self.schedule, iterations=iterations))

    def reconstruct(self, heatmap_set, graph, priors):
        reconstruction = rpsm_reconstruct(heatmap_set, None, graph, priors, self.schedule)
        final = reconstruction.stages[-1].result
        logger.debug(
            "Pictorial structure run with %d refinements, final score %.4g",
            self.schedule.iterations,
            final.score,
        )
        return MethodOutcome(
            pose=reconstruction.pose,
            stage_poses=reconstruction.stage_poses,
            stage_ms=[stage.elapsed_ms for stage in reconstruction.stages],
            feasible=all(stage.result.feasible for stage in reconstruction.stages),
            score=final.score,
        )

    def metadata(self):
        return {
            "method": "rpsm" if self.schedule.iterations else "psm",
            "schedule": self.schedule.as_dict(),
        }

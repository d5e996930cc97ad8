"""
Recursive pictorial structure model.

Stage 0 is the plain pictorial structure model on one shared grid around the
triangulated root (or the centroid of the triangulated joints when fewer than two
views see the root). Every later stage gives each joint a small grid centered at its
previous estimate, with edge length equal to one bin of the previous stage, and runs
joint inference over all joints again.
"""

from dataclasses import dataclass, field
import time
from utils.logging import configure_logging
from .baseline import locate_root
from .grid import build_grid
from .potentials import unary_potentials
from .psm import psm_infer

logger = configure_logging(__name__)


@dataclass(frozen=True, eq=False)
class StageResult:
    stage: int
    edge_length: float
    result: object  # PSMResult
    grids: tuple
    elapsed_ms: float

    @property
    def pose(self):
        return self.result.pose


@dataclass(frozen=True, eq=False)
class Reconstruction:
    """
    Final pose plus every stage's estimate; `stages[0]` is the pictorial structure model.
    """

    root: object
    stages: list = field(default_factory=list)

    @property
    def pose(self):
        return self.stages[-1].pose

    @property
    def stage_poses(self):
        return [stage.pose for stage in self.stages]


def _run_stage(stage, edge_length, grids, heatmap_set, cameras, graph, priors):
    started = time.perf_counter()
    unaries = unary_potentials(grids, heatmap_set, cameras)
    result = psm_infer(graph, grids, unaries, priors)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    if not result.feasible:
        logger.warning("Stage %d is infeasible at edge length %.4g mm", stage, edge_length)
    return StageResult(
        stage=stage,
        edge_length=edge_length,
        result=result,
        grids=tuple(grids),
        elapsed_ms=elapsed_ms,
    )


def rpsm_reconstruct(heatmap_set, cameras, graph, priors, schedule):
    """
    Reconstruct a 3D pose by recursive pictorial structure inference.

    Parameters:
    - heatmap_set (HeatmapSet): multi-view heatmaps
    - cameras (list of CameraParams): defaults to the set's cameras when None
    - graph (BodyGraph), priors (LimbPriors): body model
    - schedule (RefinementSchedule): grid sizes and iteration count T

    Returns:
    - Reconstruction: T + 1 stage results; with T = 0 it is the plain PSM estimate
    """
    cameras = heatmap_set.cameras if cameras is None else cameras
    root = locate_root(heatmap_set, cameras, graph.root)

    edge_length = schedule.edge_length(0)
    shared = build_grid(root, edge_length, schedule.initial_bins)
    stages = [
        _run_stage(0, edge_length, [shared] * graph.num_joints, heatmap_set, cameras, graph, priors)
    ]

    for stage in range(1, schedule.iterations + 1):
        edge_length = schedule.edge_length(stage)
        previous = stages[-1].pose.positions
        grids = [
            build_grid(previous[joint], edge_length, schedule.refine_bins)
            for joint in range(graph.num_joints)
        ]
        stages.append(_run_stage(stage, edge_length, grids, heatmap_set, cameras, graph, priors))

    logger.debug(
        "RPSM finished %d stages: %s ms",
        len(stages),
        ", ".join(f"{stage.elapsed_ms:.1f}" for stage in stages),
    )
    return Reconstruction(root=root, stages=stages)

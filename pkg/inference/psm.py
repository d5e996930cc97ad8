"""
Exact MAP inference of the pictorial structure model by max-product dynamic programming.

Messages run leaf-to-root in log space (a zero potential is -inf), the root takes its
argmax, and child states are recovered by backtracking. Every argmax breaks ties toward
the smallest bin index.
"""

from dataclasses import dataclass
import numpy as np
from scipy.spatial.distance import cdist
from config import DP_CHUNK_ELEMENTS
from utils.logging import configure_logging
from .pose import Pose3D
from .potentials import limb_bounds_squared

logger = configure_logging(__name__)


@dataclass(frozen=True, eq=False)
class PSMResult:
    """
    MAP pose of one inference call.

    Fields:
    - pose (Pose3D): bin centers of the chosen states
    - score (float): unnormalized posterior of the chosen states (0 when infeasible)
    - bins (tuple): chosen bin index per joint
    - feasible (bool): False when no configuration satisfies every limb constraint;
      the pose is then the per-joint unary argmax
    """

    pose: Pose3D
    score: float
    bins: tuple
    feasible: bool


def _max_message(parent_positions, child_positions, child_belief, bounds_squared):
    """
    For every parent state, the best child belief among limb-compatible child states.

    Child states are visited in (belief descending, index ascending) order, so the first
    compatible one is the tie-broken argmax.

    Returns:
    - message (n_parent,): -inf where no child state is compatible
    - best (n_parent,): chosen child state per parent state
    """
    low_sq, high_sq = bounds_squared
    order = np.lexsort((np.arange(len(child_belief)), -child_belief))
    sorted_positions = child_positions[order]
    sorted_belief = child_belief[order]

    message = np.full(len(parent_positions), -np.inf)
    best = np.zeros(len(parent_positions), dtype=np.int64)
    rows_per_block = max(1, DP_CHUNK_ELEMENTS // len(child_positions))
    for start in range(0, len(parent_positions), rows_per_block):
        stop = start + rows_per_block
        distance_squared = cdist(parent_positions[start:stop], sorted_positions, "sqeuclidean")
        allowed = (distance_squared >= low_sq) & (distance_squared <= high_sq)
        first = allowed.argmax(axis=1)
        found = allowed[np.arange(len(first)), first]
        message[start:stop] = np.where(found, sorted_belief[first], -np.inf)
        best[start:stop] = order[first]
    return message, best


def psm_infer(graph, grids, unaries, priors):
    """
    Exact MAP over the product of unaries and limb indicators on a tree.

    Parameters:
    - graph (BodyGraph): tree over M joints
    - grids (list of GridSpec): state space per joint
    - unaries (list of np.ndarray): (N^3,) table per joint
    - priors (LimbPriors): limb lengths and tolerance

    Returns:
    - PSMResult: flagged infeasible (score 0, unary-argmax pose) if every
      configuration violates some limb constraint
    """
    positions = [grid.centers() for grid in grids]
    with np.errstate(divide="ignore"):
        beliefs = [np.log(np.asarray(unary, dtype=float)) for unary in unaries]

    parents = graph.parents()
    edge_index = graph.edge_index()
    order = graph.traversal_order()
    best_child = {}
    for child in reversed(order):
        parent = parents[child]
        if parent < 0:
            continue
        low, high = priors.bounds(edge_index[child])
        message, best = _max_message(
            positions[parent], positions[child], beliefs[child], limb_bounds_squared(low, high)
        )
        beliefs[parent] = beliefs[parent] + message
        best_child[child] = best

    root_state = int(np.argmax(beliefs[graph.root]))
    log_score = beliefs[graph.root][root_state]

    if not np.isfinite(log_score):
        logger.warning("No pose satisfies every limb constraint; using per-joint unary argmax")
        bins = tuple(int(np.argmax(unary)) for unary in unaries)
        pose = Pose3D(positions=[positions[joint][state] for joint, state in enumerate(bins)])
        return PSMResult(pose=pose, score=0.0, bins=bins, feasible=False)

    bins = [0] * graph.num_joints
    bins[graph.root] = root_state
    for joint in order:
        if parents[joint] >= 0:
            bins[joint] = int(best_child[joint][bins[parents[joint]]])
    pose = Pose3D(
        positions=[positions[joint][state] for joint, state in enumerate(bins)],
        confidence=[unaries[joint][state] for joint, state in enumerate(bins)],
    )
    return PSMResult(pose=pose, score=float(np.exp(log_score)), bins=tuple(bins), feasible=True)

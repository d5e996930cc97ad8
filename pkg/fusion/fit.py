"""
Data-fitted fusion weights.

The fusion layer is linear in its weights, so fitting it to (input, target) heatmap
pairs is a ridge regression per target cell. Only entries on the geometric epipolar
support are fitted.
"""

import numpy as np
from scipy import linalg, sparse
from utils.errors import DataError, DimensionMismatch, SingularSystem
from utils.logging import configure_logging

logger = configure_logging(__name__)


def _training_matrices(pairs, target_id, source_id):
    """
    Stack every training pair and joint channel into sample rows.

    Returns:
    - residuals (S, cells): target minus detected map of the target view
    - sources (S, cells): detected map of the source view
    """
    residuals, sources = [], []
    for noisy, target in pairs:
        if noisy.values.shape != target.values.shape:
            raise DimensionMismatch(
                f"Training pair shapes differ: {noisy.values.shape} vs {target.values.shape}"
            )
        u = noisy.view_index(target_id)
        v = noisy.view_index(source_id)
        joints = noisy.num_joints
        detected = noisy.values[u].reshape(joints, -1).astype(float)
        residuals.append(target.values[u].reshape(joints, -1).astype(float) - detected)
        sources.append(noisy.values[v].reshape(joints, -1).astype(float))
    return np.vstack(residuals), np.vstack(sources)


def fit_fusion_weights(pairs, view_pair, ridge_lambda, support):
    """
    Least-squares fusion weights for one ordered view pair.

    Minimizes sum ||target - (input + w . source)||^2 + lambda ||w||^2 over the entries of
    `support`, independently for every target cell.

    Parameters:
    - pairs (list): (noisy HeatmapSet, target HeatmapSet) training pairs
    - view_pair (tuple): (target view id, source view id)
    - ridge_lambda (float): ridge strength, >= 0
    - support (FusionWeights): weights whose sparsity pattern is fitted

    Returns:
    - FusionWeights: same pattern as `support`, fitted values

    Throws:
    - SingularSystem: lambda is 0 and some row's normal matrix is singular
    """
    if not pairs:
        raise DataError("Fitting fusion weights needs at least one training pair")
    if ridge_lambda < 0:
        raise DataError("Ridge lambda must be non-negative")
    target_id, source_id = view_pair
    residuals, sources = _training_matrices(pairs, target_id, source_id)

    pattern = support.matrix
    if pattern.shape != (residuals.shape[1], sources.shape[1]):
        raise DimensionMismatch(
            f"Support shape {pattern.shape} does not match heatmap cells {residuals.shape[1]}"
        )

    fitted = np.zeros(pattern.nnz)
    for row in range(pattern.shape[0]):
        start, end = pattern.indptr[row], pattern.indptr[row + 1]
        if start == end:
            continue
        design = sources[:, pattern.indices[start:end]]
        if ridge_lambda == 0 and np.linalg.matrix_rank(design) < design.shape[1]:
            raise SingularSystem(
                f"Row {row}: normal matrix is singular ({design.shape[1]} unknowns, "
                f"rank {np.linalg.matrix_rank(design)}) and lambda is 0"
            )
        normal = design.T @ design + ridge_lambda * np.eye(design.shape[1])
        fitted[start:end] = linalg.solve(normal, design.T @ residuals[:, row], assume_a="sym")

    matrix = sparse.csr_matrix(
        (fitted, pattern.indices.copy(), pattern.indptr.copy()), shape=pattern.shape
    )
    logger.info(
        "Fitted %d fusion weights for %s <- %s from %d samples (lambda=%g)",
        pattern.nnz,
        target_id,
        source_id,
        residuals.shape[0],
        ridge_lambda,
    )
    return support.with_matrix(matrix)


def training_error(pairs, weights):
    """
    Squared error of `weights` on the training pairs for its ordered view pair.
    """
    residuals, sources = _training_matrices(pairs, weights.target, weights.source)
    predicted = (weights.matrix @ sources.T).T
    return float(np.sum((residuals - predicted) ** 2))

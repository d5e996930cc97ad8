import numpy as np
import pytest
from fusion.dump import load_weights, save_weights
from fusion.fit import fit_fusion_weights, training_error
from fusion.fuse import FusionMode, fuse_heatmaps, warped_heatmaps
from fusion.weights import build_epipolar_weights
from geometry.camera import project
from geometry.epipolar import epipolar_lines, fundamental_matrix, point_line_distances
from heatmap.heatmap import HeatmapSet, argmax_location, cell_pixels
from synth.rig import generate_rig
from utils.errors import MissingWeights, SingularSystem


def test_weights_are_row_normalized_on_the_epipolar_band(rig, coarse_weights):
    weights = coarse_weights[("cam0", "cam1")]
    assert weights.shape == (1600, 1600)
    row_sums = np.asarray(weights.matrix.sum(axis=1)).ravel()
    nonempty = np.diff(weights.matrix.indptr) > 0
    assert nonempty.sum() > 800
    np.testing.assert_allclose(row_sums[nonempty], 1.0, atol=1e-9)

    lines, _ = epipolar_lines(cell_pixels((40, 40), 8.0), fundamental_matrix(rig[0], rig[1]))
    coo = weights.matrix.tocoo()
    source_pixels = cell_pixels((40, 40), 8.0)[coo.col]
    distances = np.abs(np.sum(lines[coo.row, :2] * source_pixels, axis=1) + lines[coo.row, 2])
    assert distances.max() <= weights.threshold + 1e-9
    assert weights.threshold == pytest.approx(3 * 12.0)


def test_identity_fusion_copies(coarse_scene):
    heatmap_set, _ = coarse_scene
    fused = fuse_heatmaps(heatmap_set, {}, FusionMode.IDENTITY)
    assert fused is not heatmap_set
    np.testing.assert_array_equal(fused.values, heatmap_set.values)


def test_missing_weights(coarse_scene, coarse_weights):
    heatmap_set, _ = coarse_scene
    partial = dict(coarse_weights)
    del partial[("cam2", "cam3")]
    with pytest.raises(MissingWeights):
        fuse_heatmaps(heatmap_set, partial)


def test_fusion_recovers_an_occluded_view(coarse_scene, coarse_weights, body_model):
    graph, _ = body_model
    heatmap_set, truth = coarse_scene
    # ankles sit far below the camera plane, where epipolar lines intersect cleanly
    for name in ("left_ankle", "right_ankle"):
        joint = graph.index(name)
        values = heatmap_set.values.copy()
        values[0, joint] = 0.0
        occluded = heatmap_set.with_values(values)
        fused = fuse_heatmaps(occluded, coarse_weights)
        assert np.array_equal(occluded.values, values)
        peak = argmax_location(fused.heatmap(0, joint))
        assert not peak.degenerate
        assert np.linalg.norm(peak.pixel - truth.projections[0, joint]) <= 2 * 8.0 * np.sqrt(2)


def test_fused_equals_detected_plus_warped(coarse_scene, coarse_weights):
    heatmap_set, _ = coarse_scene
    fused = fuse_heatmaps(heatmap_set, coarse_weights)
    warped = warped_heatmaps(heatmap_set, coarse_weights)
    np.testing.assert_allclose(fused.values, heatmap_set.values + warped, rtol=1e-6, atol=1e-6)


def test_line_modes_bound_each_other(coarse_scene, coarse_weights):
    heatmap_set, _ = coarse_scene
    line_sum = warped_heatmaps(heatmap_set, coarse_weights, FusionMode.LINE_SUM)
    line_max = warped_heatmaps(heatmap_set, coarse_weights, FusionMode.LINE_MAX)
    weighted = warped_heatmaps(heatmap_set, coarse_weights, FusionMode.WEIGHTED)
    assert np.all(line_max <= line_sum + 1e-9)
    # row-normalized weights average the source, which never exceeds the max of each source
    assert np.all(weighted <= line_max + 1e-6)


CELLS = cell_pixels((40, 40), 8.0)
SPARSE_MODES = (FusionMode.WEIGHTED, FusionMode.LINE_SUM, FusionMode.LINE_MAX)


def nearest_cell(pixel):
    col, row = np.rint(np.asarray(pixel) / 8.0).astype(int)
    return row * 40 + col


def line_distances_to(cell, rig, target=0, source=1):
    """Distance from source cell `cell` to the epipolar line of every target cell."""
    lines, _ = epipolar_lines(CELLS, fundamental_matrix(rig[target], rig[source]))
    return point_line_distances(CELLS[cell], lines)[:, 0]


def test_one_hot_source_lands_on_the_target_projection(rig, coarse_weights):
    weights = coarse_weights[("cam0", "cam1")]
    point = np.array([150.0, -100.0, 400.0])
    hot = nearest_cell(project(point, rig[1]))
    one_hot = np.zeros(1600)
    one_hot[hot] = 1.0
    contribution = weights.matrix @ one_hot

    target_cell = nearest_cell(project(point, rig[0]))
    # NaN distances (the epipole) count as off the line
    far = ~(line_distances_to(hot, rig) <= 3 * weights.kernel_sigma)
    assert far.any()
    assert contribution[target_cell] > 0
    assert np.all(contribution[far] == 0)


def test_line_modes_peak_where_the_line_meets_the_hot_cell(rig, coarse_weights):
    values = np.zeros((4, 1, 40, 40))
    values[1, 0, 30, 12] = 1.0
    hot = 30 * 40 + 12
    heatmap_set = HeatmapSet(values=values, cameras=rig, stride=8.0)
    on_line = line_distances_to(hot, rig) <= coarse_weights[("cam0", "cam1")].threshold
    assert on_line.any()
    for mode in (FusionMode.LINE_SUM, FusionMode.LINE_MAX):
        warped = warped_heatmaps(heatmap_set, coarse_weights, mode)[0, 0].ravel()
        assert warped.max() == 1.0
        np.testing.assert_array_equal(warped == warped.max(), on_line)


def test_fused_cell_ignores_source_cells_off_its_line(coarse_scene, coarse_weights, body_model):
    graph, _ = body_model
    heatmap_set, truth = coarse_scene
    target_cell = nearest_cell(truth.projections[0, graph.index("left_ankle")])
    support = coarse_weights[("cam0", "cam1")].matrix[target_cell].indices
    assert len(support) > 0
    keep = np.zeros(1600, dtype=bool)
    keep[support] = True
    values = heatmap_set.values.copy()
    source = values[1].reshape(heatmap_set.num_joints, -1)
    source[:, ~keep] = 0.0
    values[1] = source.reshape(values[1].shape)
    trimmed = heatmap_set.with_values(values)

    row, col = divmod(target_cell, 40)
    for mode in SPARSE_MODES:
        before = fuse_heatmaps(heatmap_set, coarse_weights, mode).values[0, :, row, col]
        after = fuse_heatmaps(trimmed, coarse_weights, mode).values[0, :, row, col]
        np.testing.assert_allclose(after, before, rtol=1e-12, atol=1e-15)


def test_more_source_evidence_never_lowers_fused_values(coarse_scene, coarse_weights, rng):
    heatmap_set, _ = coarse_scene
    values = heatmap_set.values.copy()
    boost = rng.uniform(0.0, 0.5, values[2].shape) * (rng.random(values[2].shape) < 0.1)
    values[2] = values[2] + boost
    boosted = heatmap_set.with_values(values)
    for mode in SPARSE_MODES:
        before = fuse_heatmaps(heatmap_set, coarse_weights, mode).values
        after = fuse_heatmaps(boosted, coarse_weights, mode).values
        assert np.all(after >= before - 1e-12)
        assert np.any(after[0] > before[0])


def test_identical_channels_fuse_identically(coarse_scene, coarse_weights):
    heatmap_set, _ = coarse_scene
    values = heatmap_set.values.copy()
    values[:, 4] = values[:, 9]
    for mode in SPARSE_MODES:
        fused = fuse_heatmaps(heatmap_set.with_values(values), coarse_weights, mode).values
        np.testing.assert_allclose(fused[:, 4], fused[:, 9], rtol=1e-12, atol=0)


def test_weights_dump_round_trip(tmp_path, coarse_weights):
    weights = coarse_weights[("cam1", "cam3")]
    save_weights(weights, str(tmp_path / "w.json"))
    loaded = load_weights(str(tmp_path / "w.json"))
    assert (loaded.target, loaded.source) == ("cam1", "cam3")
    np.testing.assert_array_equal(loaded.matrix.indptr, weights.matrix.indptr)
    np.testing.assert_array_equal(loaded.matrix.indices, weights.matrix.indices)
    np.testing.assert_allclose(loaded.matrix.data, weights.matrix.data, rtol=1e-6)
    assert loaded.threshold == weights.threshold


def planted_pairs(rng, cameras, planted, count, joints, dims, stride):
    pairs = []
    for _ in range(count):
        noisy = rng.random((2, joints) + dims)
        target = noisy.copy()
        source = noisy[1].reshape(joints, -1)
        target[0] += (planted.matrix @ source.T).T.reshape((joints,) + dims)
        pairs.append(
            (
                HeatmapSet(values=noisy, cameras=cameras, stride=stride),
                HeatmapSet(values=target, cameras=cameras, stride=stride),
            )
        )
    return pairs


def test_fit_recovers_planted_weights(rng):
    cameras = generate_rig(4, 3000.0, (0.0, 0.0, 1000.0), (320, 320), 400.0, height_offset=500.0)[:2]
    dims, stride = (12, 12), 320 / 12
    support = build_epipolar_weights(cameras[0], cameras[1], dims, stride, 0.5 * stride)
    planted = support.with_matrix(support.matrix.multiply(rng.uniform(0.1, 1.0, support.matrix.shape)))
    pairs = planted_pairs(rng, cameras, planted, 30, 10, dims, stride)

    fitted = fit_fusion_weights(pairs, ("cam0", "cam1"), 0.0, support)
    difference = (fitted.matrix - planted.matrix).toarray()[support.matrix.toarray() > 0]
    assert np.sqrt(np.mean(difference**2)) < 1e-4
    assert training_error(pairs, fitted) <= training_error(pairs, support)


def test_fit_without_ridge_needs_enough_samples(rng):
    cameras = generate_rig(2, 3000.0, (0.0, 0.0, 1000.0), (320, 320), 400.0, height_offset=500.0)
    dims, stride = (12, 12), 320 / 12
    support = build_epipolar_weights(cameras[0], cameras[1], dims, stride, 0.5 * stride)
    pairs = planted_pairs(rng, cameras, support, 1, 1, dims, stride)
    with pytest.raises(SingularSystem):
        fit_fusion_weights(pairs, ("cam0", "cam1"), 0.0, support)
    ridge = fit_fusion_weights(pairs, ("cam0", "cam1"), 1.0, support)
    assert ridge.matrix.nnz == support.matrix.nnz


def test_huge_ridge_drives_weights_to_zero(rng):
    cameras = generate_rig(2, 3000.0, (0.0, 0.0, 1000.0), (320, 320), 400.0, height_offset=500.0)
    dims, stride = (12, 12), 320 / 12
    support = build_epipolar_weights(cameras[0], cameras[1], dims, stride, 0.5 * stride)
    pairs = planted_pairs(rng, cameras, support, 5, 3, dims, stride)
    mild = fit_fusion_weights(pairs, ("cam0", "cam1"), 1.0, support)
    strong = fit_fusion_weights(pairs, ("cam0", "cam1"), 1e12, support)
    assert np.abs(strong.matrix.data).max() < 1e-6
    assert np.linalg.norm(strong.matrix.data) < np.linalg.norm(mild.matrix.data)

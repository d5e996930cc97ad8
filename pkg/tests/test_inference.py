import itertools
import numpy as np
import pytest
from geometry.camera import back_project_ray, to_camera_frame
from harness.metrics import mpjpe
from heatmap.heatmap import HeatmapSet, argmax_location
from inference.baseline import locate_root, triangulate_pose, triangulate_root
from inference.body import (
    BodyGraph,
    LimbPriors,
    limb_priors_from_poses,
    load_body_model,
    save_body_model,
)
from inference.grid import RefinementSchedule, build_grid
from inference.pose import Pose3D
from inference.pose_file import read_pose, write_pose
from inference.potentials import pairwise_potential, score_pose, unary_potentials
from inference.psm import psm_infer
from inference.rpsm import rpsm_reconstruct
from synth.pose import sample_pose
from utils.errors import ConfigError, DataError, InsufficientViews


def test_default_body_model(body_model):
    graph, priors = body_model
    assert graph.num_joints == 17
    assert len(graph.edges) == 16 == len(priors.lengths)
    assert graph.joint_names[graph.root] == "pelvis"
    assert graph.traversal_order()[0] == graph.root
    assert sorted(graph.traversal_order()) == list(range(17))
    counterparts = graph.counterparts()
    assert graph.joint_names[counterparts[graph.index("left_wrist")]] == "right_wrist"
    assert counterparts[graph.index("neck")] == graph.index("neck")


def test_edges_are_oriented_away_from_the_root():
    graph = BodyGraph(joint_names=("a", "b", "c"), edges=((1, 0), (2, 1)), root=0)
    assert graph.edges == ((0, 1), (1, 2))
    assert graph.parents() == [-1, 0, 1]


@pytest.mark.parametrize(
    "edges",
    [((0, 1),), ((0, 1), (1, 0)), ((0, 1), (1, 1)), ((0, 5), (1, 2))],
)
def test_invalid_trees_rejected(edges):
    with pytest.raises(ConfigError):
        BodyGraph(joint_names=("a", "b", "c"), edges=edges, root=0)


def test_body_model_file_round_trip(tmp_path, body_model):
    graph, priors = body_model
    save_body_model(graph, priors, tmp_path / "body.json")
    loaded_graph, loaded_priors = load_body_model(tmp_path / "body.json")
    assert loaded_graph == graph
    assert loaded_priors == priors


def test_pairwise_boundaries_inclusive():
    origin = np.zeros(3)
    assert pairwise_potential(origin, [110.0, 0.0, 0.0], 100.0, 10.0) == 1
    assert pairwise_potential(origin, [90.0, 0.0, 0.0], 100.0, 10.0) == 1
    assert pairwise_potential(origin, [110.001, 0.0, 0.0], 100.0, 10.0) == 0
    assert pairwise_potential(origin, [89.999, 0.0, 0.0], 100.0, 10.0) == 0
    # lower bound clips at zero
    assert pairwise_potential(origin, origin, 5.0, 10.0) == 1


def test_grid_quantization_and_layout():
    assert build_grid([0, 0, 0], 2000, 32).max_quantization_error == pytest.approx(31.25)
    grid = build_grid([10.0, 20.0, 30.0], 2000, 16)
    centers = grid.centers()
    assert centers.shape == (4096, 3)
    np.testing.assert_allclose(centers[0], [10 - 937.5, 20 - 937.5, 30 - 937.5])
    np.testing.assert_allclose(centers[1] - centers[0], [125.0, 0.0, 0.0])
    np.testing.assert_allclose(centers[16] - centers[0], [0.0, 125.0, 0.0])
    np.testing.assert_allclose(centers[256] - centers[0], [0.0, 0.0, 125.0])
    point = np.array([400.0, -300.0, 123.0])
    nearest = grid.nearest_bin(point)
    assert np.all(np.abs(centers[nearest] - point) <= grid.max_quantization_error + 1e-9)
    with pytest.raises(ConfigError):
        build_grid([0, 0, 0], 100, 1)


def test_refinement_schedule():
    schedule = RefinementSchedule(initial_edge_length=2000, initial_bins=16, refine_bins=2, iterations=10)
    lengths = schedule.edge_lengths()
    assert len(lengths) == 11
    assert lengths[:3] == pytest.approx([2000.0, 125.0, 62.5])
    assert lengths[10] == pytest.approx(2000 / (16 * 2**9))
    with pytest.raises(ConfigError):
        RefinementSchedule(iterations=-1)


def random_instance(rng, joints, bins):
    parents = [-1] + [int(rng.integers(0, joint)) for joint in range(1, joints)]
    graph = BodyGraph(
        joint_names=tuple(f"j{joint}" for joint in range(joints)),
        edges=tuple((parents[joint], joint) for joint in range(1, joints)),
        root=0,
    )
    lengths = rng.uniform(80.0, 300.0, joints - 1)
    anchors = np.zeros((joints, 3))
    for joint in range(1, joints):
        direction = rng.normal(size=3)
        anchors[joint] = anchors[parents[joint]] + lengths[joint - 1] * direction / np.linalg.norm(direction)
    grids = [build_grid(anchor, 150.0, bins) for anchor in anchors]
    unaries = [rng.random(bins**3) for _ in range(joints)]
    priors = LimbPriors(lengths=tuple(lengths), tolerance=rng.uniform(20.0, 80.0))
    return graph, grids, unaries, priors


def brute_force(graph, grids, unaries, priors):
    """Score of every assignment at once; the first maximum in lexicographic order wins."""
    states = np.array(list(itertools.product(range(grids[0].num_bins), repeat=graph.num_joints)))
    scores = np.ones(len(states))
    for joint in range(graph.num_joints):
        scores *= unaries[joint][states[:, joint]]
    for edge, (parent, child) in enumerate(graph.edges):
        offsets = grids[parent].centers()[states[:, parent]] - grids[child].centers()[states[:, child]]
        low, high = priors.bounds(edge)
        distance_squared = np.sum(offsets**2, axis=1)
        scores *= (distance_squared >= low * low) & (distance_squared <= high * high)
    best = int(np.argmax(scores))
    if scores[best] == 0.0:
        return 0.0, None
    return float(scores[best]), tuple(int(state) for state in states[best])


@pytest.mark.parametrize("joints, bins, instances", [(3, 2, 40), (4, 2, 30), (5, 2, 20), (3, 3, 10)])
def test_psm_matches_exhaustive_search(joints, bins, instances):
    rng = np.random.default_rng(joints * 100 + bins)
    for _ in range(instances):
        graph, grids, unaries, priors = random_instance(rng, joints, bins)
        result = psm_infer(graph, grids, unaries, priors)
        best_score, best_bins = brute_force(graph, grids, unaries, priors)
        if best_bins is None:
            assert not result.feasible
            continue
        assert result.feasible
        assert result.bins == best_bins
        assert result.score == pytest.approx(best_score, rel=1e-9)
        assert score_pose(graph, grids, unaries, priors, result.bins) == pytest.approx(result.score, rel=1e-9)


def test_psm_infeasible_falls_back_to_unary_argmax():
    graph = BodyGraph(joint_names=("a", "b"), edges=((0, 1),), root=0)
    grids = [build_grid([0, 0, 0], 100, 2), build_grid([10000, 0, 0], 100, 2)]
    unaries = [np.linspace(0.1, 0.8, 8), np.linspace(0.9, 0.2, 8)]
    result = psm_infer(graph, grids, unaries, LimbPriors(lengths=(100.0,), tolerance=10.0))
    assert not result.feasible
    assert result.score == 0.0
    assert result.bins == (7, 0)


def test_unaries_average_over_views(rig):
    values = np.zeros((4, 1, 80, 80))
    values[1] = 0.6
    heatmap_set = HeatmapSet(values=values, cameras=rig, stride=4.0)
    grid = build_grid([0.0, 0.0, 1000.0], 200, 4)
    (unary,) = unary_potentials([grid], heatmap_set)
    np.testing.assert_allclose(unary, 0.6 / 4, rtol=1e-6)


def test_unaries_ignore_bins_outside_the_image(rig):
    heatmap_set = HeatmapSet(values=np.ones((4, 1, 80, 80)), cameras=rig, stride=4.0)
    grid = build_grid([0.0, 0.0, 1000.0], 40000, 2)
    (unary,) = unary_potentials([grid], heatmap_set)
    np.testing.assert_array_equal(unary, 0.0)


def test_triangulate_root_within_pixel_bound(noiseless_scene, body_model):
    graph, _ = body_model
    heatmap_set, truth = noiseless_scene
    root = triangulate_root(heatmap_set, root_joint=graph.root)
    true_root = truth.pose.positions[graph.root]
    depth = np.mean([to_camera_frame(true_root, camera)[2] for camera in heatmap_set.cameras])
    assert np.linalg.norm(root - true_root) <= heatmap_set.stride * depth / heatmap_set.cameras[0].focal


def test_triangulate_root_needs_two_views(noiseless_scene):
    heatmap_set, _ = noiseless_scene
    values = heatmap_set.values.copy()
    values[1:, 0] = 0.0
    with pytest.raises(InsufficientViews):
        triangulate_root(heatmap_set.with_values(values))


def test_triangulate_pose_survives_a_blank_joint(noiseless_scene):
    heatmap_set, truth = noiseless_scene
    values = heatmap_set.values.copy()
    values[:, 5] = 0.0
    pose = triangulate_pose(heatmap_set.with_values(values))
    assert pose.confidence[5] == 0.0
    others = [joint for joint in range(pose.num_joints) if joint != 5]
    errors = np.linalg.norm(pose.positions[others] - truth.pose.positions[others], axis=1)
    assert errors.max() < 40.0


def test_triangulate_pose_never_uses_blank_views(noiseless_scene, body_model):
    graph, _ = body_model
    heatmap_set, truth = noiseless_scene
    wrist = graph.index("left_wrist")
    values = heatmap_set.values.copy()
    values[1:, wrist] = 0.0
    pose = triangulate_pose(heatmap_set.with_values(values))
    assert pose.confidence[wrist] == 0.0

    peak = argmax_location(heatmap_set.heatmap(0, wrist))
    ray = back_project_ray(peak.pixel, heatmap_set.cameras[0])
    assert ray.distance_to(pose.positions[wrist]) < 1e-6
    true_wrist = truth.pose.positions[wrist]
    others = [joint for joint in range(pose.num_joints) if joint != wrist]
    centroid = truth.pose.positions[others].mean(axis=0)
    assert np.linalg.norm(pose.positions[wrist] - true_wrist) < np.linalg.norm(centroid - true_wrist) + 100.0


def test_rpsm_survives_a_root_seen_by_one_view(noiseless_scene, body_model):
    graph, priors = body_model
    heatmap_set, truth = noiseless_scene
    values = heatmap_set.values.copy()
    values[1:, graph.root] = 0.0
    damaged = heatmap_set.with_values(values)
    with pytest.raises(InsufficientViews):
        triangulate_root(damaged, root_joint=graph.root)

    center = locate_root(damaged, root_joint=graph.root)
    assert np.linalg.norm(center - truth.pose.positions[graph.root]) < 500.0
    schedule = RefinementSchedule(initial_edge_length=2000, initial_bins=8, refine_bins=2, iterations=3)
    reconstruction = rpsm_reconstruct(damaged, None, graph, priors, schedule)
    np.testing.assert_array_equal(reconstruction.root, center)
    assert mpjpe(reconstruction.pose, truth.pose) < 150.0


def test_locate_root_needs_some_joint(noiseless_scene):
    heatmap_set, _ = noiseless_scene
    blank = heatmap_set.with_values(np.zeros_like(heatmap_set.values))
    with pytest.raises(InsufficientViews):
        locate_root(blank)


def test_limb_prior_rejects_a_corrupted_view(noiseless_scene, body_model):
    graph, priors = body_model
    heatmap_set, truth = noiseless_scene
    wrist = graph.index("right_wrist")
    values = heatmap_set.values.copy()
    values[0, wrist] = np.roll(values[0, wrist], (20, 20), axis=(0, 1))
    corrupted = heatmap_set.with_values(values)
    schedule = RefinementSchedule(initial_edge_length=2000, initial_bins=8, refine_bins=2, iterations=6)

    def wrist_error(pose):
        return np.linalg.norm(pose.positions[wrist] - truth.pose.positions[wrist])

    clean_triangulated = wrist_error(triangulate_pose(heatmap_set))
    corrupt_triangulated = wrist_error(triangulate_pose(corrupted))
    clean_rpsm = wrist_error(rpsm_reconstruct(heatmap_set, None, graph, priors, schedule).pose)
    corrupt_rpsm = wrist_error(rpsm_reconstruct(corrupted, None, graph, priors, schedule).pose)
    assert corrupt_triangulated > clean_triangulated + 50.0
    assert corrupt_rpsm - clean_rpsm < corrupt_triangulated - clean_triangulated
    assert corrupt_rpsm < corrupt_triangulated


def test_rpsm_grids_follow_the_previous_stage(noiseless_scene, body_model):
    graph, priors = body_model
    heatmap_set, _ = noiseless_scene
    schedule = RefinementSchedule(initial_edge_length=2000, initial_bins=8, refine_bins=2, iterations=4)
    reconstruction = rpsm_reconstruct(heatmap_set, None, graph, priors, schedule)
    stages = reconstruction.stages
    np.testing.assert_array_equal(stages[0].grids[0].center, reconstruction.root)
    for previous, stage in zip(stages, stages[1:]):
        for joint, grid in enumerate(stage.grids):
            np.testing.assert_array_equal(grid.center, previous.pose.positions[joint])
    for stage in stages:
        assert all(grid.contains(position) for grid, position in zip(stage.grids, stage.pose.positions))


def test_rpsm_refines_noiseless_scene(noiseless_scene, body_model):
    graph, priors = body_model
    heatmap_set, truth = noiseless_scene
    schedule = RefinementSchedule(initial_edge_length=2000, initial_bins=8, refine_bins=2, iterations=10)
    reconstruction = rpsm_reconstruct(heatmap_set, None, graph, priors, schedule)
    assert len(reconstruction.stages) == 11
    assert [stage.edge_length for stage in reconstruction.stages] == pytest.approx(schedule.edge_lengths())
    assert all(stage.elapsed_ms >= 0 for stage in reconstruction.stages)
    coarse = mpjpe(reconstruction.stage_poses[0], truth.pose)
    fine = mpjpe(reconstruction.pose, truth.pose)
    assert fine < 0.5 * coarse


def test_rpsm_without_refinement_is_psm(noiseless_scene, body_model):
    graph, priors = body_model
    heatmap_set, _ = noiseless_scene
    schedule = RefinementSchedule(initial_edge_length=2000, initial_bins=8, refine_bins=2, iterations=0)
    reconstruction = rpsm_reconstruct(heatmap_set, None, graph, priors, schedule)
    grid = build_grid(triangulate_root(heatmap_set), 2000, 8)
    grids = [grid] * graph.num_joints
    unaries = unary_potentials(grids, heatmap_set)
    explicit = psm_infer(graph, grids, unaries, priors)
    assert len(reconstruction.stages) == 1
    assert reconstruction.stages[0].result.bins == explicit.bins
    np.testing.assert_array_equal(reconstruction.pose.positions, explicit.pose.positions)
    assert score_pose(graph, grids, unaries, priors, explicit.bins) == pytest.approx(explicit.score)


def test_pose_file_round_trip(tmp_path, body_model, rng):
    graph, _ = body_model
    pose = Pose3D(positions=rng.uniform(-1000, 1000, (17, 3)))
    metadata = {"method": "rpsm", "score": 0.25, "stage_mpjpe": [40.0, 12.5]}
    write_pose(tmp_path / "pose.txt", pose, graph.joint_names, metadata)
    loaded, names, loaded_metadata = read_pose(tmp_path / "pose.txt")
    assert names == list(graph.joint_names)
    assert loaded_metadata == metadata
    np.testing.assert_allclose(loaded.positions, pose.positions, atol=1e-6)


def test_pose_file_rejects_garbage(tmp_path):
    path = tmp_path / "pose.txt"
    path.write_text("pelvis 1 2\n")
    with pytest.raises(DataError):
        read_pose(path)


def test_limb_priors_from_poses(body_model):
    graph, priors = body_model
    poses = [sample_pose(priors.with_tolerance(0.0), graph, seed) for seed in range(3)]
    measured = limb_priors_from_poses(graph, poses, tolerance=25.0)
    np.testing.assert_allclose(measured.lengths, priors.lengths, atol=1e-6)
    assert measured.tolerance == 25.0

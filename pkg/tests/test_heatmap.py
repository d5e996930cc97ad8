import numpy as np
import pytest
from heatmap.dump import load_heatmaps, save_heatmaps
from heatmap.heatmap import (
    Heatmap,
    HeatmapSet,
    argmax_location,
    gaussian_maps,
    peak_pixels,
    render_gaussian,
    sample_bilinear,
    sample_bilinear_many,
)
from utils.errors import ConfigError, DataError, DimensionMismatch


def test_render_gaussian_peak_and_falloff():
    (heatmap,) = render_gaussian([[40.0, 20.0]], sigma=8.0, dims=(20, 30), stride=4.0)
    assert heatmap.shape == (20, 30)
    assert heatmap.values[5, 10] == pytest.approx(1.0)
    # one cell = 4 px away from the center
    assert heatmap.values[5, 11] == pytest.approx(np.exp(-16 / 128), rel=1e-6)
    assert heatmap.values.min() >= 0.0


def test_gaussian_far_outside_is_zero():
    maps = gaussian_maps([[-100.0, 20.0], [np.nan, np.nan]], sigma=8.0, dims=(20, 20), stride=4.0)
    assert not maps.any()


def test_gaussian_needs_positive_sigma():
    with pytest.raises(DataError):
        gaussian_maps([[0.0, 0.0]], sigma=0.0, dims=(4, 4), stride=1.0)


def test_bilinear_at_cells_and_between():
    values = np.arange(12, dtype=np.float32).reshape(3, 4)
    heatmap = Heatmap(values=values, joint=0, view="cam0", stride=2.0)
    assert sample_bilinear(heatmap, (2.0, 2.0)) == pytest.approx(values[1, 1])
    assert sample_bilinear(heatmap, (3.0, 2.0)) == pytest.approx(0.5 * (values[1, 1] + values[1, 2]))
    assert sample_bilinear(heatmap, (3.0, 3.0)) == pytest.approx(values[1:3, 1:3].mean())


def test_bilinear_outside_reads_zero():
    values = np.ones((3, 3))
    samples = sample_bilinear_many(values, [[-10.0, 0.0], [0.0, 100.0], [np.nan, 1.0], [5.0, 4.0]], 2.0)
    np.testing.assert_array_equal(samples[:3], 0.0)
    # half a cell beyond the last column: half of the weight is padding
    assert samples[3] == pytest.approx(0.5)


def test_argmax_ties_and_degenerate():
    values = np.zeros((4, 5), dtype=np.float32)
    values[1, 3] = values[2, 0] = 0.7
    peak = argmax_location(Heatmap(values=values, joint=2, view="cam1", stride=4.0))
    np.testing.assert_array_equal(peak.pixel, [12.0, 4.0])
    assert peak.confidence == pytest.approx(0.7)
    assert not peak.degenerate

    flat = argmax_location(Heatmap(values=np.full((4, 5), 0.3), joint=2, view="cam1", stride=4.0))
    assert flat.degenerate
    np.testing.assert_array_equal(flat.pixel, [0.0, 0.0])


def test_heatmap_set_validation(rig):
    with pytest.raises(DimensionMismatch):
        HeatmapSet(values=np.zeros((3, 2, 4, 4)), cameras=rig, stride=4.0)
    with pytest.raises(DataError):
        HeatmapSet(values=np.full((4, 2, 4, 4), np.inf), cameras=rig, stride=4.0)
    heatmap_set = HeatmapSet(values=np.zeros((4, 2, 4, 4)), cameras=rig, stride=4.0)
    assert heatmap_set.values.dtype == np.float32
    assert not heatmap_set.values.flags.writeable
    assert heatmap_set.heatmap("cam2", 1).view == "cam2"


def test_peak_pixels_of_noiseless_scene(noiseless_scene):
    heatmap_set, truth = noiseless_scene
    pixels, confidences, degenerate = peak_pixels(heatmap_set)
    assert not degenerate.any()
    assert np.all(np.abs(pixels - truth.projections) <= heatmap_set.stride / 2 + 1e-9)
    assert np.all(confidences > 0.8)


def test_dump_round_trip_is_bit_exact(tmp_path, rig, rng):
    values = rng.random((4, 3, 6, 7)).astype(np.float32)
    heatmap_set = HeatmapSet(values=values, cameras=rig, stride=4.0)
    manifest = tmp_path / "maps.json"
    save_heatmaps(heatmap_set, str(manifest))

    raw = np.fromfile(tmp_path / "maps.bin", dtype="<f4")
    np.testing.assert_array_equal(raw, values.ravel())

    loaded = load_heatmaps(str(manifest), list(reversed(rig)))
    assert loaded.view_ids == heatmap_set.view_ids
    assert loaded.stride == 4.0
    assert loaded.values.tobytes() == values.tobytes()


def test_dump_rejects_truncated_data(tmp_path, rig):
    heatmap_set = HeatmapSet(values=np.zeros((4, 1, 2, 2)), cameras=rig, stride=4.0)
    manifest = tmp_path / "maps.json"
    save_heatmaps(heatmap_set, str(manifest))
    (tmp_path / "maps.bin").write_bytes(b"\x00" * 8)
    with pytest.raises(DataError):
        load_heatmaps(str(manifest), rig)


def test_dump_rejects_big_endian(tmp_path, rig):
    manifest = tmp_path / "maps.json"
    manifest.write_text(
        '{"views": ["cam0"], "joints": 1, "height": 1, "width": 1, "stride": 1,'
        ' "byte_order": "big", "data": "maps.bin"}'
    )
    with pytest.raises(ConfigError):
        load_heatmaps(str(manifest), rig)


def test_degenerate_map_logs_a_warning(caplog):
    with caplog.at_level("WARNING", logger="heatmap.heatmap"):
        argmax_location(Heatmap(values=np.zeros((4, 5)), joint=6, view="cam3", stride=4.0))
    assert [record.levelname for record in caplog.records] == ["WARNING"]
    assert "joint 6 in view cam3" in caplog.text

"""
Heatmap dump reader and writer.

A dump is a JSON manifest plus one flat binary file of little-endian float32 values
in (view, joint, row, col) order:

    {"views": ["cam0", ...], "joints": 17, "height": 80, "width": 80,
     "stride": 4.0, "byte_order": "little", "dtype": "float32",
     "data": "heatmaps.bin"}

The data path is relative to the manifest.
"""

import json
import os
import numpy as np
from utils.errors import ConfigError, DataError
from utils.logging import configure_logging
from .heatmap import HeatmapSet

logger = configure_logging(__name__)

DUMP_DTYPE = np.dtype("<f4")
REQUIRED_FIELDS = ["views", "joints", "height", "width", "stride", "byte_order", "data"]


def save_heatmaps(heatmap_set, manifest_path, data_name=None):
    """
    Write a heatmap set as manifest + binary data file.

    Parameters:
    - heatmap_set (HeatmapSet): maps to write
    - manifest_path (str): JSON manifest path
    - data_name (str): binary file name next to the manifest (default: manifest stem + .bin)
    """
    if data_name is None:
        data_name = os.path.splitext(os.path.basename(manifest_path))[0] + ".bin"
    height, width = heatmap_set.map_shape
    manifest = {
        "views": heatmap_set.view_ids,
        "joints": heatmap_set.num_joints,
        "height": height,
        "width": width,
        "stride": heatmap_set.stride,
        "byte_order": "little",
        "dtype": "float32",
        "data": data_name,
    }
    data_path = os.path.join(os.path.dirname(manifest_path), data_name)
    heatmap_set.values.astype(DUMP_DTYPE).tofile(data_path)
    with open(manifest_path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2)
    logger.debug("Wrote heatmap dump %s (%s)", manifest_path, data_name)


def load_heatmaps(manifest_path, cameras):
    """
    Read a heatmap dump, pairing each view with the camera of the same id.

    Throws:
    - ConfigError: malformed manifest
    - DataError: unknown view ids or a data file of the wrong size
    """
    with open(manifest_path, encoding="utf-8") as handle:
        manifest = json.load(handle)
    missing_fields = [field for field in REQUIRED_FIELDS if field not in manifest]
    if missing_fields:
        raise ConfigError(f"{manifest_path}: missing fields {missing_fields}")
    if manifest["byte_order"] != "little" or manifest.get("dtype", "float32") != "float32":
        raise ConfigError(f"{manifest_path}: only little-endian float32 dumps are supported")

    by_id = {camera.id: camera for camera in cameras}
    unknown = [view for view in manifest["views"] if view not in by_id]
    if unknown:
        raise DataError(f"{manifest_path}: no camera for views {unknown}")

    shape = (
        len(manifest["views"]),
        int(manifest["joints"]),
        int(manifest["height"]),
        int(manifest["width"]),
    )
    data_path = os.path.join(os.path.dirname(manifest_path), manifest["data"])
    values = np.fromfile(data_path, dtype=DUMP_DTYPE)
    if values.size != int(np.prod(shape)):
        raise DataError(
            f"{data_path}: expected {int(np.prod(shape))} floats, found {values.size}"
        )
    return HeatmapSet(
        values=values.reshape(shape).astype(np.float32),
        cameras=[by_id[view] for view in manifest["views"]],
        stride=float(manifest["stride"]),
    )

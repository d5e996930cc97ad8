"""
FusionWeights reader and writer.

Manifest (JSON) plus a binary file of little-endian (row u32, col u32, weight f32)
triplets:

    {"target": "cam0", "source": "cam1", "rows": 6400, "cols": 6400,
     "kernel_sigma": 6.0, "threshold": 18.0, "entries": 812345,
     "data": "w_cam0_cam1.bin"}
"""

import json
import os
import numpy as np
from scipy import sparse
from utils.errors import ConfigError, DataError
from utils.logging import configure_logging
from .weights import FusionWeights

logger = configure_logging(__name__)

TRIPLET_DTYPE = np.dtype([("row", "<u4"), ("col", "<u4"), ("weight", "<f4")])
REQUIRED_FIELDS = ["target", "source", "rows", "cols", "kernel_sigma", "threshold", "data"]


def save_weights(weights, manifest_path, data_name=None):
    if data_name is None:
        data_name = os.path.splitext(os.path.basename(manifest_path))[0] + ".bin"
    coo = weights.matrix.tocoo()
    triplets = np.zeros(coo.nnz, dtype=TRIPLET_DTYPE)
    triplets["row"] = coo.row
    triplets["col"] = coo.col
    triplets["weight"] = coo.data
    triplets.tofile(os.path.join(os.path.dirname(manifest_path), data_name))

    rows, cols = weights.shape
    manifest = {
        "target": weights.target,
        "source": weights.source,
        "rows": rows,
        "cols": cols,
        "kernel_sigma": weights.kernel_sigma,
        "threshold": weights.threshold,
        "entries": int(coo.nnz),
        "data": data_name,
    }
    with open(manifest_path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2)
    logger.debug("Wrote %d fusion weights to %s", coo.nnz, manifest_path)


def load_weights(manifest_path):
    """
    Throws:
    - ConfigError: malformed manifest
    - DataError: triplet file inconsistent with the manifest
    """
    with open(manifest_path, encoding="utf-8") as handle:
        manifest = json.load(handle)
    missing_fields = [field for field in REQUIRED_FIELDS if field not in manifest]
    if missing_fields:
        raise ConfigError(f"{manifest_path}: missing fields {missing_fields}")

    data_path = os.path.join(os.path.dirname(manifest_path), manifest["data"])
    triplets = np.fromfile(data_path, dtype=TRIPLET_DTYPE)
    expected = manifest.get("entries")
    if expected is not None and len(triplets) != expected:
        raise DataError(f"{data_path}: expected {expected} entries, found {len(triplets)}")

    shape = (int(manifest["rows"]), int(manifest["cols"]))
    if len(triplets) and (triplets["row"].max() >= shape[0] or triplets["col"].max() >= shape[1]):
        raise DataError(f"{data_path}: triplet index outside a {shape} matrix")
    matrix = sparse.csr_matrix(
        (triplets["weight"].astype(float), (triplets["row"], triplets["col"])), shape=shape
    )
    return FusionWeights(
        source=manifest["source"],
        target=manifest["target"],
        matrix=matrix,
        kernel_sigma=float(manifest["kernel_sigma"]),
        threshold=float(manifest["threshold"]),
    )

"""
Camera file reader and writer.

A camera file is a JSON document:

    {"cameras": [{"id": "cam0",
                  "intrinsics": [9 numbers, row-major],
                  "rotation": [9 numbers, row-major],
                  "translation": [3 numbers, mm],
                  "width": 320, "height": 320}, ...]}

Floats are written with `repr` precision, so a save/load round trip is exact.
"""

import json
from utils.errors import ConfigError, GeometryError
from utils.logging import configure_logging
from .camera import CameraParams

logger = configure_logging(__name__)

REQUIRED_FIELDS = ["id", "intrinsics", "rotation", "translation", "width", "height"]


def camera_to_record(camera):
    return {
        "id": camera.id,
        "intrinsics": camera.intrinsics.ravel().tolist(),
        "rotation": camera.rotation.ravel().tolist(),
        "translation": camera.translation.tolist(),
        "width": camera.width,
        "height": camera.height,
    }


def camera_from_record(record):
    missing_fields = [field for field in REQUIRED_FIELDS if field not in record]
    if missing_fields:
        raise ConfigError(f"Camera record missing fields: {missing_fields}")
    if len(record["intrinsics"]) != 9 or len(record["rotation"]) != 9:
        raise ConfigError(f"Camera {record['id']}: intrinsics and rotation need 9 entries")
    if len(record["translation"]) != 3:
        raise ConfigError(f"Camera {record['id']}: translation needs 3 entries")
    try:
        return CameraParams(
            intrinsics=record["intrinsics"],
            rotation=record["rotation"],
            translation=record["translation"],
            image_dims=(record["width"], record["height"]),
            id=record["id"],
        )
    except GeometryError as e:
        raise ConfigError(str(e)) from e


def save_cameras(cameras, path):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(
            {"cameras": [camera_to_record(camera) for camera in cameras]}, handle, indent=2
        )
    logger.debug("Wrote %d cameras to %s", len(cameras), path)


def load_cameras(path):
    """
    Load the camera list from a camera file.

    Throws:
    - ConfigError: malformed records or invalid camera parameters
    """
    with open(path, encoding="utf-8") as handle:
        document = json.load(handle)
    if "cameras" not in document:
        raise ConfigError(f"{path}: missing `cameras` list")
    cameras = [camera_from_record(record) for record in document["cameras"]]
    logger.debug("Loaded %d cameras from %s", len(cameras), path)
    return cameras

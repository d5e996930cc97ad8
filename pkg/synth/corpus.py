"""
Scene corpora: generation from a seed and the on-disk directory layout.

    <corpus>/manifest.json          seed, scene config, noise model, frame ids
    <corpus>/cameras.json           the rig (geometry.camera_file format)
    <corpus>/body_model.json        graph and limb priors used by the generator
    <corpus>/frames/000000/heatmaps.json + heatmaps.bin
    <corpus>/frames/000000/truth.json

Frame f of a corpus with seed s draws its pose and its noise from the two words of
`numpy.random.SeedSequence([s, f]).generate_state(2)`, so any frame can be regenerated
alone and in any order.
"""

from dataclasses import dataclass, field, replace
import json
import os
import numpy as np
from config import (
    HEATMAP_STRIDE,
    RENDER_SIGMA,
    RIG_FOCAL,
    RIG_IMAGE_HEIGHT,
    RIG_IMAGE_WIDTH,
    RIG_NUM_CAMERAS,
    RIG_RADIUS,
    RIG_TARGET,
)
from geometry.camera_file import load_cameras, save_cameras
from heatmap.dump import load_heatmaps, save_heatmaps
from inference.body import load_body_model, save_body_model
from inference.pose import Pose3D
from utils.errors import ConfigError, DataError
from utils.logging import configure_logging
from .pose import sample_pose
from .render import NoiseModel, SceneTruth, render_views
from .rig import generate_rig

logger = configure_logging(__name__)

MANIFEST_NAME = "manifest.json"
CAMERAS_NAME = "cameras.json"
BODY_MODEL_NAME = "body_model.json"


@dataclass(frozen=True)
class SceneConfig:
    """
    Rig, rendering, and noise settings shared by every frame of a corpus.
    """

    num_cameras: int = RIG_NUM_CAMERAS
    radius: float = RIG_RADIUS
    focal: float = RIG_FOCAL
    image_width: int = RIG_IMAGE_WIDTH
    image_height: int = RIG_IMAGE_HEIGHT
    target: tuple = RIG_TARGET
    height_offset: float = 0.0
    stride: int = HEATMAP_STRIDE
    render_sigma: float = RENDER_SIGMA
    noise: NoiseModel = field(default_factory=NoiseModel)

    @classmethod
    def from_dict(cls, document):
        """Build from a JSON object; unknown keys are a ConfigError."""
        document = dict(document)
        noise = document.pop("noise", {})
        known = set(cls.__dataclass_fields__) - {"noise"}
        unknown = sorted(set(document) - known)
        if unknown:
            raise ConfigError(f"Unknown scene settings {unknown}")
        if "target" in document:
            document["target"] = tuple(float(value) for value in document["target"])
        try:
            return cls(noise=NoiseModel(**noise), **document)
        except TypeError as e:
            raise ConfigError(f"Bad noise settings: {e}") from e

    def as_dict(self):
        return {
            "num_cameras": self.num_cameras,
            "radius": self.radius,
            "focal": self.focal,
            "image_width": self.image_width,
            "image_height": self.image_height,
            "target": list(self.target),
            "height_offset": self.height_offset,
            "stride": self.stride,
            "render_sigma": self.render_sigma,
            "noise": self.noise.as_dict(),
        }

    def rig(self):
        return generate_rig(
            self.num_cameras,
            self.radius,
            self.target,
            (self.image_width, self.image_height),
            self.focal,
            self.height_offset,
        )


def frame_seeds(seed, frame):
    """(pose seed, noise seed) of one frame."""
    pose_seed, noise_seed = np.random.SeedSequence([seed, frame]).generate_state(2)
    return int(pose_seed), int(noise_seed)


def generate_frame(scene, cameras, graph, priors, frame, seed):
    """
    Sample and render frame `frame` of the corpus seeded with `seed`.

    Returns:
    - tuple: (HeatmapSet, SceneTruth)
    """
    pose_seed, noise_seed = frame_seeds(seed, frame)
    pose = sample_pose(priors, graph, pose_seed, target=scene.target)
    noise = replace(scene.noise, seed=noise_seed)
    return render_views(pose, cameras, scene.render_sigma, noise, scene.stride, graph)


def truth_to_record(truth, joint_names):
    def nullable(pixel):
        return None if np.any(np.isnan(pixel)) else [float(pixel[0]), float(pixel[1])]

    return {
        "joints": list(joint_names),
        "pose": truth.pose.positions.tolist(),
        "projections": [[nullable(pixel) for pixel in view] for view in truth.projections],
        "occluded": truth.occluded.tolist(),
        "distracted": truth.distracted.tolist(),
    }


def truth_from_record(record):
    try:
        projections = np.array(
            [
                [[np.nan, np.nan] if pixel is None else pixel for pixel in view]
                for view in record["projections"]
            ],
            dtype=float,
        )
        return SceneTruth(
            pose=Pose3D(positions=record["pose"]),
            projections=projections,
            occluded=np.array(record["occluded"], dtype=bool),
            distracted=np.array(record.get("distracted", np.zeros(projections.shape[:2])), dtype=bool),
        )
    except (KeyError, ValueError) as e:
        raise DataError(f"Malformed truth record: {e}") from e


def _frame_directory(directory, frame_id):
    return os.path.join(directory, "frames", frame_id)


def write_frame(directory, frame_id, heatmap_set, truth=None, joint_names=None):
    frame_directory = _frame_directory(directory, frame_id)
    os.makedirs(frame_directory, exist_ok=True)
    save_heatmaps(heatmap_set, os.path.join(frame_directory, "heatmaps.json"))
    if truth is not None:
        with open(os.path.join(frame_directory, "truth.json"), "w", encoding="utf-8") as handle:
            json.dump(truth_to_record(truth, joint_names), handle, indent=2)


def write_corpus(directory, scene, graph, priors, num_frames, seed):
    """
    Generate `num_frames` frames and write them as a corpus directory.

    Returns:
    - Corpus: the written corpus, opened for reading
    """
    if num_frames < 1:
        raise ConfigError("A corpus needs at least one frame")
    os.makedirs(directory, exist_ok=True)
    cameras = scene.rig()
    save_cameras(cameras, os.path.join(directory, CAMERAS_NAME))
    save_body_model(graph, priors, os.path.join(directory, BODY_MODEL_NAME))

    frame_ids = [f"{frame:06d}" for frame in range(num_frames)]
    for frame, frame_id in enumerate(frame_ids):
        heatmap_set, truth = generate_frame(scene, cameras, graph, priors, frame, seed)
        write_frame(directory, frame_id, heatmap_set, truth, graph.joint_names)
        logger.debug("Wrote frame %s", frame_id)

    manifest = {
        "seed": seed,
        "scene": scene.as_dict(),
        "noise": scene.noise.as_dict(),
        "frames": frame_ids,
    }
    with open(os.path.join(directory, MANIFEST_NAME), "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
    logger.info("Wrote corpus of %d frames to %s", num_frames, directory)
    return read_corpus(directory)


@dataclass(frozen=True, eq=False)
class Corpus:
    """
    An opened corpus directory. Frames load lazily; `truth` is None for frames
    without a truth file (ingested detector output).
    """

    directory: str
    cameras: list
    graph: object
    priors: object
    frame_ids: list
    manifest: dict

    def load_frame(self, frame_id):
        frame_directory = _frame_directory(self.directory, frame_id)
        heatmap_set = load_heatmaps(os.path.join(frame_directory, "heatmaps.json"), self.cameras)
        truth_path = os.path.join(frame_directory, "truth.json")
        truth = None
        if os.path.exists(truth_path):
            with open(truth_path, encoding="utf-8") as handle:
                truth = truth_from_record(json.load(handle))
        return heatmap_set, truth


def read_corpus(directory, body_model_path=None):
    """
    Open a corpus. The body model comes from `body_model_path`, else the corpus's
    own body_model.json.

    Throws:
    - ConfigError: missing or malformed manifest
    """
    manifest_path = os.path.join(directory, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise ConfigError(f"{directory} is not a corpus: no {MANIFEST_NAME}")
    with open(manifest_path, encoding="utf-8") as handle:
        manifest = json.load(handle)
    if "frames" not in manifest:
        raise ConfigError(f"{manifest_path}: missing `frames` list")
    graph, priors = load_body_model(body_model_path or os.path.join(directory, BODY_MODEL_NAME))
    return Corpus(
        directory=directory,
        cameras=load_cameras(os.path.join(directory, CAMERAS_NAME)),
        graph=graph,
        priors=priors,
        frame_ids=list(manifest["frames"]),
        manifest=manifest,
    )

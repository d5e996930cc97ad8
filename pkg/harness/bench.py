"""
Benchmark orchestration: run every requested method over a corpus and aggregate
per-method EvalReports.

Config (JSON, every key optional):

    {"seed": 0, "frames": 10, "corpus": null, "body_model": null,
     "scene": {"num_cameras": 4, "radius": 3000, "stride": 4, "render_sigma": 8,
               "noise": {"jitter_sigma": 2, "drop_prob": 0.15, "distractor_prob": 0.1}},
     "methods": ["single-triangulate", "single-psm", "single-rpsm"],
     "iterations": [0, 1, 3, 5, 10], "initial_edge_length": 2000,
     "initial_bins": 16, "refine_bins": 2,
     "fusion_kernel_sigma": 1.5, "jdr_threshold": null,
     "workers": 1, "output_dir": "bench"}

Without `corpus`, frames are generated in memory from `seed` and `scene` exactly as
`synth` would write them. `fusion_kernel_sigma` is in heatmap cells; `jdr_threshold`
is in pixels and defaults to half the projected head segment of each frame.

Outputs in `output_dir`: report.json (byte-identical for a fixed config and seed,
whatever `workers` is), frames.csv (per frame, method, and joint error), and
timings.json (wall-clock, which naturally varies run to run).
"""

from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field
import json
import os
import time
import numpy as np
from config import (
    DEFAULT_SEED,
    FUSION_KERNEL_SIGMA_CELLS,
    RPSM_INITIAL_BINS,
    RPSM_INITIAL_EDGE_LENGTH,
    RPSM_REFINE_BINS,
    WORKERS,
)
from fusion.fuse import FusionMode, fuse_heatmaps
from fusion.weights import build_all_weights
from heatmap.heatmap import peak_pixels
from inference.body import default_body_model, load_body_model
from inference.grid import RefinementSchedule
from synth.corpus import SceneConfig, generate_frame, read_corpus
from utils.errors import ConfigError, DataError
from utils.logging import configure_logging
from .methods import FUSION_VARIANTS, METHOD_HANDLERS, method_family, parse_method_key
from .metrics import EvalReport, head_threshold, jdr, per_joint_errors, pixel_quantization_floor

logger = configure_logging(__name__)

DEFAULT_METHODS = ("single-triangulate", "single-psm", "single-rpsm")
DEFAULT_ITERATIONS = (0, 1, 3, 5, 10)

# Settings that change where or how fast a benchmark runs, never what it reports
RUNTIME_KEYS = ("workers", "output_dir")


@dataclass(frozen=True)
class BenchConfig:
    seed: int = DEFAULT_SEED
    frames: int = 10
    corpus: str = None
    body_model: str = None
    scene: SceneConfig = field(default_factory=SceneConfig)
    methods: tuple = DEFAULT_METHODS
    iterations: tuple = DEFAULT_ITERATIONS
    initial_edge_length: float = RPSM_INITIAL_EDGE_LENGTH
    initial_bins: int = RPSM_INITIAL_BINS
    refine_bins: int = RPSM_REFINE_BINS
    fusion_kernel_sigma: float = FUSION_KERNEL_SIGMA_CELLS
    jdr_threshold: float = None
    workers: int = WORKERS
    output_dir: str = None

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "iterations", tuple(sorted(set(int(t) for t in self.iterations))))
        if not self.methods:
            raise ConfigError("A benchmark needs at least one method")
        for method_key in self.methods:
            parse_method_key(method_key)
        if any(t < 0 for t in self.iterations) or not self.iterations:
            raise ConfigError("Iterations must be a non-empty list of non-negative integers")
        if self.frames is not None and self.frames < 1:
            raise ConfigError("A benchmark needs at least one frame")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.fusion_kernel_sigma <= 0:
            raise ConfigError("fusion_kernel_sigma must be positive")
        if self.jdr_threshold is not None and self.jdr_threshold <= 0:
            raise ConfigError("jdr_threshold must be positive")

    @classmethod
    def from_dict(cls, document):
        document = dict(document)
        unknown = sorted(set(document) - set(cls.__dataclass_fields__))
        if unknown:
            raise ConfigError(f"Unknown benchmark settings {unknown}")
        scene = SceneConfig.from_dict(document.pop("scene", {}))
        try:
            return cls(scene=scene, **document)
        except TypeError as e:
            raise ConfigError(f"Bad benchmark settings: {e}") from e

    def as_dict(self):
        """Config echo for reports; runtime-only settings are left out."""
        return {
            "seed": self.seed,
            "frames": self.frames,
            "corpus": self.corpus,
            "body_model": self.body_model,
            "scene": self.scene.as_dict() if self.corpus is None else None,
            "methods": list(self.methods),
            "iterations": list(self.iterations),
            "initial_edge_length": self.initial_edge_length,
            "initial_bins": self.initial_bins,
            "refine_bins": self.refine_bins,
            "fusion_kernel_sigma": self.fusion_kernel_sigma,
            "jdr_threshold": self.jdr_threshold,
        }

    def schedule(self, iterations):
        return RefinementSchedule(
            initial_edge_length=self.initial_edge_length,
            initial_bins=self.initial_bins,
            refine_bins=self.refine_bins,
            iterations=iterations,
        )


def load_bench_config(path, **overrides):
    """
    Read a JSON benchmark config; `overrides` that are not None replace file values.

    Throws:
    - ConfigError: malformed file or settings
    """
    try:
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from e
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    document.update({key: value for key, value in overrides.items() if value is not None})
    return BenchConfig.from_dict(document)


def row_labels(method_key, iterations):
    """Report rows of one method key: one per requested T for `rpsm`."""
    _, handler_key = parse_method_key(method_key)
    if handler_key == "rpsm":
        return [(f"{method_key}-T{t}", t) for t in iterations]
    return [(method_key, 0)]


@dataclass(frozen=True, eq=False)
class FrameResult:
    """
    Everything measured on one frame; aggregation only ever reads these.
    """

    frame_id: str
    errors: dict  # row label -> (M,) joint errors
    stage_mpjpe: dict  # (fusion key, family) -> MPJPE after every stage
    stage_ms: dict  # (fusion key, family) -> wall-clock per stage
    fusion_ms: dict  # fusion key -> wall-clock of fusion
    detections: dict  # fusion key -> (V, M, 2) peak pixels
    projections: np.ndarray
    occluded: np.ndarray
    threshold: float
    floor: float


class Benchmark:
    """
    One benchmark run: the corpus (or generator), the body model, the fusion weights,
    and one handler per (fusion variant, method family).
    """

    def __init__(self, config):
        self.config = config
        self.corpus = None
        if config.corpus is not None:
            self.corpus = read_corpus(config.corpus, config.body_model)
            self.cameras, self.graph, self.priors = self.corpus.cameras, self.corpus.graph, self.corpus.priors
            frame_ids = self.corpus.frame_ids
            self.frame_ids = frame_ids[: config.frames] if config.frames else frame_ids
            sample, _ = self.corpus.load_frame(self.frame_ids[0])
            dims, stride = sample.map_shape, sample.stride
        else:
            if config.body_model:
                self.graph, self.priors = load_body_model(config.body_model)
            else:
                self.graph, self.priors = default_body_model()
            self.cameras = config.scene.rig()
            self.frame_ids = [f"{frame:06d}" for frame in range(config.frames)]
            stride = config.scene.stride
            dims = (config.scene.image_height // stride, config.scene.image_width // stride)

        self.rows = []
        runs = {}
        for method_key in config.methods:
            fusion_key, handler_key = parse_method_key(method_key)
            family = method_family(handler_key)
            needed = max(config.iterations) if handler_key == "rpsm" else 0
            current = runs.get((fusion_key, family))
            if current is None or needed > current[1]:
                runs[(fusion_key, family)] = (handler_key, needed)
            for label, stage in row_labels(method_key, config.iterations):
                self.rows.append((label, fusion_key, family, stage))

        self.handlers = {}
        for (fusion_key, family), (handler_key, iterations) in runs.items():
            handler_class = METHOD_HANDLERS[handler_key]
            if family == "pictorial":
                self.handlers[(fusion_key, family)] = handler_class(config.schedule(iterations))
            else:
                self.handlers[(fusion_key, family)] = handler_class()
        self.fusion_keys = sorted({fusion_key for fusion_key, _ in self.handlers})

        self.weights = {}
        if any(FUSION_VARIANTS[key] is not FusionMode.IDENTITY for key in self.fusion_keys):
            self.weights = build_all_weights(
                self.cameras, dims, stride, config.fusion_kernel_sigma * stride
            )

    def _frame(self, index):
        frame_id = self.frame_ids[index]
        if self.corpus is not None:
            heatmap_set, truth = self.corpus.load_frame(frame_id)
        else:
            heatmap_set, truth = generate_frame(
                self.config.scene, self.cameras, self.graph, self.priors, index, self.config.seed
            )
        if truth is None:
            raise DataError(f"Frame {frame_id} has no truth file; benchmarks need ground truth")
        return frame_id, heatmap_set, truth

    def evaluate_frame(self, index):
        frame_id, heatmap_set, truth = self._frame(index)

        fused, fusion_ms, detections = {}, {}, {}
        for fusion_key in self.fusion_keys:
            started = time.perf_counter()
            fused[fusion_key] = fuse_heatmaps(heatmap_set, self.weights, FUSION_VARIANTS[fusion_key])
            fusion_ms[fusion_key] = (time.perf_counter() - started) * 1000.0
            detections[fusion_key] = peak_pixels(fused[fusion_key])[0]

        stage_errors, stage_mpjpe, stage_ms = {}, {}, {}
        for run_key, handler in self.handlers.items():
            outcome = handler.reconstruct(fused[run_key[0]], self.graph, self.priors)
            stage_errors[run_key] = [per_joint_errors(pose, truth.pose) for pose in outcome.stage_poses]
            stage_mpjpe[run_key] = [float(errors.mean()) for errors in stage_errors[run_key]]
            stage_ms[run_key] = list(outcome.stage_ms)
            if not outcome.feasible:
                logger.warning("Frame %s: %s/%s fell back to the unary argmax", frame_id, *run_key)

        errors = {
            label: stage_errors[(fusion_key, family)][stage]
            for label, fusion_key, family, stage in self.rows
        }
        if self.config.jdr_threshold is not None:
            threshold = float(self.config.jdr_threshold)
        else:
            threshold = head_threshold(truth.projections, self.graph)
        logger.info("Evaluated frame %s", frame_id)
        return FrameResult(
            frame_id=frame_id,
            errors=errors,
            stage_mpjpe=stage_mpjpe,
            stage_ms=stage_ms,
            fusion_ms=fusion_ms,
            detections=detections,
            projections=truth.projections,
            occluded=truth.occluded,
            threshold=threshold,
            floor=pixel_quantization_floor(truth.pose, self.cameras, heatmap_set.stride),
        )

    def run(self):
        """
        Evaluate every frame (in parallel when workers > 1) and aggregate in frame order.

        Returns:
        - tuple: (dict row label -> EvalReport, list of FrameResult)
        """
        logger.info(
            "Benchmarking %d frames with %s on %d workers",
            len(self.frame_ids),
            ", ".join(self.config.methods),
            self.config.workers,
        )
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            frames = list(pool.map(self.evaluate_frame, range(len(self.frame_ids))))
        return self.aggregate(frames), frames

    def aggregate(self, frames):
        projections = np.stack([frame.projections for frame in frames])
        occluded = np.stack([frame.occluded for frame in frames])
        thresholds = np.array([frame.threshold for frame in frames])
        hidden_projections = np.where(occluded[..., None], projections, np.nan)

        reports = {}
        for label, fusion_key, family, stage in self.rows:
            run_key = (fusion_key, family)
            detections = np.stack([frame.detections[fusion_key] for frame in frames])
            reports[label] = EvalReport(
                method=label,
                joint_names=list(self.graph.joint_names),
                per_joint_mpjpe=np.mean([frame.errors[label] for frame in frames], axis=0),
                per_joint_jdr=jdr(detections, projections, thresholds),
                occluded_jdr=jdr(detections, hidden_projections, thresholds),
                stage_mpjpe=np.mean([frame.stage_mpjpe[run_key][: stage + 1] for frame in frames], axis=0).tolist(),
                stage_ms=np.mean([frame.stage_ms[run_key][: stage + 1] for frame in frames], axis=0).tolist(),
                frames=len(frames),
                config=self.config.as_dict(),
            )
        return reports


def write_outputs(output_dir, config, reports, frames):
    os.makedirs(output_dir, exist_ok=True)
    document = {
        "config": config.as_dict(),
        "pixel_quantization_floor": float(np.mean([frame.floor for frame in frames])),
        "methods": {label: report.as_dict() for label, report in reports.items()},
    }
    with open(os.path.join(output_dir, "report.json"), "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=2, sort_keys=True)
        handle.write("\n")

    with open(os.path.join(output_dir, "frames.csv"), "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["frame", "method", "joint", "error_mm"])
        for frame in frames:
            for label in reports:
                for name, error in zip(reports[label].joint_names, frame.errors[label]):
                    writer.writerow([frame.frame_id, label, name, repr(float(error))])

    timings = {
        "stage_ms": {label: report.stage_ms for label, report in reports.items()},
        "fusion_ms": {
            key: float(np.mean([frame.fusion_ms[key] for frame in frames]))
            for key in frames[0].fusion_ms
        },
    }
    with open(os.path.join(output_dir, "timings.json"), "w", encoding="utf-8") as handle:
        json.dump(timings, handle, indent=2, sort_keys=True)
    logger.info("Wrote benchmark report to %s", output_dir)


def run_benchmark(config):
    """
    Run a benchmark and, when `config.output_dir` is set, write its outputs.

    Parameters:
    - config (BenchConfig): what to run

    Returns:
    - dict: row label -> EvalReport, in method order

    Throws:
    - ConfigError: invalid settings or corpus
    - DataError: frames that cannot be processed
    """
    benchmark = Benchmark(config)
    reports, frames = benchmark.run()
    if config.output_dir:
        write_outputs(config.output_dir, config, reports, frames)
    for label, report in reports.items():
        logger.info("%s: MPJPE %.2f mm, JDR %s", label, report.mpjpe, report.jdr)
    return reports

"""
A class to parse and execute command-line subcommands.
"""

import argparse
import glob
import json
import os
from config import (
    DEFAULT_SEED,
    FUSION_KERNEL_SIGMA_CELLS,
    RPSM_INITIAL_BINS,
    RPSM_INITIAL_EDGE_LENGTH,
    RPSM_ITERATIONS,
    RPSM_REFINE_BINS,
)
from fusion.dump import load_weights, save_weights
from fusion.fuse import FusionMode, fuse_heatmaps
from fusion.weights import build_all_weights
from geometry.camera_file import load_cameras
from harness.bench import load_bench_config, run_benchmark
from harness.methods import METHOD_HANDLERS
from harness.metrics import per_joint_errors
from heatmap.dump import load_heatmaps, save_heatmaps
from inference.body import default_body_model, load_body_model
from inference.grid import RefinementSchedule
from inference.pose_file import read_pose, write_pose
from synth.corpus import SceneConfig, truth_from_record, write_corpus
from utils.errors import ConfigError, DataError
from utils.logging import configure_logging

logger = configure_logging(__name__)


def _read_json(path, error=ConfigError):
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as e:
        raise error(f"{path}: invalid JSON: {e}") from e


def _body_model(path):
    return load_body_model(path) if path else default_body_model()


def _load_truth(path):
    return truth_from_record(_read_json(path, DataError))


class CommandParser:
    """
    Parse and execute `synth`, `fuse`, `reconstruct`, `eval`, and `bench`.
    """

    def __init__(self, out=print):
        """
        Parameters:
        - out (callable): receives the text results of `eval` and `bench`
        """
        self.out = out
        self.parser = self.build_parser()

    @staticmethod
    def build_parser():
        parser = argparse.ArgumentParser(
            prog="crossview-pose",
            description="Multi-view 3D human pose reconstruction with cross-view fusion and RPSM.",
        )
        commands = parser.add_subparsers(dest="command", required=True)

        synth = commands.add_parser("synth", help="generate a synthetic scene corpus")
        synth.add_argument("--output", required=True, help="corpus directory")
        synth.add_argument("--frames", type=int, default=10)
        synth.add_argument("--config", help="JSON scene settings (rig, stride, render_sigma, noise)")
        synth.add_argument("--body-model", help="JSON body model (default: built-in 17 joints)")
        synth.add_argument("--jitter", type=float, help="center jitter sigma, px")
        synth.add_argument("--drop-prob", type=float, help="peak-drop probability")
        synth.add_argument("--drop-joints", nargs="+", help="joints peak-drop applies to")
        synth.add_argument("--distractor-prob", type=float, help="distractor probability")
        synth.add_argument("--distractor-mode", choices=["random", "symmetric"])

        fuse = commands.add_parser("fuse", help="cross-view fusion of a heatmap dump")
        fuse.add_argument("--input", required=True, help="heatmap manifest")
        fuse.add_argument("--cameras", required=True, help="camera file")
        fuse.add_argument("--output", required=True, help="fused heatmap manifest")
        fuse.add_argument("--mode", choices=[mode.value for mode in FusionMode], default="weighted")
        fuse.add_argument(
            "--sigma", type=float, default=FUSION_KERNEL_SIGMA_CELLS, help="kernel sigma, heatmap cells"
        )
        fuse.add_argument("--weights", help="directory of weight dumps to use instead of geometry")
        fuse.add_argument("--save-weights", help="directory to dump the weights used")

        reconstruct = commands.add_parser("reconstruct", help="3D pose from a heatmap dump")
        reconstruct.add_argument("--input", required=True, help="heatmap manifest")
        reconstruct.add_argument("--cameras", required=True, help="camera file")
        reconstruct.add_argument("--output", required=True, help="pose file")
        reconstruct.add_argument("--method", choices=sorted(METHOD_HANDLERS), default="rpsm")
        reconstruct.add_argument("--iterations", type=int, default=RPSM_ITERATIONS, help="RPSM stages T")
        reconstruct.add_argument("--bins", type=int, default=RPSM_INITIAL_BINS, help="stage-0 bins per axis N0")
        reconstruct.add_argument("--refine-bins", type=int, default=RPSM_REFINE_BINS)
        reconstruct.add_argument("--edge-length", type=float, default=RPSM_INITIAL_EDGE_LENGTH, help="mm")
        reconstruct.add_argument("--body-model", help="JSON body model")
        reconstruct.add_argument("--truth", help="truth file; adds per-stage MPJPE to the header")

        evaluate = commands.add_parser("eval", help="MPJPE of a pose file against a truth file")
        evaluate.add_argument("--pose", required=True)
        evaluate.add_argument("--truth", required=True)

        bench = commands.add_parser("bench", help="run a benchmark config")
        bench.add_argument("--config", required=True, help="JSON benchmark config")
        bench.add_argument("--workers", type=int)
        bench.add_argument("--output-dir")

        for command in (synth, fuse, reconstruct, evaluate, bench):
            command.add_argument(
                "--seed",
                type=int,
                default=None,
                help=f"random seed (default {DEFAULT_SEED}); only synth and bench draw random numbers",
            )
        return parser

    def execute_command(self, argv=None):
        """
        Parse and execute one subcommand.

        Parameters:
        - argv (list of str): arguments without the program name (default: sys.argv)

        Returns:
        - None

        Throws:
        - ConfigError, DataError: reported by the caller as exit codes 2 and 3
        """
        args = self.parser.parse_args(argv)
        logger.debug("Running `%s`", args.command)
        {
            "synth": self.synth,
            "fuse": self.fuse,
            "reconstruct": self.reconstruct,
            "eval": self.evaluate,
            "bench": self.bench,
        }[args.command](args)

    def synth(self, args):
        document = _read_json(args.config) if args.config else {}
        noise = dict(document.get("noise", {}))
        for key, value in (
            ("jitter_sigma", args.jitter),
            ("drop_prob", args.drop_prob),
            ("drop_joints", args.drop_joints),
            ("distractor_prob", args.distractor_prob),
            ("distractor_mode", args.distractor_mode),
        ):
            if value is not None:
                noise[key] = value
        scene = SceneConfig.from_dict({**document, "noise": noise})
        graph, priors = _body_model(args.body_model)
        seed = DEFAULT_SEED if args.seed is None else args.seed
        write_corpus(args.output, scene, graph, priors, args.frames, seed)

    def _weights(self, args, heatmap_set):
        if args.weights:
            manifests = sorted(glob.glob(os.path.join(args.weights, "*.json")))
            if not manifests:
                raise ConfigError(f"{args.weights}: no weight manifests")
            return {(w.target, w.source): w for w in map(load_weights, manifests)}
        return build_all_weights(
            heatmap_set.cameras, heatmap_set.map_shape, heatmap_set.stride, args.sigma * heatmap_set.stride
        )

    def fuse(self, args):
        if args.sigma <= 0:
            raise ConfigError("--sigma must be positive")
        heatmap_set = load_heatmaps(args.input, load_cameras(args.cameras))
        mode = FusionMode(args.mode)
        weights = {} if mode is FusionMode.IDENTITY else self._weights(args, heatmap_set)
        fused = fuse_heatmaps(heatmap_set, weights, mode)
        save_heatmaps(fused, args.output)
        if args.save_weights:
            os.makedirs(args.save_weights, exist_ok=True)
            for (target, source), fusion_weights in weights.items():
                save_weights(fusion_weights, os.path.join(args.save_weights, f"{target}__{source}.json"))
        logger.info("Fused %s with mode %s into %s", args.input, mode.value, args.output)

    def reconstruct(self, args):
        graph, priors = _body_model(args.body_model)
        heatmap_set = load_heatmaps(args.input, load_cameras(args.cameras))
        if heatmap_set.num_joints != graph.num_joints:
            raise DataError(
                f"{args.input} holds {heatmap_set.num_joints} joints, the body model {graph.num_joints}"
            )
        handler_class = METHOD_HANDLERS[args.method]
        if args.method == "triangulate":
            handler = handler_class()
        else:
            handler = handler_class(
                RefinementSchedule(
                    initial_edge_length=args.edge_length,
                    initial_bins=args.bins,
                    refine_bins=args.refine_bins,
                    iterations=args.iterations if args.method == "rpsm" else 0,
                )
            )
        outcome = handler.reconstruct(heatmap_set, graph, priors)

        metadata = handler.metadata()
        metadata["feasible"] = outcome.feasible
        if outcome.score is not None:
            metadata["score"] = outcome.score
        if args.truth:
            truth = _load_truth(args.truth)
            metadata["stage_mpjpe"] = [
                float(per_joint_errors(pose, truth.pose).mean()) for pose in outcome.stage_poses
            ]
        write_pose(args.output, outcome.pose, graph.joint_names, metadata)
        logger.info("Wrote %s pose to %s", metadata["method"], args.output)

    def evaluate(self, args):
        pose, names, _ = read_pose(args.pose)
        truth_record = _read_json(args.truth, DataError)
        truth = truth_from_record(truth_record)
        truth_names = truth_record.get("joints", names)
        if list(names) != list(truth_names):
            raise DataError(f"{args.pose} and {args.truth} list different joints")
        errors = per_joint_errors(pose, truth.pose)
        self.out(
            json.dumps(
                {
                    "mpjpe": float(errors.mean()),
                    "per_joint_mpjpe": {name: float(error) for name, error in zip(names, errors)},
                },
                indent=2,
                sort_keys=True,
            )
        )

    def bench(self, args):
        config = load_bench_config(
            args.config, seed=args.seed, workers=args.workers, output_dir=args.output_dir
        )
        reports = run_benchmark(config)
        lines = [f"{'method':<28} {'MPJPE (mm)':>11} {'JDR (%)':>8}"]
        for label, report in reports.items():
            jdr_text = "-" if report.jdr is None else f"{report.jdr:.2f}"
            lines.append(f"{label:<28} {report.mpjpe:>11.2f} {jdr_text:>8}")
        self.out("\n".join(lines))

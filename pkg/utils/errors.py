"""
Exception hierarchy shared by every package.

`ConfigError` maps to CLI exit code 2, every `DataError` to exit code 3.
"""


class PoseEngineError(Exception):
    """Base class for all errors raised by this project."""


class ConfigError(PoseEngineError):
    """Invalid configuration value, missing config key, or malformed config file."""


class DataError(PoseEngineError):
    """Input data (cameras, heatmaps, poses) cannot be processed."""


class GeometryError(DataError):
    """Base class for camera geometry failures."""


class DegenerateDepth(GeometryError):
    """A point lies on or behind the camera plane."""


class CoincidentCameras(GeometryError):
    """Two cameras share a center, so no epipolar geometry exists."""


class DegenerateLine(GeometryError):
    """A pixel sits on the epipole and maps to no epipolar line."""


class IllConditioned(GeometryError):
    """Triangulation rays are (nearly) parallel."""


class InsufficientViews(IllConditioned):
    """Fewer than two usable observations remain for triangulation."""


class FusionError(DataError):
    """Base class for cross-view fusion failures."""


class MissingWeights(FusionError):
    """Fusion weights are missing for an ordered view pair."""


class DimensionMismatch(FusionError):
    """Heatmap dimensions disagree with each other or with the weights."""


class SingularSystem(FusionError):
    """An unregularized least-squares row has a singular normal matrix."""


class JointCountMismatch(DataError):
    """Two poses do not hold the same number of joints."""

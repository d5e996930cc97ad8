"""
Define reconstruction handlers and fusion variants for each benchmark method key.
"""

from fusion.fuse import FusionMode
from handlers.pictorial import PictorialHandler
from handlers.triangulate import TriangulationHandler
from utils.errors import ConfigError

# Each handler implements `reconstruct`. `psm` and `rpsm` share the pictorial handler;
# the benchmark reads PSM as stage 0 of the recursive run.
# e.g.: "single-triangulate" -> no fusion, TriangulationHandler()
#       "fusion-rpsm"        -> weighted fusion, PictorialHandler()
METHOD_HANDLERS = {
    "triangulate": TriangulationHandler,
    "psm": PictorialHandler,
    "rpsm": PictorialHandler,
}

FUSION_VARIANTS = {
    "single": FusionMode.IDENTITY,
    "fusion": FusionMode.WEIGHTED,
    "line-sum": FusionMode.LINE_SUM,
    "line-max": FusionMode.LINE_MAX,
}


def parse_method_key(method_key):
    """
    Parse a benchmark method key into its components.

    Assumes:
    - The key is in the format `<fusion>-<method>`, where the fusion part may itself
      contain dashes (`line-sum-psm`)

    Parameters:
    - method_key (str): e.g. "fusion-rpsm"

    Returns:
    - fusion_key (str): e.g. "fusion"
    - handler_key (str): e.g. "rpsm"

    Throws:
    - ConfigError: unknown fusion variant or method
    """
    fusion_key, _, handler_key = method_key.rpartition("-")
    if fusion_key not in FUSION_VARIANTS:
        raise ConfigError(
            f"Unknown fusion variant in `{method_key}`; expected one of {sorted(FUSION_VARIANTS)}"
        )
    if handler_key not in METHOD_HANDLERS:
        raise ConfigError(
            f"Unknown method in `{method_key}`; expected one of {sorted(METHOD_HANDLERS)}"
        )
    return fusion_key, handler_key


def method_family(handler_key):
    """Methods of one family are served by a single reconstruction run per frame."""
    return "pictorial" if METHOD_HANDLERS[handler_key] is PictorialHandler else handler_key

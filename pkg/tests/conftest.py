import numpy as np
import pytest
from fusion.weights import build_all_weights
from inference.body import DEFAULT_SKELETON, body_from_skeleton
from synth.corpus import SceneConfig, generate_frame
from synth.render import NoiseModel
from synth.rig import generate_rig

TARGET = (0.0, 0.0, 1000.0)


@pytest.fixture(scope="session")
def body_model():
    return body_from_skeleton(DEFAULT_SKELETON)


@pytest.fixture(scope="session")
def rig():
    return generate_rig(4, 3000.0, TARGET, (320, 320), 400.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def noiseless_scene(body_model, rig):
    """Default 80x80 maps, no noise."""
    graph, priors = body_model
    scene = SceneConfig(stride=4, render_sigma=8.0, noise=NoiseModel())
    return generate_frame(scene, rig, graph, priors, 0, 7)


@pytest.fixture(scope="session")
def coarse_scene(body_model, rig):
    """40x40 maps, no noise."""
    graph, priors = body_model
    scene = SceneConfig(stride=8, render_sigma=8.0, noise=NoiseModel())
    return generate_frame(scene, rig, graph, priors, 0, 11)


@pytest.fixture(scope="session")
def coarse_weights(rig):
    return build_all_weights(rig, (40, 40), 8.0, 1.5 * 8.0)

"""
App configuration file. Load environment variables from .env file.
"""

import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
LOG_TIMEZONE = os.getenv("LOG_TIMEZONE", "UTC")

DEFAULT_SEED = int(os.getenv("DEFAULT_SEED", "0"))
WORKERS = max(1, int(os.getenv("WORKERS", "1")))

# Recursive pictorial structure schedule
RPSM_INITIAL_EDGE_LENGTH = float(os.getenv("RPSM_INITIAL_EDGE_LENGTH", "2000"))
RPSM_INITIAL_BINS = abs(int(os.getenv("RPSM_INITIAL_BINS", "16")))
RPSM_REFINE_BINS = abs(int(os.getenv("RPSM_REFINE_BINS", "2")))
RPSM_ITERATIONS = abs(int(os.getenv("RPSM_ITERATIONS", "10")))
LIMB_TOLERANCE = float(os.getenv("LIMB_TOLERANCE", "150"))

# Upper bound on the number of (parent, child) entries held in memory per DP block
DP_CHUNK_ELEMENTS = abs(int(os.getenv("DP_CHUNK_ELEMENTS", "4194304")))

# Optional JSON body model overriding the built-in 17-joint tree
BODY_MODEL_PATH = os.getenv("BODY_MODEL_PATH")

HEATMAP_STRIDE = abs(int(os.getenv("HEATMAP_STRIDE", "4")))
RENDER_SIGMA = float(os.getenv("RENDER_SIGMA", "8"))  # image pixels
FUSION_KERNEL_SIGMA_CELLS = float(os.getenv("FUSION_KERNEL_SIGMA_CELLS", "1.5"))

RIG_NUM_CAMERAS = abs(int(os.getenv("RIG_NUM_CAMERAS", "4")))
RIG_RADIUS = float(os.getenv("RIG_RADIUS", "3000"))
RIG_FOCAL = float(os.getenv("RIG_FOCAL", "400"))
RIG_IMAGE_WIDTH = abs(int(os.getenv("RIG_IMAGE_WIDTH", "320")))
RIG_IMAGE_HEIGHT = abs(int(os.getenv("RIG_IMAGE_HEIGHT", "320")))
RIG_TARGET = tuple(
    float(value) for value in os.getenv("RIG_TARGET", "0,0,1000").split(",")
)

# Process exit codes used by the CLI
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_DATA_ERROR = 3

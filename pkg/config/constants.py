"""
Constants and Configuration for the Kleinian Group Toolkit
"""

# Application metadata
APP_NAME = "Kleinian Group Toolkit"
APP_VERSION = "1.0.0"
ENV_PREFIX = "KLEINIAN_"

# Projective tolerances
PROJ_EQ_TOL = 1e-9
DEDUP_GRID = 1e-7
EIGEN_RESIDUAL_TOL = 1e-6
INCIDENCE_TOL = 1e-12
INVOLUTION_TOL = 1e-12
CHART_DROP_TOL = 1e-6

# Moebius settings
TRACE_SQ_TOL = 1e-9
DET_TOL = 1e-12

# Tiling settings
TILE_ANGLE_TOL = 1e-9
MAX_TILES = 200_000

# Schottky settings
KISSING_TOL = 1e-9
SLOW_CONTRACTION_LAMBDA = 1.05
MAX_WORDS = 2_000_000

# Cluster detection (shared by Kulkarni and Chen-Greenberg approximations)
CLUSTER_K = 10
CLUSTER_EPS = 1e-2
NULL_TOL = 1e-6

# Kulkarni settings
L0_ORDER_PROBE = 1000
L1_OFFSET = 1e-2
M_MAX = 5
MAX_EXACT_LINES = 20

# Pappus settings
PAPPUS_MAX_DEPTH = 18

# Raster settings
DEFAULT_WIDTH = 512
DEFAULT_HEIGHT = 512
DEFAULT_VIEWPORT = (-2.0, -2.0, 2.0, 2.0)
DEFAULT_BACKGROUND = (255, 255, 255)
DEFAULT_FOREGROUND = (20, 20, 20)
LAYER_COLORS = {
    "L0": (214, 39, 40),
    "L1": (31, 119, 180),
    "L2": (44, 160, 44),
}

# Run defaults
DEFAULT_SEED = 0
DEFAULT_CHART = 2
DEFAULT_LOG_LEVEL = "WARNING"

# Exit codes
EXIT_OK = 0
EXIT_SCHEMA_ERROR = 2
EXIT_RESOURCE_ERROR = 3
EXIT_GEOMETRY_ERROR = 4
EXIT_IO_ERROR = 5

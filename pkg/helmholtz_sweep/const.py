"""Constants for the Helmholtz sweeping preconditioner package."""
DOMAIN = "helmholtz_sweep"

# Environment override prefix for configuration keys
ENV_PREFIX = "HSWEEP_"

# Problem configuration
CONF_OMEGA_OVER_2PI = "omega_over_2pi"
CONF_Q = "q"
CONF_N = "n"

# Media configuration
CONF_VELOCITY = "velocity"
CONF_VELOCITY_SEED = "velocity_seed"
CONF_VELOCITY_C0 = "velocity_c0"
CONF_VELOCITY_CENTER = "velocity_center"
CONF_VELOCITY_AMPLITUDE = "velocity_amplitude"
CONF_VELOCITY_SHARPNESS = "velocity_sharpness"
CONF_VELOCITY_SMOOTHING = "velocity_smoothing"
CONF_SOURCE = "source"
CONF_SOURCE_CENTER = "source_center"
CONF_SOURCE_DIRECTION = "source_direction"
CONF_SOURCE_NODE = "source_node"

# PML configuration
CONF_PML_LAYERS = "pml_layers"
CONF_AUX_PML_LAYERS = "aux_pml_layers"
CONF_PML_CONSTANT = "pml_constant"
CONF_PML_FACES = "pml_faces"

# Sweep and solver configuration
CONF_GROUP_SIZE = "group_size"
CONF_PRECONDITIONER = "preconditioner"
CONF_FRONTS = "fronts"
CONF_TOL = "tol"
CONF_RESTART = "restart"
CONF_MAX_ITER = "max_iter"
CONF_DENSE_THRESHOLD = "dense_threshold"

# Output configuration
CONF_OUTPUT_DIR = "output_dir"
CONF_REPORT_NAME = "report_name"
CONF_SLICES = "slices"
CONF_SAVE_SOLUTION = "save_solution"
CONF_STUDY_WORKERS = "study_workers"

# Velocity kinds
VELOCITY_LENS = "lens"
VELOCITY_WAVEGUIDE = "waveguide"
VELOCITY_RANDOM = "random"
VELOCITY_CONSTANT = "constant"
VELOCITY_CUSTOM = "custom"
VELOCITY_KINDS = [
    VELOCITY_LENS,
    VELOCITY_WAVEGUIDE,
    VELOCITY_RANDOM,
    VELOCITY_CONSTANT,
]

# Source kinds
SOURCE_POINT_GAUSSIAN = "point_gaussian"
SOURCE_WAVE_PACKET = "wave_packet"
SOURCE_DELTA = "delta"
SOURCE_CUSTOM = "custom"
SOURCE_KINDS = [SOURCE_POINT_GAUSSIAN, SOURCE_WAVE_PACKET, SOURCE_DELTA]

# Preconditioner variants
PRECONDITIONER_RECURSIVE = "recursive"
PRECONDITIONER_NONRECURSIVE = "nonrecursive"
PRECONDITIONER_EXACT_SWEEP = "exact_sweep"
PRECONDITIONER_NONE = "none"
PRECONDITIONERS = [
    PRECONDITIONER_RECURSIVE,
    PRECONDITIONER_NONRECURSIVE,
    PRECONDITIONER_EXACT_SWEEP,
    PRECONDITIONER_NONE,
]

# Sweep fronts and modes
FRONTS_ONE = "one"
FRONTS_TWO = "two"
FRONTS = [FRONTS_ONE, FRONTS_TWO]
MODE_APPROXIMATE = "approximate"
MODE_EXACT = "exact"
MODES = [MODE_APPROXIMATE, MODE_EXACT]

# Where a subproblem's moving PML attaches
FRONT_BOUNDARY = "boundary"
FRONT_LOW = "low"
FRONT_HIGH = "high"
FRONT_BOTH = "both"

# Cube faces, named by axis (1-based as in x1, x2, x3) and side
FACE_NAMES = [
    "x1_low",
    "x1_high",
    "x2_low",
    "x2_high",
    "x3_low",
    "x3_high",
]
# The recursive sweep eliminates along x3 first and x2 second
REQUIRED_PML_FACES = ["x2_low", "x3_low"]

# Defaults (reference benchmark preset)
DEFAULT_OMEGA_OVER_2PI = 4.0
DEFAULT_Q = 8
DEFAULT_VELOCITY = VELOCITY_LENS
DEFAULT_VELOCITY_C0 = 1.0
DEFAULT_VELOCITY_CENTER = (0.5, 0.5, 0.5)
DEFAULT_VELOCITY_AMPLITUDE = 0.25
DEFAULT_VELOCITY_SHARPNESS = 32.0
DEFAULT_VELOCITY_SMOOTHING = 2.0  # grid cells
DEFAULT_SOURCE = SOURCE_POINT_GAUSSIAN
DEFAULT_POINT_SOURCE_CENTER = (0.5, 0.5, 0.25)
DEFAULT_WAVE_PACKET_CENTER = (0.5, 0.25, 0.25)
DEFAULT_SOURCE_DIRECTION = (0.0, 0.5 ** 0.5, 0.5 ** 0.5)
DEFAULT_PML_LAYERS = 9
DEFAULT_AUX_PML_LAYERS = 5
DEFAULT_PML_CONSTANT = 25.0
DEFAULT_PML_FACES = list(FACE_NAMES)
DEFAULT_GROUP_SIZE = 4
DEFAULT_PRECONDITIONER = PRECONDITIONER_RECURSIVE
DEFAULT_FRONTS = FRONTS_TWO
DEFAULT_TOL = 1e-3
DEFAULT_RESTART = 40
DEFAULT_MAX_ITER = 400
# Subproblems with fewer unknowns use a dense LU
DEFAULT_DENSE_THRESHOLD = 2000
DEFAULT_OUTPUT_DIR = "."
DEFAULT_REPORT_NAME = "report.csv"
DEFAULT_SAVE_SOLUTION = False
DEFAULT_STUDY_WORKERS = 1

# Random velocity clamp, as a fraction of the background speed
RANDOM_VELOCITY_BOUNDS = (0.5, 2.0)

# Lens and waveguide profile: background speed and relative dip
LENS_BACKGROUND = 4.0 / 3.0
LENS_DEPTH = 0.5

# GMRES orthogonality drop test
REORTH_DROP_TOLERANCE = 1e-3
# Ratio between true and estimated residual that is reported as a mismatch
RESIDUAL_MISMATCH_FACTOR = 10.0

# HSW1 field format
HSW_MAGIC = b"HSW1"
HSW_TAG_FLOAT64 = 1
HSW_TAG_COMPLEX128 = 2
HSW_EXTENSION = ".hsw"

# Slice planes
PLANES = ["x1", "x2", "x3"]
SLICE_MIDPOINT = "mid"
DEFAULT_SLICES = ["x1:mid"]

# Configuration values that identify a report row
ROW_KEY_FIELDS = [
    CONF_OMEGA_OVER_2PI,
    CONF_Q,
    CONF_N,
    CONF_VELOCITY,
    CONF_VELOCITY_SEED,
    CONF_SOURCE,
    CONF_PRECONDITIONER,
    CONF_FRONTS,
    CONF_AUX_PML_LAYERS,
]

# Report rows
STATUS_FAILED = "failed"
STATUS_NOT_CONVERGED = "not_converged"
STATUS_CONVERGED = "converged"

# Status priority (higher index = better outcome, rows never go backwards)
STATUS_PRIORITY = {
    STATUS_FAILED: 0,
    STATUS_NOT_CONVERGED: 1,
    STATUS_CONVERGED: 2,
}

ATTR_KEY = "key"
ATTR_OMEGA_OVER_2PI = "omega_over_2pi"
ATTR_Q = "q"
ATTR_N = "n"
ATTR_UNKNOWNS = "N"
ATTR_PRECONDITIONER = "preconditioner"
ATTR_FRONTS = "fronts"
ATTR_AUX_PML_LAYERS = "aux_pml_layers"
ATTR_T_SETUP = "t_setup"
ATTR_N_ITER = "n_iter"
ATTR_T_SOLVE = "t_solve"
ATTR_FINAL_RESIDUAL = "final_residual"
ATTR_PEAK_MEMORY = "peak_memory"
ATTR_STATUS = "status"
ATTR_ERROR = "error"

# CSV column order of report rows
REPORT_COLUMNS = [
    ATTR_KEY,
    ATTR_OMEGA_OVER_2PI,
    ATTR_Q,
    ATTR_N,
    ATTR_UNKNOWNS,
    ATTR_PRECONDITIONER,
    ATTR_FRONTS,
    ATTR_AUX_PML_LAYERS,
    ATTR_T_SETUP,
    ATTR_N_ITER,
    ATTR_T_SOLVE,
    ATTR_FINAL_RESIDUAL,
    ATTR_PEAK_MEMORY,
    ATTR_STATUS,
    ATTR_ERROR,
]

# CLI exit codes
EXIT_CONVERGED = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2

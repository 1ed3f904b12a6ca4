import os
from pathlib import Path

from dotenv import load_dotenv

# Project paths
PROJECT_ROOT = Path(__file__).parent.parent
DATA_DIR = PROJECT_ROOT / "data"

load_dotenv(PROJECT_ROOT / ".env")

# Environment overrides: HP_OUTPUT_DIR for results, HP_LOG_LEVEL below for logging
RESULTS_DIR = Path(os.getenv("HP_OUTPUT_DIR", str(DATA_DIR / "results")))

# Ensure directories exist
RESULTS_DIR.mkdir(parents=True, exist_ok=True)

# Desk-scale caps
MAX_N_ENSEMBLE = 500
MAX_N_SAMPLER = 200
MAX_CORRELATION_POINTS = 8
MAX_CORRELATION_ORDER = 3
BESSEL_MAX_ORDER = 50.0
FREDHOLM_MAX_ORDER = 400
FREDHOLM_DEFAULT_ORDER = 60

# Series and special functions
POLE_TOL = 1e-14  # terminating 2F1
GAMMA_POLE_TOL = 1e-12  # log-gamma and 1F1 lower parameter
SERIES_REL_TOL = 1e-15
SERIES_MAX_TERMS = 10_000
KUMMER_SERIES_SPREAD = 5.0  # |z| - Re z above which the Maclaurin series cancels
KUMMER_START_RADIUS = 2.0
TAYLOR_MAX_TERMS = 400

# Imaginary residues that must vanish for real quantities
IMAG_LEAK_POLY = 1e-9
IMAG_LEAK_NORM = 1e-10
IMAG_LEAK_PAINLEVE = 1e-6

# Kernels
DIAGONAL_SWITCH = 1e-8
NEGATIVE_DET_TOL = 1e-10
LIMIT_X_FLOOR = 0.01
RESCALE_THRESHOLD = 1e100
PAINLEVE_STEP_FACTOR = 1e-3

# Matrices
HERMITIAN_TOL = 1e-13
EIGEN_BACKWARD_TOL = 1e-12
INTERLACING_SLACK = 1e-12
DEGENERATE_TOL = 1e-12

# Ergodic functionals
SUMMARY_TOP_ENTRIES = 64  # minimum stored length of a+ and a-
FOURIER_TAIL_TOL = 1e-12

# Sampling
SAMPLE_CHUNK_SIZE = 256
DEFAULT_SEED = 20240101
DEFAULT_SAMPLES = 1000

# Supported output formats
RESULT_EXTENSION = ".csv"
MANIFEST_EXTENSION = ".manifest"
ARCHIVE_EXTENSION = ".jsonl"
DUMP_EXTENSION = ".bin"

# Logging configuration
LOG_LEVEL = os.getenv("HP_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

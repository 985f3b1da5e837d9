import math

REPORT_SCHEMA_VERSION = "1.0"

DEFAULT_K_FOLDS = 10
DEFAULT_T_OUT = 50
BANDWIDTH_EXPONENT = -1.0 / 3.0

QUADRATURE_POINTS = 2**14
FIT_QUADRATURE_POINTS = 2**12
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 60
POLE_TOL = 1e-13
# psi on every other quadrature node may differ by this fraction of 1 + |u| at an accepted root
RESOLUTION_TOL = 2e-2
CONTINUATION_STEP = 0.1
CONTINUATION_MAX_STEP = 0.25
CONTINUATION_MIN_STEP = 1e-4

SYMMETRY_TOL = 1e-8
PSD_CLIP_REL = 1e-10
TOEPLITZ_PSD_TOL = 1e-8
EIGENVALUE_CLIP_REL = 1e-12
WISHART_SINGULAR_REL = 1e-12
WISHART_MAX_ATTEMPTS = 5

DEGENERATE_BETA = 1e-14
LIMIT_DELTA = 1e-8
MIN_EFFECTIVE_FRACTION = 1e-3

# 60 log-spaced points in [0.05, 20]
DEFAULT_TAU_GRID = [0.05 * (400.0 ** (i / 59)) for i in range(60)]
DEFAULT_VARMA_AR_GRIDS = [[round(0.1 * i, 1) for i in range(7)]]
DEFAULT_VARMA_MA_GRIDS = [[round(0.5 + 0.1 * i, 1) for i in range(6)], [round(0.1 * i, 1) for i in range(7)]]

FROBENIUS_DECIMALS = 4
DENSITY_GRID_POINTS = 512
KERNEL_HALF_WIDTH = math.sqrt(5.0)

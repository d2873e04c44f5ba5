"""Numerical constants, default tolerances and environment variable names."""

import math

ZETA2 = math.pi**2 / 6
TWO_PI = 2 * math.pi

ORIENTATION_SCALE = -ZETA2 / 2

# geometry
DISTINCTNESS_TOL = 1e-10
GRID_MARGIN = 1e-3

# quadrature
ABS_TOL_CLOSED_FORM = 1e-10
ABS_TOL_PIPELINE = 1e-8
REL_TOL_DEFAULT = 1e-10
MAX_SUBDIVISIONS = 200
GRADED_MESH_LEVELS = 40
GAUSS_ORDER = 12
TABLE_DEGREE = 12
TABLE_LEVELS = 6
RADIAL_TABLE_DEGREE = 16
RADIAL_TABLE_LEVELS = 12
AVERAGE_TOL = 1e-6
BATCH_MAX_DEPTH = 20

# stability and continuity constants
STABILITY_EPSILON_FACTOR = 11.0
STABILITY_OFFSET_FACTOR = 6.0
CONTINUITY_RHS_FACTOR = 1 + 16 / math.sqrt(3)
CONTINUITY_OFFSET_FACTOR = 1 + 8 / math.sqrt(3)
FLAT_LIPSCHITZ_FACTOR = 4.0

# reference dilogarithm
LI2_SERIES_TERMS = 64
LI2_TAIL_TOL = 1e-17

# right-hand side validation
RHS_VALIDATION_POINTS = 20
RHS_VALIDATION_TOL = 1e-8

# default grids
UNIT_GRID_POINTS = 200
SIMPLEX_GRID_POINTS = 60
DEFAULT_XS = tuple(round(0.05 * k, 2) for k in range(1, 20))
SOLVER_XS = tuple(round(0.1 * k, 1) for k in range(1, 10))
SOLVE_RESIDUAL_PAIRS = 4

# identity check tolerances
FIVE_TERM_TOL = 1e-12
SIX_TERM_TOL = 1e-10
REFLECTION_TOL = 1e-13
COCYCLE_TOL = 1e-12
REFLECTION_TRIAL_TOL = 1e-9
EXACT_TOL = 1e-12
FINITE_DIFFERENCE_STEP = 1e-4

EVAL_ROGERS_MAX_DIFF = 1e-4

THREADS_ENV = "SPENCE_ABEL_THREADS"
CONFIG_ENV = "SPENCE_ABEL_CONFIG"

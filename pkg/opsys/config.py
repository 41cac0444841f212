import math

VERSION = "0.1.0"

# _______TOLERANCES_________
TOL_IDENTITY = 1e-9
TOL_PSD = 1e-7
TOL_MEMBERSHIP = 1e-10
TOL_ISOMETRY = 1e-12
TOL_CHAR_POLY = 1e-8
TOL_NARRATIVE = 1e-9
TOL_DISPLAY = 1e-10
TOL_SINGULAR_VALUES = 1e-9
TOL_NORM = 1e-6
TOL_UPSILON_PRIME_NORM = 1e-4
TOL_CHI = 1e-8
GRAM_SCHMIDT_DROP = 1e-10
RANGE_CUTOFF = 1e-10
BOUNDARY_MARGIN = 1e-6
CONTRADICTION_MARGIN = 1e-6

# _______BUDGETS_________
DEFAULT_SEED = 0
DEFAULT_TRIALS = 200
DEFAULT_RESTARTS = 12
# BFGS iterations per smoothing stage of the norm search
DEFAULT_ITERATIONS = 100
CONVERGENCE_TOL = 1e-9
# Schatten orders the norm search climbs through; the last stage is exact
NORM_SMOOTHING_ORDERS = (8, 32, 128, 512, 2048, 8192, 32768, 131072, math.inf)
NORM_FLOOR = 1e-300
MAX_N = 64
SUITE_N = (1, 2, 3, 4, 8, 16, 17)
# Sizes above this are skipped by the sampling-heavy suite steps.
SUITE_SAMPLING_MAX_N = 8
SUITE_NORM_MAX_N = 4
MAX_RECORDED_VIOLATIONS = 10

# _______THRESHOLDS_________
# Phi_n is obstructed once n exceeds this; Upsilon_n once n exceeds 1.
PHI_THRESHOLD = 16
UPSILON_THRESHOLD = 1
PHI_OFF_DIAGONAL_SCALE = 0.25
# Largest n for which the trace-compression extension of Phi_n is positive.
PHI_POSITIVE_EXTENSION_MAX_N = 4
UPSILON_PRIME_NORM = 2 / math.sqrt(3)

# _______REPORTING_________
CLAIM_ANCHORS = {
    "norm-at-identity": "A positive unital map attains its norm at the identity",
    "phi.definition": "Phi_n on A_n: (aI, B; C, dI) -> (aI, B^t/4; C^t/4, dI)",
    "phi.positive": "Phi_n is a unital positive map",
    "phi.norm": "||Phi_n|| = 1 via compression to a span of dimension <= 4",
    "phi.complete-contractivity": "B -> B^t/4 is completely contractive for n <= 4",
    "phi.unextendible": "Phi_n has no positive extension once n > 16",
    "block-positivity.scalar-corners": "(aI, C; C*, bI) >= 0 iff a, b >= 0 and "
    "||C|| <= sqrt(ab)",
    "block-positivity.scalar-tail": "(A, bI; cI, dI) >= 0 iff A >= 0, c = conj(b), "
    "d >= 0 and dA >= |b|^2 I",
    "upsilon.structure": "Upsilon_n is unital, an involution and self-adjoint",
    "upsilon.positive": "Upsilon_n is positivity preserving",
    "upsilon.norm": "||Upsilon_n|| = 1",
    "upsilon.unextendible": "Upsilon_n has no positive extension for n >= 2",
    "upsilon-prime.norm": "||Upsilon'_n|| = 2/sqrt(3)",
    "upsilon-prime.positive": "Upsilon'_n is positive and unital",
    "gamma.positive": "Gamma_n is positive",
    "gamma.involution": "Gamma_n is an involution",
    "swap-bc.singular-values": "(A, bI; cI, dI) and (A, cI; bI, dI) share singular "
    "values",
    "gamma.isometry": "Gamma_n is an isometry",
    "kadison-schwarz.forcing": "Kadison-Schwarz forces the blockwise transpose",
    "gamma.unextendible": "Gamma_n has no positive extension for n >= 2",
    "psi-transpose.not-positive": "The blockwise transpose is not positive",
    "real-restriction.extendible": "Gamma_n restricted to R_n extends positively",
}

# _______CLI_________
MAP_CHOICES = ("phi", "upsilon", "upsilon-prime", "gamma")
CERTIFICATE_CHOICES = ("phi", "upsilon", "gamma")
SEED_ENV_VAR = "OPSYS_SEED"

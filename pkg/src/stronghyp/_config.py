"""Default numerical tolerances and caps, shared by every module and mirrored into reports."""

# Absolute slack on (normalized) inequality margins for boolean verdicts.
MARGIN_TOL = 1e-9
# Triangle-inequality slack accepted when ingesting a distance matrix.
METRIC_TOL = 1e-9
# Four-point gaps at or below this are treated as exact ties when locating eps*.
GAP_TOL = 1e-9

EPS_BISECTION_TOL = 1e-10
EPS_BRACKET_CAP = 1e6

# Threshold A0 for the small-argument log bounds; None selects max(1, 1/eps).
EB_A0 = None

SOLVER_RTOL = 1e-12
SOLVER_MAXITER = 20000
BALL_STATE_CAP = 20_000_000

MC_HORIZON = 1000
# a walk whose word has MC_ESCAPE letters past the target's common prefix is retired;
# returning would mean cancelling that many letters (probability below 0.5**64 for the shipped walks)
MC_ESCAPE = 64
HARMONIC_PATIENCE = 50
HARMONIC_STEP_CAP = 200_000

BOUNDARY_PRODUCT_TOL = 1e-6
BUSEMANN_TOL = 1e-8
HAUSDORFF_TOL = 1e-12
HAUSDORFF_DEPTH_CAP = 400

H2_CROSSCHECK_MAX_DIST = 30.0

# Symmetric nearest-neighbour test measure on F_2.
NONUNIFORM_F2 = {"a": 0.35, "a'": 0.35, "b": 0.15, "b'": 0.15}


def as_dict():
    return {k: v for k, v in globals().items() if k.isupper()}

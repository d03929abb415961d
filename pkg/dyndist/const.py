"""Constants."""

# Fast-scale interval J of the dynamic values
J: tuple[float, float] = (-0.5, 0.5)

# Breakpoints closer than BREAKPOINT_TOLERANCE * (hi - lo) are merged
BREAKPOINT_TOLERANCE = 1e-12
MAX_DEGREE = 16
NORMALIZATION_TOLERANCE = 1e-12
ENDPOINT_TOLERANCE = 1e-12
EQUALITY_TOLERANCE = 1e-12
DISTRIBUTION_TOLERANCE = 1e-10

# Pseudo-random test function battery
BATTERY_SEED = 0x5EED
BATTERY_SIZE = 32

# Impulsive solver
DEFAULT_SEGMENT_STEPS = 1000
DEFAULT_JUMP_STEPS = 10_000
MIN_WINDOW_STEPS = 256
FINITE_DIFFERENCE_STEP = 1e-5
FROBENIUS_TOLERANCE = 1e-6
FROBENIUS_LATTICE_CAP = 125
FROBENIUS_LATTICE_POINTS = 5
DEFAULT_M_LIST: tuple[int, ...] = (16, 32, 64, 128, 256)

# Command line
CSV_DIGITS = 17
THREADS_ENV = "DYNDIST_THREADS"

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DIVERGENCE = 3
EXIT_UNRESOLVED = 4

FROBENIUS_VERDICTS: dict[bool, str] = {
    True: "satisfied",
    False: "NOT satisfied",
}

MAX_DEVIATION = "max deviation"

"""Fermat spiral windows, continued fractions, and Chabauty-Fell limit experiments."""

__version__ = "0.1.0"

from .errors import (
    DegenerateBasis,
    InvalidSpec,
    NotALattice,
    PrecisionExhausted,
    SpiralLimitsError,
    TooManyPoints,
    WindowTooLarge,
    WindowTooSmall,
)
from .number_theory import (
    AngleSpec,
    BadApproxProfile,
    Convergent,
    DecimalAngle,
    QuadraticAngle,
    RationalAngle,
    TripletSample,
    badly_approx_profile,
    class_triplet_limit,
    convergents,
    expand_cf,
    largest_denominator_at_most,
    parse_angle,
    triplet,
    verify_cf_identities,
)

GOLDEN = QuadraticAngle(1, 1, 2, 5)

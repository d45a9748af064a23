"""Exact computations with Heisenberg operators on Hilbert schemes of points
on curves: relation checks, free-module decomposition, the Macdonald-type
transform to the Jacobian grading, and BPS numbers."""

from .bps import (
    BpsVector,
    DEulerPoly,
    EulerSeries,
    bps_pipeline,
    check_q_symmetry,
    compare_bps,
    d_euler_from_z,
    ng_from_z,
    ng_prime_from_L,
)
from .curves import (
    NumericalSemigroup,
    count_ideals,
    global_euler,
    ideal_counts,
    local_euler_series,
    p1_quartet,
    semigroup,
    smooth_poincare,
)
from .errors import CheckFailure, FormatError
from .exact import LaurentPoly, RationalMatrix, solve_linear, truncated_series_quotient
from .graded import BigradedSpace, GradedOperator, OperatorQuartet, commutator, compose, validate
from .heisenberg import (
    check_relations,
    coordinates,
    d_grading,
    decompose,
    dualize,
    free_quartet,
    lowest_weight,
    stabilization_check,
)
from .macdonald import DGradedPoly, PoincareFamily, check_duality, d_from_hilb, euler_specialize, hilb_from_d

__version__ = "0.1.0"

"""hclab: a desk-scale numerical laboratory for hypercyclicity experiments.

The package cross-checks the equivalent characterizations of the
Hypercyclicity Criterion on truncations of classical operators: certificate
residuals, ball-intersection oracles built on a norm-ball constrained
least-squares solver, Hilbert-Schmidt lifting with constructive witnesses,
and consistency batteries over the whole family of conditions.
"""

from .battery import BatteryConfig, BatteryReport, hereditary_sample, orbit_coverage, run_battery, sequence_battery
from .config import DEFAULTS, Defaults
from .criterion import (
    Certificate,
    CertificateError,
    CriterionReport,
    OperatorSequence,
    check_certificate,
    check_commuting,
    orbit,
)
from .hs import (
    WitnessError,
    WitnessReport,
    construct_witness,
    construct_witness_oracle,
    finite_rank_approx,
    hs_norm,
    left_multiply,
    vectorize_equivalence,
)
from .linalg import Ball, basis_vector, constrained_lsq, cvec, inner, norm, op_norm, support
from .oracle import (
    OracleResult,
    PowerCache,
    eventual_hit,
    first_hit,
    forward_backward_condition,
    intersects,
    through_zero_condition,
)
from .zoo import (
    Diagonal,
    DirectSum,
    GuardBandError,
    Identity,
    OperatorPower,
    OperatorSum,
    RankOne,
    Scaled,
    TruncatedOperator,
    UnknownOperatorError,
    WeightedBackwardShift,
    WeightedForwardShift,
    ZooError,
    direct_sum,
    identity_plus,
    make_operator,
    rank_one,
    weighted_backward_shift,
    zoo_entries,
)

__version__ = "0.1.0"

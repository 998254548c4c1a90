"""Exact solver and verification suite for multi-round cooperative data exchange.

Users holding overlapping packet subsets broadcast coded chunks over a
lossless channel in successive rounds; nested user groups must reach either
a local objective (learn everything the group collectively holds) or a
global one (learn the whole ground set) round by round, each round's total
rate minimised subject to the earlier rounds' minima.

The package computes those per-round minima exactly by lexicographic linear
programming, predicts them for random instances via linear systems and
closed forms, verifies optimality with dual certificates, and confirms
achievability with a random linear network coding simulation over GF(2^8).
"""

from .constraints import ConstraintSet, CutConstraint, sgo_constraints, slo_constraints
from .instance import (
    Instance,
    InvalidGroupIndex,
    InvalidInstance,
    InvalidProbability,
    InvalidSubset,
    RateMatrix,
    random_instance,
)
from .lexlp import (
    Infeasible,
    LexResult,
    LinearProgram,
    LinearRow,
    TooLarge,
    Unbounded,
    simplex_min,
    solve_lex,
    stage_program,
    verify_feasible,
    vertex_oracle,
)
from .netcode import (
    NonIntegralTransmission,
    SimReport,
    can_decode,
    chunk_granularity,
    simulate_exchange,
)
from .predict import (
    AsymptoticParams,
    InvalidArgument,
    NegativeRate,
    NoSignChange,
    NotTwoGroups,
    SingularSystem,
    asymptotic_rates,
    excess_rates,
    find_crossover,
    find_slo_excess_minimum,
    sgo_closed_form,
    sgo_sle_solve,
    slo_closed_form,
    slo_dual_certificate,
    slo_sle_solve,
    z_value,
)

__version__ = "0.1.0"

__all__ = [
    "Instance",
    "RateMatrix",
    "random_instance",
    "InvalidInstance",
    "InvalidGroupIndex",
    "InvalidSubset",
    "InvalidProbability",
    "CutConstraint",
    "ConstraintSet",
    "slo_constraints",
    "sgo_constraints",
    "LinearRow",
    "LinearProgram",
    "LexResult",
    "Infeasible",
    "Unbounded",
    "TooLarge",
    "simplex_min",
    "stage_program",
    "solve_lex",
    "vertex_oracle",
    "verify_feasible",
    "SingularSystem",
    "NegativeRate",
    "NotTwoGroups",
    "InvalidArgument",
    "NoSignChange",
    "z_value",
    "slo_sle_solve",
    "sgo_sle_solve",
    "slo_closed_form",
    "sgo_closed_form",
    "AsymptoticParams",
    "asymptotic_rates",
    "excess_rates",
    "find_crossover",
    "find_slo_excess_minimum",
    "slo_dual_certificate",
    "NonIntegralTransmission",
    "SimReport",
    "can_decode",
    "chunk_granularity",
    "simulate_exchange",
    "__version__",
]

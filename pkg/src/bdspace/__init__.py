"""Finite stages of the Bourgain-Delbaen space X_{a,b} and a compactness test harness."""

from .core import (
    ExtendedVector,
    GammaIndex,
    StageLedger,
    StageVector,
    build_ledger,
    embed,
    embed_coords,
    embed_step,
    enumerate_gammas,
    eval_functional,
    extend,
    project,
    sup_norm,
)
from .errors import BDError, DomainError, InsufficientDataError, InvalidInputError, ResourceLimitError, StageError
from .operators import FiniteOperator, defect_profile, demo_contradiction, find_block_witness, op_norm
from .params import Convention, Mode, Params, default_params, min_lambda, solve_alpha, validate
from .sequences import (
    BlockSequence,
    GrowthFit,
    bd_growth_experiment,
    growth_exponent,
    make_l2_blocks,
    partial_sum_norms,
)

__version__ = "0.1.0"

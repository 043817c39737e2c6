"""delayexp: delayed matrix exponentials for linear discrete delay systems.

Solves x(k+1) = A x(k) + B_k x(k-m) + f(k) with eventually-constant,
generally non-commuting coefficient sequences, two ways: by stepping the
recursion (the oracle) and by the closed representation formula built from
nested-sum layers of the delayed matrix exponential.  Everything the
representation rests on is cross-checked against independent evaluations;
see the `check` CLI subcommand and ERRATA.md.
"""

from ._kernels import ACTIVE_BACKEND, HAVE_COMPILED
from .delayed_exp import (
    PTable,
    block_index,
    delayed_exp,
    delayed_exp_permutable,
    nested_sum_count,
    p_direct,
    p_table,
)
from .errors import (
    BadDelay,
    DelayExpError,
    DimensionMismatch,
    DomainError,
    NegativeInnerIndex,
    NonFiniteEntry,
    Overflow,
    ShapeMismatch,
    SingularA,
    SystemSpecError,
    WorkBudgetExceeded,
)
from .fundamental import (
    FundamentalMatrix,
    PowerCache,
    fundamental_phi,
    phi_oracle,
    transform_D,
)
from .solver import (
    ComparisonReport,
    compare,
    from_z_trajectory,
    solve_homogeneous_rep,
    solve_nonhomogeneous_rep,
    solve_recursion,
    to_z_trajectory,
)
from .systems import (
    DelaySystem,
    InitialFunction,
    MatrixSequence,
    Trajectory,
    VectorSequence,
    validate_system,
)
from .sysio import load_system, save_system, system_from_dict, system_to_dict

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_BACKEND",
    "HAVE_COMPILED",
    "BadDelay",
    "ComparisonReport",
    "DelayExpError",
    "DelaySystem",
    "DimensionMismatch",
    "DomainError",
    "FundamentalMatrix",
    "InitialFunction",
    "MatrixSequence",
    "NegativeInnerIndex",
    "NonFiniteEntry",
    "Overflow",
    "PTable",
    "PowerCache",
    "ShapeMismatch",
    "SingularA",
    "SystemSpecError",
    "Trajectory",
    "VectorSequence",
    "WorkBudgetExceeded",
    "block_index",
    "compare",
    "delayed_exp",
    "delayed_exp_permutable",
    "from_z_trajectory",
    "fundamental_phi",
    "load_system",
    "nested_sum_count",
    "p_direct",
    "p_table",
    "phi_oracle",
    "save_system",
    "solve_homogeneous_rep",
    "solve_nonhomogeneous_rep",
    "solve_recursion",
    "system_from_dict",
    "system_to_dict",
    "to_z_trajectory",
    "transform_D",
    "validate_system",
    "__version__",
]

"""Binary rank of circulant block diagonal 0/1 matrices and their complements."""

from .canonical import CanonicalForm, canonicalize_2regular
from .certificates import (
    BlockSequence,
    BoundClaim,
    RankReport,
    best_bounds,
    divides_condition,
    is_balanced,
    lin_independence_bound,
    partition_weight,
    row_sequence,
    theorem_bounds,
)
from .construction import (
    MtrWitness,
    Partition,
    Rectangle,
    dinm_witness,
    gap_family,
    merge_construct,
    complement_partition,
    verify_mtr,
    verify_partition,
)
from .kernels import BACKEND
from .matrix import (
    BlockSpec,
    GlobalIndex,
    Matrix01,
    MatrixFormatError,
    build_block_diagonal,
    build_D,
    complement,
    is_k_regular,
    permute,
)
from .oracle import brute_force_oracle
from .rank import formula_rank_D, formula_rank_spec, real_rank
from .solver import SearchConfig, SolveResult, binary_rank_exact, isolation_lower_bound

__version__ = "0.1.0"

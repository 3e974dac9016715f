"""Markov shifts with compatible alphabet quasigroup operations.

Validation of the algebraic pairing, the induced class partitions and
quotients, factorization into a finite part times a full shift, the four
elementary isomorphisms with a bounded search, and chain components at
cylinder resolution.  Everything is checked by exhaustive finite
oracles; ``quasishift._kernels.BACKEND`` tells whether the compiled word
kernels or the numpy fallback are in use.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .blockops import BlockOperationRule, RuleNotTotalError, check_block_operation
from .chains import ChainInstance, HypothesisViolatedError, chain_component, chain_instance, coset_cover
from .decomposition import (
    Decomposition,
    NotIrreducibleError,
    VerificationFailedError,
    block_width_bound,
    decompose,
    verify_isomorphism,
)
from .moves import (
    MOVE_KINDS,
    InvalidMoveError,
    Move,
    MoveResult,
    NotFoundWithinDepthError,
    apply_move,
    enumerate_moves,
    find_isomorphism,
    round_trip_check,
    search_move_sequence,
)
from .qgshift import (
    CellNotSingletonError,
    CellSplitting,
    IncompatibleOperationError,
    InducedPartitions,
    QuasigroupShift,
    Section,
    UnequalCardinalitiesError,
    base_cell,
    build,
    cell_shift,
    follower_shift,
    follower_shift_inverse,
    induced_partitions,
    pair_product,
    split_by_cells,
    symbol_coordinates,
    symbol_from_coordinates,
)
from .quasigroup import (
    BasePoint,
    ColumnNotPermutationError,
    CosetPartition,
    FiniteQuasigroup,
    LatinSquareError,
    NotAPartitionError,
    NotCompatibleError,
    PartitionError,
    RowNotPermutationError,
    UnknownSymbolError,
    all_coset_partitions,
    base_point,
    coset_partition_from_block,
    from_operation,
    has_period_two,
    is_commutative,
    is_medial,
    partition_from_blocks,
    quotient_quasigroup,
    validate_latin_square,
)
from .shifts import (
    AlphabetMismatchError,
    BlockCode,
    CodeDomainError,
    EmptyShiftError,
    MarkovShift,
    SftPresentation,
    WordNotAllowedError,
    compose_codes,
    entropy,
    follower_set,
    full_shift,
    higher_block_presentation,
    identity_code,
    is_irreducible,
    predecessor_set,
    product_shift,
    pruned_markov_shift,
    sft_step,
    to_markov,
    uniform_follower_count,
    word_count,
    words,
)

__version__ = "0.1.0"

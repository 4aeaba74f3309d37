"""Exact binary expansions of constants and base-2 normality diagnostics."""

__version__ = "0.1.0"

from .digits import (
    BitBuffer,
    DigitSource,
    SqrtSource,
    RationalSource,
    ChampernowneSource,
    CopelandErdosSource,
    ConstantOnesSource,
    AlternatingSource,
    BufferSource,
    sqrt_digits,
    rational_digits,
    champernowne2_digits,
    copeland_erdos2_digits,
    read_bits,
    write_bits,
    parse_source_spec,
)
from .vecrep import (
    PrefixVector,
    NsProfile,
    NsVector,
    prefix_vector,
    integer_representative,
    ns_vector,
    ns_profile,
    complement,
    norm_squared,
    angle_to_ones,
)
from .analytics import (
    SeriesReport,
    BlockHistogram,
    ones_ratio_series,
    angle_series,
    norm_ratio_series,
    balance_gap_series,
    ns_ratio_series,
    block_histogram,
    normality_deviation,
)
from .harness import (
    VerificationResult,
    RebalancedNs,
    verify_claim,
    rebalance_permutation,
    ordered_sequence_draw,
)

"""Cantor series digit machinery: bases, window sums, schedules, measures.

The package splits into a few layers. `sequences` parses and evaluates base
sequences Q = (q_n). `codec` moves between reals and digit streams and
handles lazily sampled digits whose bases are too large to materialize.
`coeffs` and `solver` deal with the window coefficient systems, `stats`
with block counting against the matching normalizers, `pipeline` with the
staged constructions built on top of all of that, and `fractal` with the
Markov measures and covering-dimension bounds used to place the resulting
reals inside small sets.
"""

from .errors import (
    CantorError,
    ComputationError,
    DegenerateChain,
    DegenerateDenominator,
    DomainError,
    NoConvergence,
    OverflowPolicyError,
    ParseError,
    PrecisionError,
    RangeError,
    SearchExhausted,
    SingularJacobian,
)
from .highprec import HighPrecReal, mpf_to_fraction
from .sequences import (
    BasicSequence,
    ClassificationReport,
    HugeValue,
    SequenceMeta,
    SSet,
    almost_closed_report,
    classify,
    eval_sequence,
    parse_sequence_spec,
    parse_sset,
    print_sequence_spec,
)
from .coeffs import (
    WindowCoefficients,
    ap1_window_sum,
    ap2_window_sum,
    closed_form,
    coefficients,
    limit_ratio,
    window_sum,
)
from .codec import (
    DigitStream,
    HugeMarker,
    ProgressionIndex,
    digits_from_real,
    explicit_digits,
    psi_digits,
    read_digit_file,
    real_from_digits,
    restrict_base,
    restrict_digits,
    seeded_uniform_digits,
    tail_value,
    tqn,
    write_digit_file,
)
from .stats import (
    ap2_horizon,
    ap2_sum,
    count_blocks,
    count_blocks_ap1,
    count_blocks_ap2,
    format_block,
    mod1_distance,
    parse_block,
    qnk,
    qnk_fraction,
    qnmr,
    star_discrepancy,
    van_der_corput,
)
from .solver import (
    Solution,
    default_targets,
    evaluate_system,
    in_region,
    jacobian,
    newton_solve,
    scan_region,
)
from .fractal import (
    MarkovSpec,
    MoranReport,
    MoranSpec,
    cylinder_measure,
    entropy,
    markov_matrix,
    moran_bounds,
    sample_markov,
    stationary_uniform_check,
)
from .pipeline import (
    GroupBuild,
    ScheduleState,
    StageRecord,
    build_schedule,
    composition_sequence,
    generate_digits,
    group_build,
    limit_ratio_estimate,
    psi_transfer_report,
    schedule_base,
    tail_distance_report,
    target_digits,
    window_ratio_report,
    xi_transform,
)

__version__ = "0.1.0"

__all__ = [
    "BasicSequence",
    "CantorError",
    "ClassificationReport",
    "ComputationError",
    "DegenerateChain",
    "DegenerateDenominator",
    "DigitStream",
    "DomainError",
    "GroupBuild",
    "HighPrecReal",
    "HugeMarker",
    "HugeValue",
    "MarkovSpec",
    "MoranReport",
    "MoranSpec",
    "NoConvergence",
    "OverflowPolicyError",
    "ParseError",
    "PrecisionError",
    "ProgressionIndex",
    "RangeError",
    "ScheduleState",
    "SearchExhausted",
    "SequenceMeta",
    "SingularJacobian",
    "Solution",
    "SSet",
    "StageRecord",
    "WindowCoefficients",
    "almost_closed_report",
    "ap1_window_sum",
    "ap2_horizon",
    "ap2_sum",
    "ap2_window_sum",
    "build_schedule",
    "classify",
    "closed_form",
    "coefficients",
    "composition_sequence",
    "count_blocks",
    "count_blocks_ap1",
    "count_blocks_ap2",
    "cylinder_measure",
    "default_targets",
    "digits_from_real",
    "entropy",
    "eval_sequence",
    "evaluate_system",
    "explicit_digits",
    "format_block",
    "generate_digits",
    "group_build",
    "in_region",
    "jacobian",
    "limit_ratio",
    "limit_ratio_estimate",
    "markov_matrix",
    "mod1_distance",
    "moran_bounds",
    "mpf_to_fraction",
    "newton_solve",
    "parse_block",
    "parse_sequence_spec",
    "parse_sset",
    "print_sequence_spec",
    "psi_digits",
    "psi_transfer_report",
    "qnk",
    "qnk_fraction",
    "qnmr",
    "read_digit_file",
    "real_from_digits",
    "restrict_base",
    "restrict_digits",
    "sample_markov",
    "scan_region",
    "schedule_base",
    "seeded_uniform_digits",
    "stationary_uniform_check",
    "star_discrepancy",
    "tail_distance_report",
    "tail_value",
    "target_digits",
    "tqn",
    "van_der_corput",
    "window_ratio_report",
    "window_sum",
    "write_digit_file",
    "xi_transform",
]

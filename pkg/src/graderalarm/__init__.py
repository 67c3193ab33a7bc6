"""No-knowledge misalignment alarms for multiple-choice graders.

Given only per-label response counts (and optionally a pairwise agreement
table) for a test whose answer key is unknown, decide with exact arithmetic
whether *any* answer key would let every grader meet a per-label recall
requirement. If none does, at least one grader is provably misaligned —
a verdict that needs no ground truth at all.
"""

from .engine import (
    REPORT_SCHEMA,
    AlarmConfig,
    evaluate_point,
    point_report,
    render_report,
    report_to_dict,
    scan_alarm,
    validate_report,
)
from .ingest import (
    COUNTS_SCHEMA,
    PAIR_LABELS,
    CountsBundle,
    VoteParseError,
    VoteRecord,
    build_confusion,
    build_ground_truth,
    build_pair_table,
    build_response_counts,
    parse_votes,
    read_counts,
    read_votes,
    weighted_majority,
    write_counts,
)
from .m1 import (
    DiagonalTuple,
    check_label_axiom,
    correct_count_bounds,
    enumerate_correct_diagonals,
    exact_diagonal_feasible,
    m1_feasible,
)
from .m2 import correlation_range, m2_feasible, m2_integer_feasible
from .model import (
    FEASIBLE,
    INFEASIBLE,
    UNDECIDED,
    AbilityRequirement,
    AlarmReport,
    BudgetExceededError,
    ConfusionMatrix,
    GraderAlarmError,
    GraderVerdict,
    InvalidCountsError,
    LabelMismatchError,
    LabelSet,
    PairCountTable,
    PairVerdict,
    PointVerdict,
    QPoint,
    ResponseCounts,
    TripleCountTable,
    minimum_correct,
    parse_rational,
)
from .oracle import oracle_m1, oracle_m2
from .simplex import SimplexCursor, enumerate_q_points, partition_range, simplex_size

__all__ = [
    "AbilityRequirement",
    "AlarmConfig",
    "AlarmReport",
    "BudgetExceededError",
    "COUNTS_SCHEMA",
    "ConfusionMatrix",
    "CountsBundle",
    "DiagonalTuple",
    "FEASIBLE",
    "GraderAlarmError",
    "GraderVerdict",
    "INFEASIBLE",
    "InvalidCountsError",
    "LabelMismatchError",
    "LabelSet",
    "PAIR_LABELS",
    "PairCountTable",
    "PairVerdict",
    "PointVerdict",
    "QPoint",
    "REPORT_SCHEMA",
    "ResponseCounts",
    "SimplexCursor",
    "TripleCountTable",
    "UNDECIDED",
    "VoteParseError",
    "VoteRecord",
    "build_confusion",
    "build_ground_truth",
    "build_pair_table",
    "build_response_counts",
    "check_label_axiom",
    "correct_count_bounds",
    "correlation_range",
    "enumerate_correct_diagonals",
    "enumerate_q_points",
    "evaluate_point",
    "exact_diagonal_feasible",
    "m1_feasible",
    "m2_feasible",
    "m2_integer_feasible",
    "minimum_correct",
    "oracle_m1",
    "oracle_m2",
    "parse_rational",
    "parse_votes",
    "partition_range",
    "point_report",
    "read_counts",
    "read_votes",
    "render_report",
    "report_to_dict",
    "scan_alarm",
    "simplex_size",
    "validate_report",
    "weighted_majority",
    "write_counts",
]

__version__ = "0.1.0"

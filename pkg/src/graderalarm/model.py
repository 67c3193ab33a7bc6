"""Shared vocabulary for the grader-consistency alarm.

Labels, count tables, ability thresholds, and verdicts used by every other
module. All counts are plain Python integers and all thresholds are
`fractions.Fraction`; the decision path never touches floating point, so
every verdict derived from these values is exact.

Everything here is an immutable value: safe to share between workers and to
use as dict keys.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from fractions import Fraction


class GraderAlarmError(Exception):
    """Base class for all errors raised by this package."""


class LabelMismatchError(GraderAlarmError):
    """Two inputs that must share a label set (or item set) do not."""


class InvalidCountsError(GraderAlarmError):
    """A count structure violates its invariants (shape, sign, or totals)."""


class BudgetExceededError(GraderAlarmError):
    """An enumeration was refused because its a-priori size exceeds the budget."""


DEFAULT_BUDGET = 10_000_000
BUDGET_ENV_VAR = "GRADERALARM_BUDGET"


def resolve_budget(budget: int | None) -> int:
    """Explicit budget, else the environment override, else the default."""
    if budget is not None:
        value = budget
    else:
        raw = os.environ.get(BUDGET_ENV_VAR)
        if raw is None:
            value = DEFAULT_BUDGET
        else:
            try:
                value = int(raw)
            except ValueError:
                raise InvalidCountsError(
                    f"${BUDGET_ENV_VAR} must be an integer, got {raw!r}"
                ) from None
    if value < 0:
        raise InvalidCountsError(f"budget must be nonnegative, got {value}")
    return value


_RATIONAL_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


def parse_rational(text: str) -> Fraction:
    """Parse an exact rational from 'p/q' or a plain integer string.

    Decimal notation is rejected on purpose: accepting '0.5' would smuggle
    binary floating point into a path whose guarantees depend on exactness.
    """
    m = _RATIONAL_RE.match(text.strip())
    if not m:
        raise InvalidCountsError(
            f"not an exact rational: {text!r} (use 'p/q' or an integer, not a decimal)"
        )
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise InvalidCountsError(f"zero denominator in rational: {text!r}")
    return Fraction(num, den)


def format_rational(value: Fraction) -> str:
    """Serialize a Fraction as 'p/q' in lowest terms with positive q."""
    return f"{value.numerator}/{value.denominator}"


def minimum_correct(threshold: Fraction, strict: bool, column_total: int) -> int:
    """Smallest integer count d such that d out of ``column_total`` meets the threshold.

    Non-strict mode needs d/total >= threshold, strict mode d/total > threshold.
    A zero total is vacuous and yields 0. In strict mode with threshold 1 the
    result is total + 1: no achievable count qualifies, which downstream
    feasibility checks report as infeasible rather than special-casing here.
    """
    if column_total < 0:
        raise InvalidCountsError(f"negative column total: {column_total}")
    if column_total == 0:
        return 0
    scaled = threshold.numerator * column_total
    den = threshold.denominator
    if strict:
        return scaled // den + 1
    return -((-scaled) // den)


@dataclass(frozen=True)
class LabelSet:
    """Ordered alphabet of response labels. The order is canonical for a run.

    Every table in the package indexes its axes by position in this order, and
    serialization always goes through label names, never bare indices.
    """

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.labels) < 2:
            raise InvalidCountsError("label set needs at least 2 labels")
        if len(set(self.labels)) != len(self.labels):
            raise InvalidCountsError(f"duplicate label names: {self.labels}")
        if any(not name for name in self.labels):
            raise InvalidCountsError("empty label name")

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, name: object) -> bool:
        return name in self.labels

    def index(self, name: str) -> int:
        try:
            return self.labels.index(name)
        except ValueError:
            raise LabelMismatchError(f"unknown label {name!r}; have {self.labels}") from None


@dataclass(frozen=True)
class QPoint:
    """A candidate answer-key composition: how many test items carry each label.

    One point of the simplex of all nonnegative integer label-count tuples
    that sum to the test size. Positions follow the run's canonical label
    order; the tuple itself carries no label names.
    """

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.counts:
            raise InvalidCountsError("answer-key point needs at least one count")
        for v in self.counts:
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise InvalidCountsError(f"answer-key count {v!r} is not a nonnegative integer")

    @property
    def total(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class ResponseCounts:
    """Observed per-label decision counts of one grader over the whole test."""

    grader: str
    labels: LabelSet
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        _check_count_vector(self.labels, self.counts, f"responses of {self.grader!r}")

    @classmethod
    def from_mapping(cls, grader: str, labels: LabelSet, counts: dict[str, int]) -> "ResponseCounts":
        unknown = set(counts) - set(labels.labels)
        if unknown:
            raise LabelMismatchError(f"counts for unknown labels: {sorted(unknown)}")
        return cls(grader, labels, tuple(int(counts.get(name, 0)) for name in labels))

    @property
    def total(self) -> int:
        return sum(self.counts)

    def count(self, label: str) -> int:
        return self.counts[self.labels.index(label)]


@dataclass(frozen=True)
class PairCountTable:
    """Joint decision counts for an ordered pair of graders.

    ``cells[i][j]`` counts items where the first grader chose label i and the
    second chose label j. Row marginals are the first grader's response
    counts, column marginals the second's.
    """

    graders: tuple[str, str]
    labels: LabelSet
    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        _check_square(self.labels, self.cells, f"pair table {self.graders}")
        if self.graders[0] == self.graders[1]:
            raise InvalidCountsError(f"pair table needs two distinct graders, got {self.graders}")

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.cells)

    def cell(self, label1: str, label2: str) -> int:
        return self.cells[self.labels.index(label1)][self.labels.index(label2)]

    def row_marginals(self) -> ResponseCounts:
        return ResponseCounts(self.graders[0], self.labels, tuple(sum(row) for row in self.cells))

    def col_marginals(self) -> ResponseCounts:
        size = len(self.labels)
        return ResponseCounts(
            self.graders[1],
            self.labels,
            tuple(sum(self.cells[i][j] for i in range(size)) for j in range(size)),
        )


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts of (decision label, true label) pairs for one grader.

    Rows are decision labels, columns are true labels; the diagonal holds the
    per-label correct counts. Row sums reproduce the grader's response counts
    and column sums reproduce an answer-key point.
    """

    grader: str
    labels: LabelSet
    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        _check_square(self.labels, self.cells, f"confusion matrix of {self.grader!r}")

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.cells)

    def cell(self, decision: str, true: str) -> int:
        return self.cells[self.labels.index(decision)][self.labels.index(true)]

    def row_sums(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.cells)

    def col_sums(self) -> tuple[int, ...]:
        size = len(self.labels)
        return tuple(sum(self.cells[i][j] for i in range(size)) for j in range(size))

    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.cells[i][i] for i in range(len(self.labels)))

    def response_counts(self) -> ResponseCounts:
        return ResponseCounts(self.grader, self.labels, self.row_sums())

    def true_point(self) -> QPoint:
        return QPoint(self.col_sums())


@dataclass(frozen=True)
class TripleCountTable:
    """Counts indexed by (first grader's label, second grader's label, true label).

    The unknowns of the pairwise axioms: summing over the true axis gives the
    observed pair table, and summing out either grader recovers the other
    structures.
    """

    graders: tuple[str, str]
    labels: LabelSet
    cells: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self) -> None:
        size = len(self.labels)
        if len(self.cells) != size or any(
            len(plane) != size or any(len(row) != size for row in plane) for plane in self.cells
        ):
            raise InvalidCountsError("triple table shape does not match label set")
        for plane in self.cells:
            for row in plane:
                for v in row:
                    if not isinstance(v, int) or v < 0:
                        raise InvalidCountsError(f"triple table cell {v!r} is not a nonnegative integer")

    @property
    def total(self) -> int:
        return sum(v for plane in self.cells for row in plane for v in row)

    def cell(self, label1: str, label2: str, true: str) -> int:
        i = self.labels.index(label1)
        j = self.labels.index(label2)
        k = self.labels.index(true)
        return self.cells[i][j][k]

    def pair_table(self) -> PairCountTable:
        size = len(self.labels)
        return PairCountTable(
            self.graders,
            self.labels,
            tuple(tuple(sum(self.cells[i][j]) for j in range(size)) for i in range(size)),
        )

    def true_point(self) -> QPoint:
        size = len(self.labels)
        return QPoint(
            tuple(
                sum(self.cells[i][j][k] for i in range(size) for j in range(size))
                for k in range(size)
            )
        )

    def correct_counts(self, position: int) -> tuple[int, ...]:
        """Per-true-label correct counts of the grader in the given pair slot (0 or 1)."""
        size = len(self.labels)
        if position == 0:
            return tuple(sum(self.cells[k][j][k] for j in range(size)) for k in range(size))
        if position == 1:
            return tuple(sum(self.cells[i][k][k] for i in range(size)) for k in range(size))
        raise ValueError(f"pair slot must be 0 or 1, got {position}")


@dataclass(frozen=True)
class AbilityRequirement:
    """Per-true-label recall threshold every grader is required to meet.

    ``strict`` selects d/total > threshold; otherwise d/total >= threshold.
    Labels that never occur in a candidate answer key are satisfied vacuously.
    """

    threshold: Fraction
    strict: bool = True

    def __post_init__(self) -> None:
        if not isinstance(self.threshold, Fraction):
            object.__setattr__(self, "threshold", Fraction(self.threshold))
        if not 0 <= self.threshold <= 1:
            raise InvalidCountsError(f"threshold must be in [0,1], got {self.threshold}")

    @property
    def mode(self) -> str:
        return "strict" if self.strict else "non-strict"

    def minimum_correct(self, column_total: int) -> int:
        return minimum_correct(self.threshold, self.strict, column_total)


FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNDECIDED = "undecided"


@dataclass(frozen=True)
class GraderVerdict:
    """Single-grader feasibility outcome at one answer-key point."""

    grader: str
    feasible: bool
    violating_labels: tuple[str, ...] = ()
    witness: ConfusionMatrix | None = None

    def __post_init__(self) -> None:
        if self.feasible and self.witness is None:
            raise InvalidCountsError(f"feasible verdict for {self.grader!r} must carry a witness")
        if not self.feasible and self.witness is not None:
            raise InvalidCountsError(f"infeasible verdict for {self.grader!r} must not carry a witness")
        if not self.feasible and not self.violating_labels:
            raise InvalidCountsError(f"infeasible verdict for {self.grader!r} must name violating labels")


@dataclass(frozen=True)
class PairVerdict:
    """Pairwise-axiom outcome at one answer-key point.

    ``relaxation`` reports the exact rational relaxation; ``status`` the
    decision actually reached (undecided when the integer enumeration budget
    is exhausted). A feasible verdict carries an integer ``witness`` table
    when the integer check produced one, or at least the relaxation's
    rational solution; an infeasible relaxation carries the multiplier
    ``certificate`` proving it.
    """

    graders: tuple[str, str]
    status: str
    relaxation: str
    witness: TripleCountTable | None = None
    relaxation_witness: tuple[Fraction, ...] | None = None
    certificate: tuple[Fraction, ...] | None = None

    def __post_init__(self) -> None:
        if self.status not in (FEASIBLE, INFEASIBLE, UNDECIDED):
            raise InvalidCountsError(f"bad pair status {self.status!r}")
        if self.relaxation not in (FEASIBLE, INFEASIBLE):
            raise InvalidCountsError(f"bad relaxation status {self.relaxation!r}")
        if self.status == FEASIBLE and self.witness is None and self.relaxation_witness is None:
            raise InvalidCountsError("feasible pair verdict must carry a witness")
        if self.status != FEASIBLE and self.witness is not None:
            raise InvalidCountsError("integer witness requires a feasible status")


@dataclass(frozen=True)
class PointVerdict:
    """All verdicts at one answer-key point: one per grader, plus the pair check if run."""

    q_point: QPoint
    graders: tuple[GraderVerdict, ...]
    pair: PairVerdict | None = None

    @property
    def status(self) -> str:
        if any(not g.feasible for g in self.graders):
            return INFEASIBLE
        if self.pair is not None:
            return self.pair.status
        return FEASIBLE

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


@dataclass(frozen=True)
class AlarmReport:
    """Aggregated outcome of scanning every answer-key point.

    The alarm is raised only when every point of the simplex is proven
    infeasible; a single confirmed witness point refutes it. ``status`` is
    'undecided' when some points could not be decided within budget and no
    witness was found, so neither verdict would be sound.

    The report deliberately has no field naming a single misaligned grader:
    which grader fails can change from point to point, so only per-point
    violator sets are representable.
    """

    status: str
    labels: LabelSet
    q: int
    level: str
    requirements: tuple[tuple[str, str, str], ...]  # (grader, threshold 'p/q', mode)
    simplex_points: int
    q_points_scanned: int
    witness_points: tuple[QPoint, ...]
    witness_verdict: PointVerdict | None
    infeasible_samples: tuple[PointVerdict, ...] = ()
    undecided_points: tuple[QPoint, ...] = ()
    undecided_count: int = 0

    @property
    def alarm(self) -> bool:
        return self.status == "alarm"

    def __post_init__(self) -> None:
        if self.status not in ("alarm", "no_alarm", "undecided"):
            raise InvalidCountsError(f"bad alarm status {self.status!r}")
        if self.alarm and (self.witness_points or self.q_points_scanned != self.simplex_points):
            raise InvalidCountsError("alarm requires an empty witness list and a fully decided scan")
        if self.status == "no_alarm" and not self.witness_points:
            raise InvalidCountsError("no_alarm requires at least one witness point")
        if self.status == "undecided" and (self.witness_points or self.undecided_count == 0):
            raise InvalidCountsError(
                "undecided requires no witness and a positive undecided point count"
            )


def _check_count_vector(labels: LabelSet, counts: tuple[int, ...], what: str) -> None:
    if len(counts) != len(labels):
        raise LabelMismatchError(f"{what}: {len(counts)} counts for {len(labels)} labels")
    for v in counts:
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise InvalidCountsError(f"{what}: count {v!r} is not a nonnegative integer")


def _check_square(labels: LabelSet, cells: tuple[tuple[int, ...], ...], what: str) -> None:
    size = len(labels)
    if len(cells) != size or any(len(row) != size for row in cells):
        raise InvalidCountsError(f"{what}: shape does not match label set of size {size}")
    for row in cells:
        for v in row:
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise InvalidCountsError(f"{what}: cell {v!r} is not a nonnegative integer")


def require_same_labels(*objs) -> LabelSet:
    """Return the common label set of the given objects, or raise."""
    labels = objs[0].labels
    for other in objs[1:]:
        if other.labels != labels:
            raise LabelMismatchError(
                f"label sets differ: {labels.labels} vs {other.labels.labels}"
            )
    return labels

"""Single-grader feasibility at a fixed answer-key point.

Given one grader's observed per-label decision counts and a hypothesized
answer-key composition, the unknown is a confusion matrix: nonnegative
integers with row sums equal to the decisions and column sums equal to the
key. This module decides whether such a matrix exists whose diagonal meets a
per-true-label recall requirement, and enumerates which exact diagonals are
achievable at all.

Both questions are transportation-polytope facts with closed-form answers,
so the decision path is a handful of integer comparisons; the LP route stays
available (``diagonal_system``) purely as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .lpkernel import LinearRow, LinearSystem
from .model import (
    AbilityRequirement,
    ConfusionMatrix,
    GraderVerdict,
    InvalidCountsError,
    LabelMismatchError,
    PointVerdict,
    QPoint,
    ResponseCounts,
)


@dataclass(frozen=True)
class DiagonalTuple:
    """Per-true-label correct counts achievable by some valid confusion matrix."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        for v in self.counts:
            if not isinstance(v, int) or v < 0:
                raise InvalidCountsError(f"diagonal count {v!r} is not a nonnegative integer")


def _check_point(responses: ResponseCounts, q_point: QPoint) -> None:
    if len(q_point.counts) != len(responses.labels):
        raise LabelMismatchError(
            f"answer-key point has {len(q_point.counts)} labels, responses have {len(responses.labels)}"
        )
    if q_point.total != responses.total:
        raise InvalidCountsError(
            f"answer-key total {q_point.total} != response total {responses.total}"
        )


def correct_count_bounds(responses: ResponseCounts, q_point: QPoint, label: str) -> tuple[int, int]:
    """Inclusive (lower, upper) bound on the correct count for one true label.

    A grader can never be more correct on a label than it has decisions for
    it, nor than the label occurs: the bound is (0, min(decisions, key count)).
    """
    _check_point(responses, q_point)
    idx = responses.labels.index(label)
    return 0, min(responses.counts[idx], q_point.counts[idx])


def m1_feasible(
    responses: ResponseCounts, q_point: QPoint, req: AbilityRequirement
) -> PointVerdict:
    """Decide whether any confusion matrix at this point meets the requirement.

    Subtracting the per-label minimum correct count from both margins leaves a
    plain transportation problem (equal totals, no forbidden cells), which is
    solvable exactly when every residual margin is nonnegative. So the verdict
    reduces to per-label comparisons, and the labels whose residuals go
    negative are reported as the violation set.
    """
    _check_point(responses, q_point)
    labels = responses.labels
    minima = [req.minimum_correct(qc) for qc in q_point.counts]
    violating = tuple(
        name
        for name, rc, qc, need in zip(labels, responses.counts, q_point.counts, minima)
        if rc < need or qc < need
    )
    if violating:
        verdict = GraderVerdict(responses.grader, feasible=False, violating_labels=violating)
        return PointVerdict(q_point, (verdict,))

    witness = _northwest_witness(responses, q_point, minima)
    verdict = GraderVerdict(responses.grader, feasible=True, witness=witness)
    return PointVerdict(q_point, (verdict,))


def _northwest_witness(
    responses: ResponseCounts, q_point: QPoint, minima: list[int]
) -> ConfusionMatrix:
    """Diagonal minima plus a northwest-corner fill of the residual margins.

    Deterministic by construction (canonical label order), which keeps golden
    outputs stable.
    """
    size = len(responses.labels)
    rows = [rc - need for rc, need in zip(responses.counts, minima)]
    cols = [qc - need for qc, need in zip(q_point.counts, minima)]
    cells = [[0] * size for _ in range(size)]
    i = j = 0
    while i < size and j < size:
        move = min(rows[i], cols[j])
        cells[i][j] += move
        rows[i] -= move
        cols[j] -= move
        if rows[i] == 0:
            i += 1
        if j < size and cols[j] == 0:
            j += 1
    for k in range(size):
        cells[k][k] += minima[k]
    return ConfusionMatrix(
        responses.grader, responses.labels, tuple(tuple(row) for row in cells)
    )


def exact_diagonal_feasible(
    responses: ResponseCounts, q_point: QPoint, diagonal: tuple[int, ...]
) -> bool:
    """Is there a valid confusion matrix whose diagonal is exactly this tuple?

    Fixing the diagonal and removing it from the margins leaves a
    transportation problem whose diagonal cells are forbidden. With equal
    residual totals T, a feasible flow exists iff every residual margin is
    nonnegative and, for each label, residual row + residual column <= T
    (the single-row cut condition; larger row subsets see every column, so
    their cuts are slack).
    """
    _check_point(responses, q_point)
    rows = [rc - d for rc, d in zip(responses.counts, diagonal)]
    cols = [qc - d for qc, d in zip(q_point.counts, diagonal)]
    if any(v < 0 for v in rows) or any(v < 0 for v in cols):
        return False
    residual_total = sum(rows)
    return all(r + c <= residual_total for r, c in zip(rows, cols))


def diagonal_system(
    responses: ResponseCounts, q_point: QPoint, diagonal: tuple[int, ...]
) -> LinearSystem:
    """The exact-diagonal membership question as a linear system.

    Variables are the off-diagonal cells in row-major order; rows pin the
    margins after the fixed diagonal is subtracted. Used to cross-audit
    ``exact_diagonal_feasible`` against the LP kernel; both routes must agree.
    """
    _check_point(responses, q_point)
    size = len(responses.labels)
    off_cells = [(i, j) for i in range(size) for j in range(size) if i != j]
    var_index = {cell: k for k, cell in enumerate(off_cells)}
    rows: list[LinearRow] = []
    for i in range(size):
        coeffs = [Fraction(0)] * len(off_cells)
        for j in range(size):
            if i != j:
                coeffs[var_index[(i, j)]] = Fraction(1)
        rows.append(LinearRow(tuple(coeffs), "eq", Fraction(responses.counts[i] - diagonal[i])))
    for j in range(size):
        coeffs = [Fraction(0)] * len(off_cells)
        for i in range(size):
            if i != j:
                coeffs[var_index[(i, j)]] = Fraction(1)
        rows.append(LinearRow(tuple(coeffs), "eq", Fraction(q_point.counts[j] - diagonal[j])))
    return LinearSystem(len(off_cells), tuple(rows))


def enumerate_correct_diagonals(
    responses: ResponseCounts, q_point: QPoint
) -> set[DiagonalTuple]:
    """All diagonals realized by some confusion matrix with these margins."""
    _check_point(responses, q_point)
    found: set[DiagonalTuple] = set()
    uppers = [min(rc, qc) for rc, qc in zip(responses.counts, q_point.counts)]

    def extend(prefix: tuple[int, ...], idx: int) -> None:
        if idx == len(uppers):
            if exact_diagonal_feasible(responses, q_point, prefix):
                found.add(DiagonalTuple(prefix))
            return
        for d in range(uppers[idx] + 1):
            extend(prefix + (d,), idx + 1)

    extend((), 0)
    return found


def check_label_axiom(matrix: ConfusionMatrix, q_point: QPoint, label: str) -> bool:
    """Evaluate the per-label counting identity literally and compare.

    The diagonal entry for a label must equal the key count for that label,
    minus all other rows' totals, plus those rows' mass outside the label's
    column. The identity is a pure cancellation — it holds for any matrix
    whose column sums match the key point — so it doubles as a margin check.
    """
    if len(q_point.counts) != len(matrix.labels):
        raise LabelMismatchError(
            f"answer-key point has {len(q_point.counts)} labels, matrix has {len(matrix.labels)}"
        )
    idx = matrix.labels.index(label)
    size = len(matrix.labels)
    row_sums = matrix.row_sums()
    off_row_total = sum(row_sums[d] for d in range(size) if d != idx)
    off_block = sum(
        matrix.cells[d][t]
        for d in range(size)
        if d != idx
        for t in range(size)
        if t != idx
    )
    return matrix.cells[idx][idx] == q_point.counts[idx] - off_row_total + off_block

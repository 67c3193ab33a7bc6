"""Pairwise feasibility: can two graders' joint decisions coexist with an answer key?

At a fixed answer-key point the unknown is a three-way table counting (first
grader's label, second grader's label, true label) triples. Its constraints:
every observed pair cell splits exactly across true labels, true-label totals
hit the key point, and each grader's per-label correct mass (the slices where
its decision equals the true label) meets the recall requirement.

Two decision routes, deliberately kept apart:

* an exact rational relaxation through the LP kernel — its infeasibility is a
  certified proof that no integer table exists (sound for raising alarms);
* exhaustive enumeration of per-cell splits with pruning — the exact integer
  answer at desk scale, with an explicit a-priori budget and an honest
  "undecided" when the instance is too big.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator

from .lpkernel import LinearRow, LinearSystem, decide_feasible, verify_result
from .model import (
    FEASIBLE,
    INFEASIBLE,
    UNDECIDED,
    AbilityRequirement,
    BudgetExceededError,
    InvalidCountsError,
    LabelMismatchError,
    PairCountTable,
    PairVerdict,
    PointVerdict,
    QPoint,
    TripleCountTable,
    resolve_budget,
)
from .simplex import compositions


def split_count(pair_table: PairCountTable) -> int:
    """A-priori enumeration size: the product of per-cell composition counts."""
    size = len(pair_table.labels)
    total = 1
    for row in pair_table.cells:
        for n in row:
            total *= _n_compositions(n, size)
    return total


def _n_compositions(n: int, parts: int) -> int:
    return math.comb(n + parts - 1, parts - 1)


def _check_pair_point(pair_table: PairCountTable, q_point: QPoint) -> None:
    if len(q_point.counts) != len(pair_table.labels):
        raise LabelMismatchError(
            f"answer-key point has {len(q_point.counts)} labels, pair table has {len(pair_table.labels)}"
        )
    if q_point.total != pair_table.total:
        raise InvalidCountsError(
            f"answer-key total {q_point.total} != pair table total {pair_table.total}"
        )


def m2_system(
    pair_table: PairCountTable,
    q_point: QPoint,
    req1: AbilityRequirement,
    req2: AbilityRequirement,
) -> LinearSystem:
    """The pairwise axioms as a linear system over the R^3 table cells.

    Variable order is row-major (label1, label2, true). Rows: one equality per
    observed pair cell, one equality per true-label total, then the two
    graders' per-label correct-mass lower bounds.
    """
    _check_pair_point(pair_table, q_point)
    size = len(pair_table.labels)
    nvars = size**3

    def var(i: int, j: int, k: int) -> int:
        return (i * size + j) * size + k

    rows: list[LinearRow] = []
    zero = [Fraction(0)] * nvars
    for i in range(size):
        for j in range(size):
            coeffs = zero.copy()
            for k in range(size):
                coeffs[var(i, j, k)] = Fraction(1)
            rows.append(LinearRow(tuple(coeffs), "eq", Fraction(pair_table.cells[i][j])))
    for k in range(size):
        coeffs = zero.copy()
        for i in range(size):
            for j in range(size):
                coeffs[var(i, j, k)] = Fraction(1)
        rows.append(LinearRow(tuple(coeffs), "eq", Fraction(q_point.counts[k])))
    for ell in range(size):
        coeffs = zero.copy()
        for j in range(size):
            coeffs[var(ell, j, ell)] = Fraction(1)
        rows.append(
            LinearRow(tuple(coeffs), "ge", Fraction(req1.minimum_correct(q_point.counts[ell])))
        )
    for ell in range(size):
        coeffs = zero.copy()
        for i in range(size):
            coeffs[var(i, ell, ell)] = Fraction(1)
        rows.append(
            LinearRow(tuple(coeffs), "ge", Fraction(req2.minimum_correct(q_point.counts[ell])))
        )
    return LinearSystem(nvars, tuple(rows))


def m2_feasible(
    pair_table: PairCountTable,
    q_point: QPoint,
    req1: AbilityRequirement,
    req2: AbilityRequirement,
) -> PointVerdict:
    """Exact rational relaxation of the pairwise axioms.

    Infeasible here means integer-infeasible too (the integers are a subset of
    the rationals), so this verdict alone justifies an alarm at this point. A
    feasible relaxation is not yet a confirmed point: the witness is rational
    until ``m2_integer_feasible`` refines it.
    """
    system = m2_system(pair_table, q_point, req1, req2)
    result = decide_feasible(system)
    if not verify_result(system, result):
        raise ArithmeticError(
            f"LP answer failed self-verification at point {q_point.counts}"
        )
    if result.feasible:
        pair = PairVerdict(
            pair_table.graders,
            status=FEASIBLE,
            relaxation=FEASIBLE,
            relaxation_witness=result.witness,
        )
    else:
        pair = PairVerdict(
            pair_table.graders,
            status=INFEASIBLE,
            relaxation=INFEASIBLE,
            certificate=result.certificate,
        )
    return PointVerdict(q_point, (), pair)


def m2_integer_feasible(
    pair_table: PairCountTable,
    q_point: QPoint,
    req1: AbilityRequirement,
    req2: AbilityRequirement,
    budget: int | None = None,
) -> PointVerdict:
    """Exact integer decision of the pairwise axioms by guided enumeration.

    The rational relaxation runs first: if it is infeasible, so is the integer
    problem, certificate included, and nothing is enumerated. Otherwise every
    pair cell's count is split across true labels by depth-first search with
    margin and requirement-reachability pruning, trying splits that feed the
    requirement first so witnesses surface early.

    The a-priori enumeration size (product of per-cell split counts) is
    compared against the budget before searching; over-budget instances come
    back ``undecided`` rather than silently truncated. Exhausting the search
    without a witness is a proof of integer infeasibility (the pruning rules
    only cut assignments that cannot be completed), but there is no compact
    certificate in that case.
    """
    _check_pair_point(pair_table, q_point)
    relaxed = m2_feasible(pair_table, q_point, req1, req2)
    assert relaxed.pair is not None
    if relaxed.pair.status == INFEASIBLE:
        return relaxed

    min1 = [req1.minimum_correct(qc) for qc in q_point.counts]
    min2 = [req2.minimum_correct(qc) for qc in q_point.counts]
    if split_count(pair_table) > resolve_budget(budget):
        pair = PairVerdict(
            pair_table.graders,
            status=UNDECIDED,
            relaxation=FEASIBLE,
            relaxation_witness=relaxed.pair.relaxation_witness,
        )
        return PointVerdict(q_point, (), pair)

    witness_cells = next(
        _search_tables(pair_table, q_point, min1, min2, guided=True), None
    )
    if witness_cells is None:
        pair = PairVerdict(
            pair_table.graders,
            status=INFEASIBLE,
            relaxation=FEASIBLE,
        )
        return PointVerdict(q_point, (), pair)
    witness = TripleCountTable(pair_table.graders, pair_table.labels, witness_cells)
    pair = PairVerdict(
        pair_table.graders,
        status=FEASIBLE,
        relaxation=FEASIBLE,
        witness=witness,
        relaxation_witness=relaxed.pair.relaxation_witness,
    )
    return PointVerdict(q_point, (), pair)


def correlation_range(
    pair_table: PairCountTable,
    q_point: QPoint,
    label: str,
    req1: AbilityRequirement | None = None,
    req2: AbilityRequirement | None = None,
    budget: int | None = None,
) -> tuple[Fraction, Fraction] | None:
    """Exact range of the error correlation on one true label.

    The statistic is joint-correct frequency minus the product of the two
    graders' correct frequencies, evaluated per integer table and collected
    over every table compatible with the pair counts and the key point
    (optionally also the requirements). Returns None when the label never
    occurs in the key (the frequencies are undefined) or when no compatible
    table exists.
    """
    _check_pair_point(pair_table, q_point)
    idx = pair_table.labels.index(label)
    q_label = q_point.counts[idx]
    if q_label == 0:
        return None
    if split_count(pair_table) > resolve_budget(budget):
        raise BudgetExceededError(
            f"correlation enumeration needs {split_count(pair_table)} splits"
        )
    size = len(pair_table.labels)
    min1 = [req1.minimum_correct(qc) for qc in q_point.counts] if req1 else None
    min2 = [req2.minimum_correct(qc) for qc in q_point.counts] if req2 else None
    lo: Fraction | None = None
    hi: Fraction | None = None
    for cells in _search_tables(pair_table, q_point, min1, min2, guided=False):
        joint = cells[idx][idx][idx]
        correct1 = sum(cells[idx][j][idx] for j in range(size))
        correct2 = sum(cells[i][idx][idx] for i in range(size))
        value = Fraction(joint, q_label) - Fraction(correct1 * correct2, q_label * q_label)
        if lo is None or value < lo:
            lo = value
        if hi is None or value > hi:
            hi = value
    if lo is None or hi is None:
        return None
    return lo, hi


def _search_tables(
    pair_table: PairCountTable,
    q_point: QPoint,
    min1: list[int] | None,
    min2: list[int] | None,
    guided: bool,
) -> Iterator[tuple[tuple[tuple[int, ...], ...], ...]]:
    """Depth-first enumeration of integer triple tables, cell by cell.

    Yields complete tables (as nested tuples) satisfying the pair cells, the
    key point, and the requirement minima when given. ``guided`` switches the
    per-cell split order to requirement-feeding-first; the plain order is
    lexicographic. Pruning is capacity-based only — every cut branch is one
    that cannot reach a valid leaf — so the yielded set is exact.
    """
    size = len(pair_table.labels)
    cells = [(i, j) for i in range(size) for j in range(size)]
    counts = [pair_table.cells[i][j] for i, j in cells]
    targets = list(q_point.counts)

    # Static suffix tables: total mass in cells idx.., and that mass restricted
    # to the rows of each grader (the only cells that can still feed a given
    # requirement).
    ncells = len(cells)
    suffix_total = [0] * (ncells + 1)
    suffix_row1 = [[0] * size for _ in range(ncells + 1)]
    suffix_row2 = [[0] * size for _ in range(ncells + 1)]
    for idx in range(ncells - 1, -1, -1):
        i, j = cells[idx]
        suffix_total[idx] = suffix_total[idx + 1] + counts[idx]
        for ell in range(size):
            suffix_row1[idx][ell] = suffix_row1[idx + 1][ell] + (counts[idx] if i == ell else 0)
            suffix_row2[idx][ell] = suffix_row2[idx + 1][ell] + (counts[idx] if j == ell else 0)

    split_lists: list[list[tuple[int, ...]]] = []
    for idx, (i, j) in enumerate(cells):
        splits = list(compositions(counts[idx], size))
        if guided:
            splits.sort(key=lambda x: (-(x[i] + x[j]), x))
        split_lists.append(splits)

    col = [0] * size
    correct1 = [0] * size
    correct2 = [0] * size
    assignment: list[tuple[int, ...]] = [()] * ncells

    def viable(idx: int) -> bool:
        remaining = suffix_total[idx]
        for ell in range(size):
            room = targets[ell] - col[ell]
            if room < 0 or room > remaining:
                return False
            if min1 is not None and correct1[ell] + min(suffix_row1[idx][ell], room) < min1[ell]:
                return False
            if min2 is not None and correct2[ell] + min(suffix_row2[idx][ell], room) < min2[ell]:
                return False
        return True

    def walk(idx: int) -> Iterator[tuple[tuple[tuple[int, ...], ...], ...]]:
        if idx == ncells:
            if min1 is not None and any(c < m for c, m in zip(correct1, min1)):
                return
            if min2 is not None and any(c < m for c, m in zip(correct2, min2)):
                return
            yield tuple(
                tuple(assignment[a * size + b] for b in range(size)) for a in range(size)
            )
            return
        i, j = cells[idx]
        for split in split_lists[idx]:
            if any(col[k] + split[k] > targets[k] for k in range(size)):
                continue
            for k in range(size):
                col[k] += split[k]
            correct1[i] += split[i]
            correct2[j] += split[j]
            assignment[idx] = split
            if viable(idx + 1):
                yield from walk(idx + 1)
            for k in range(size):
                col[k] -= split[k]
            correct1[i] -= split[i]
            correct2[j] -= split[j]

    if viable(0):
        yield from walk(0)

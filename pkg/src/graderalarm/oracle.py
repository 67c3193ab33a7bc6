"""Brute-force ground truth for every feasibility decision, at desk scale.

Everything here is written to be checkable by eye: enumerate every integer
table compatible with the observed margins, test the requirement on each by
direct fraction comparison, and take set-level answers. No closed forms, no
relaxations, no shared code with the decision modules beyond the value types
— when the fast path and this module agree, that agreement means something.

Budgets are explicit and conservative (computed before enumerating); an
over-budget instance is answered "undecided", never sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .model import (
    FEASIBLE,
    INFEASIBLE,
    UNDECIDED,
    AbilityRequirement,
    InvalidCountsError,
    PairCountTable,
    QPoint,
    ResponseCounts,
    resolve_budget,
)


@dataclass(frozen=True)
class OracleM1Result:
    """Exhaustive single-grader answer: verdict plus every achievable diagonal."""

    status: str
    diagonals: frozenset[tuple[int, ...]]


@dataclass(frozen=True)
class OracleM2Result:
    """Exhaustive pairwise answer, optionally with per-label correlation extrema.

    ``correlations`` maps each label with a nonzero key count to the exact
    (min, max) of the error-correlation statistic over all compatible tables,
    with no requirement applied; labels admitting no compatible table at all
    are absent.
    """

    status: str
    correlations: dict[str, tuple[Fraction, Fraction]] | None = None


def _capped_splits(n: int, caps: list[int]) -> Iterator[tuple[int, ...]]:
    """All ways to split n into len(caps) parts with part k at most caps[k]."""
    if len(caps) == 1:
        if 0 <= n <= caps[0]:
            yield (n,)
        return
    for first in range(min(n, caps[0]) + 1):
        for rest in _capped_splits(n - first, caps[1:]):
            yield (first,) + rest


def _meets(diag: int, total: int, req: AbilityRequirement) -> bool:
    if total == 0:
        return True
    share = Fraction(diag, total)
    return share > req.threshold if req.strict else share >= req.threshold


def oracle_m1(
    responses: ResponseCounts,
    q_point: QPoint,
    req: AbilityRequirement,
    budget: int | None = None,
) -> OracleM1Result:
    """Enumerate every confusion matrix with these margins; collect its diagonals.

    Feasible iff some enumerated diagonal satisfies the requirement on every
    label, tested as an exact fraction comparison per label (zero-count labels
    pass vacuously). The a-priori budget guard is the product of per-row
    composition counts.
    """
    size = len(responses.labels)
    if len(q_point.counts) != size or q_point.total != responses.total:
        raise InvalidCountsError("responses and answer-key point do not match")

    apriori = 1
    for rc in responses.counts:
        apriori *= math.comb(rc + size - 1, size - 1)
    if apriori > resolve_budget(budget):
        return OracleM1Result(UNDECIDED, frozenset())

    row_counts = responses.counts
    suffix = [0] * (size + 1)
    for i in range(size - 1, -1, -1):
        suffix[i] = suffix[i + 1] + row_counts[i]

    diagonals: set[tuple[int, ...]] = set()
    caps = list(q_point.counts)
    rows: list[tuple[int, ...]] = []

    def fill(i: int) -> None:
        if i == size:
            diagonals.add(tuple(rows[k][k] for k in range(size)))
            return
        if any(c > suffix[i] for c in caps):
            return
        # Snapshot the caps: the generator is lazy and the loop body mutates
        # the live list between yields.
        for row in _capped_splits(row_counts[i], list(caps)):
            for k in range(size):
                caps[k] -= row[k]
            rows.append(row)
            fill(i + 1)
            rows.pop()
            for k in range(size):
                caps[k] += row[k]

    fill(0)
    ok = any(
        all(_meets(d, qc, req) for d, qc in zip(diag, q_point.counts))
        for diag in diagonals
    )
    return OracleM1Result(FEASIBLE if ok else INFEASIBLE, frozenset(diagonals))


def oracle_m2(
    pair_table: PairCountTable,
    q_point: QPoint,
    req1: AbilityRequirement,
    req2: AbilityRequirement,
    budget: int | None = None,
    collect_correlation: bool = False,
) -> OracleM2Result:
    """Enumerate every split of every pair cell across true labels; test each table.

    A table passes when both graders meet the requirement on every label of
    the key point (direct fraction comparisons). With ``collect_correlation``
    the sweep additionally records, for every label with a nonzero key count,
    the exact extrema of joint-correct frequency minus the product of marginal
    correct frequencies — over all compatible tables, requirement ignored —
    and never stops early.
    """
    size = len(pair_table.labels)
    if len(q_point.counts) != size or q_point.total != pair_table.total:
        raise InvalidCountsError("pair table and answer-key point do not match")

    apriori = 1
    for row in pair_table.cells:
        for n in row:
            apriori *= math.comb(n + size - 1, size - 1)
    if apriori > resolve_budget(budget):
        return OracleM2Result(UNDECIDED)

    cells = [(i, j) for i in range(size) for j in range(size)]
    counts = [pair_table.cells[i][j] for i, j in cells]
    total_after = [0] * (len(cells) + 1)
    for idx in range(len(cells) - 1, -1, -1):
        total_after[idx] = total_after[idx + 1] + counts[idx]

    caps = list(q_point.counts)
    correct1 = [0] * size
    correct2 = [0] * size
    joint = [0] * size
    extrema: dict[int, tuple[Fraction, Fraction]] = {}
    found = False

    def leaf() -> None:
        nonlocal found
        if not found:
            ok1 = all(_meets(correct1[k], q_point.counts[k], req1) for k in range(size))
            ok2 = all(_meets(correct2[k], q_point.counts[k], req2) for k in range(size))
            if ok1 and ok2:
                found = True
        if collect_correlation:
            for k in range(size):
                qk = q_point.counts[k]
                if qk == 0:
                    continue
                value = Fraction(joint[k], qk) - Fraction(correct1[k] * correct2[k], qk * qk)
                if k in extrema:
                    lo, hi = extrema[k]
                    extrema[k] = (min(lo, value), max(hi, value))
                else:
                    extrema[k] = (value, value)

    def fill(idx: int) -> None:
        if found and not collect_correlation:
            return
        if idx == len(cells):
            leaf()
            return
        if any(c > total_after[idx] for c in caps):
            return
        i, j = cells[idx]
        for split in _capped_splits(counts[idx], list(caps)):
            for k in range(size):
                caps[k] -= split[k]
            correct1[i] += split[i]
            correct2[j] += split[j]
            if i == j:
                joint[i] += split[i]
            fill(idx + 1)
            for k in range(size):
                caps[k] += split[k]
            correct1[i] -= split[i]
            correct2[j] -= split[j]
            if i == j:
                joint[i] -= split[i]
            if found and not collect_correlation:
                break

    fill(0)
    correlations = None
    if collect_correlation:
        correlations = {
            pair_table.labels.labels[k]: extrema[k] for k in sorted(extrema)
        }
    return OracleM2Result(FEASIBLE if found else INFEASIBLE, correlations)

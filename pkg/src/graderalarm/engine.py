"""Full-simplex scan and the no-knowledge alarm verdict.

The alarm logic is a universal statement: raise the alarm only when *every*
candidate answer key is proven impossible for the observed counts. One
confirmed witness point refutes it, so the scan exits early on the first
(lexicographically least) witness; infeasible points are retained up to a cap
as diagnostics. A point that cannot be decided within the enumeration budget
makes a missing witness inconclusive — the scan then reports "undecided"
rather than guessing in either direction.

Reports are rendered to canonical JSON (sorted keys, no timestamps, no worker
counts) and aggregation walks chunks in index order, so output bytes are
identical whatever the parallelism degree.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from . import m1 as m1mod
from . import m2 as m2mod
from .model import (
    FEASIBLE,
    INFEASIBLE,
    AbilityRequirement,
    AlarmReport,
    ConfusionMatrix,
    InvalidCountsError,
    LabelMismatchError,
    LabelSet,
    PairCountTable,
    PairVerdict,
    PointVerdict,
    QPoint,
    ResponseCounts,
    TripleCountTable,
    format_rational,
)
from .simplex import SimplexCursor, partition_range

REPORT_SCHEMA = "graderalarm-report/1"


@dataclass(frozen=True)
class AlarmConfig:
    """Everything a scan needs beyond the observed counts.

    ``requirement`` applies to every grader unless overridden per grader in
    ``per_grader`` (a tuple of (grader, requirement) pairs, to stay hashable
    and picklable). ``retain`` caps how many infeasible/undecided points the
    report keeps as diagnostics — always the lexicographically first ones.
    """

    labels: LabelSet
    q: int
    level: str
    requirement: AbilityRequirement
    per_grader: tuple[tuple[str, AbilityRequirement], ...] = ()
    jobs: int = 1
    retain: int = 8
    budget: int | None = None

    def __post_init__(self) -> None:
        if self.level not in ("m1", "m2"):
            raise InvalidCountsError(f"axiom level must be 'm1' or 'm2', got {self.level!r}")
        if self.q < 0:
            raise InvalidCountsError(f"test size must be nonnegative, got {self.q}")
        if self.jobs < 1:
            raise InvalidCountsError(f"job count must be positive, got {self.jobs}")
        if self.retain < 0:
            raise InvalidCountsError(f"retention cap must be nonnegative, got {self.retain}")

    def requirement_for(self, grader: str) -> AbilityRequirement:
        for name, req in self.per_grader:
            if name == grader:
                return req
        return self.requirement


def _check_inputs(
    config: AlarmConfig,
    responses: Sequence[ResponseCounts],
    pair_table: PairCountTable | None,
) -> None:
    if not responses:
        raise InvalidCountsError("need at least one grader's response counts")
    names = [r.grader for r in responses]
    if len(set(names)) != len(names):
        raise InvalidCountsError(f"duplicate grader names: {names}")
    for r in responses:
        if r.labels != config.labels:
            raise LabelMismatchError(
                f"grader {r.grader!r} labels {r.labels.labels} != config labels {config.labels.labels}"
            )
        if r.total != config.q:
            raise InvalidCountsError(
                f"grader {r.grader!r} graded {r.total} items, config says {config.q}"
            )
    if pair_table is not None:
        if pair_table.labels != config.labels:
            raise LabelMismatchError("pair table labels differ from config labels")
        by_name = {r.grader: r for r in responses}
        for slot, marginal in zip(
            pair_table.graders, (pair_table.row_marginals(), pair_table.col_marginals())
        ):
            if slot not in by_name:
                raise InvalidCountsError(f"pair table grader {slot!r} has no response counts")
            if by_name[slot].counts != marginal.counts:
                raise InvalidCountsError(
                    f"pair table marginals for {slot!r} disagree with its response counts"
                )
    if config.level == "m2":
        if pair_table is None:
            raise InvalidCountsError("m2 level requires a pair count table")
        if len(responses) != 2 or tuple(names) != pair_table.graders:
            raise InvalidCountsError(
                "m2 level takes exactly the pair table's two graders, in order"
            )


def evaluate_point(
    config: AlarmConfig,
    responses: Sequence[ResponseCounts],
    pair_table: PairCountTable | None,
    q_point: QPoint,
) -> PointVerdict:
    """Verdict for one answer-key point under the configured axiom level.

    At m2 the per-grader checks run first: they are implied by the pairwise
    axioms (summing out the other grader), so a single-grader failure already
    decides the point without touching the LP or the enumeration.
    """
    grader_verdicts = []
    for r in responses:
        verdict = m1mod.m1_feasible(r, q_point, config.requirement_for(r.grader))
        grader_verdicts.append(verdict.graders[0])
    verdicts = tuple(grader_verdicts)
    if config.level == "m1" or any(not g.feasible for g in verdicts):
        return PointVerdict(q_point, verdicts)
    assert pair_table is not None
    pair_verdict = m2mod.m2_integer_feasible(
        pair_table,
        q_point,
        config.requirement_for(pair_table.graders[0]),
        config.requirement_for(pair_table.graders[1]),
        budget=config.budget,
    )
    return PointVerdict(q_point, verdicts, pair_verdict.pair)


def point_report(
    config: AlarmConfig,
    responses: Sequence[ResponseCounts],
    pair_table: PairCountTable | None,
    q_point: QPoint,
) -> PointVerdict:
    """Evaluate a single caller-chosen point, with full input validation."""
    _check_inputs(config, responses, pair_table)
    if len(q_point.counts) != len(config.labels) or q_point.total != config.q:
        raise InvalidCountsError(
            f"point {q_point.counts} is not on the simplex of {config.q} items over "
            f"{len(config.labels)} labels"
        )
    return evaluate_point(config, responses, pair_table, q_point)


@dataclass(frozen=True)
class _ChunkOutcome:
    """What one contiguous rank range contributed to the scan."""

    witness_rank: int | None
    witness: PointVerdict | None
    infeasible: tuple[tuple[int, PointVerdict], ...]
    infeasible_count: int
    undecided: tuple[tuple[int, QPoint], ...]
    undecided_count: int


def _scan_chunk(
    config: AlarmConfig,
    responses: tuple[ResponseCounts, ...],
    pair_table: PairCountTable | None,
    start: int,
    stop: int,
) -> _ChunkOutcome:
    cursor = SimplexCursor(config.q, len(config.labels))
    infeasible: list[tuple[int, PointVerdict]] = []
    infeasible_count = 0
    undecided: list[tuple[int, QPoint]] = []
    undecided_count = 0
    for rank, point in zip(range(start, stop), cursor.iter_range(start, stop)):
        verdict = evaluate_point(config, responses, pair_table, point)
        status = verdict.status
        if status == FEASIBLE:
            return _ChunkOutcome(
                rank, verdict, tuple(infeasible), infeasible_count, tuple(undecided), undecided_count
            )
        if status == INFEASIBLE:
            infeasible_count += 1
            if len(infeasible) < config.retain:
                infeasible.append((rank, verdict))
        else:
            undecided_count += 1
            if len(undecided) < config.retain:
                undecided.append((rank, point))
    return _ChunkOutcome(
        None, None, tuple(infeasible), infeasible_count, tuple(undecided), undecided_count
    )


def scan_alarm(
    config: AlarmConfig,
    responses: Sequence[ResponseCounts],
    pair_table: PairCountTable | None = None,
) -> AlarmReport:
    """Scan every answer-key point and aggregate the alarm verdict.

    The simplex is split into ``config.jobs`` contiguous chunks; outcomes are
    merged in chunk order, and everything after the first witness rank is
    discarded, so the report is a pure function of the inputs no matter how
    the work was scheduled.
    """
    _check_inputs(config, responses, pair_table)
    responses = tuple(responses)
    cursor = SimplexCursor(config.q, len(config.labels))
    chunks = partition_range(config.q, len(config.labels), config.jobs)

    outcomes: list[_ChunkOutcome] = []
    if config.jobs == 1:
        for start, stop in chunks:
            outcome = _scan_chunk(config, responses, pair_table, start, stop)
            outcomes.append(outcome)
            if outcome.witness_rank is not None:
                break
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = [
                pool.submit(_scan_chunk, config, responses, pair_table, start, stop)
                for start, stop in chunks
            ]
            for future in futures:
                outcomes.append(future.result())

    witness_rank: int | None = None
    witness: PointVerdict | None = None
    infeasible: list[PointVerdict] = []
    undecided_points: list[QPoint] = []
    undecided_count = 0
    for outcome in outcomes:
        infeasible.extend(v for _, v in outcome.infeasible[: config.retain - len(infeasible)])
        undecided_points.extend(
            p for _, p in outcome.undecided[: config.retain - len(undecided_points)]
        )
        undecided_count += outcome.undecided_count
        if outcome.witness_rank is not None:
            witness_rank = outcome.witness_rank
            witness = outcome.witness
            break

    requirements = tuple(
        (r.grader, format_rational(config.requirement_for(r.grader).threshold),
         config.requirement_for(r.grader).mode)
        for r in responses
    )
    common = dict(
        labels=config.labels,
        q=config.q,
        level=config.level,
        requirements=requirements,
        simplex_points=cursor.size,
    )
    if witness is not None:
        # Scanned = points with definite verdicts: everything up to and
        # including the witness, minus any earlier budget-outs.
        return AlarmReport(
            status="no_alarm",
            q_points_scanned=witness_rank + 1 - undecided_count,
            witness_points=(witness.q_point,),
            witness_verdict=witness,
            infeasible_samples=tuple(infeasible),
            undecided_points=tuple(undecided_points),
            undecided_count=undecided_count,
            **common,
        )
    if undecided_count:
        return AlarmReport(
            status="undecided",
            q_points_scanned=cursor.size - undecided_count,
            witness_points=(),
            witness_verdict=None,
            infeasible_samples=tuple(infeasible),
            undecided_points=tuple(undecided_points),
            undecided_count=undecided_count,
            **common,
        )
    return AlarmReport(
        status="alarm",
        q_points_scanned=cursor.size,
        witness_points=(),
        witness_verdict=None,
        infeasible_samples=tuple(infeasible),
        undecided_points=(),
        undecided_count=0,
        **common,
    )


# --- JSON rendering -------------------------------------------------------


def _matrix_to_dict(matrix: ConfusionMatrix) -> dict:
    names = matrix.labels.labels
    return {
        "grader": matrix.grader,
        "cells": {
            decision: {true: matrix.cells[i][j] for j, true in enumerate(names)}
            for i, decision in enumerate(names)
        },
    }


def _triple_to_dict(table: TripleCountTable) -> dict:
    names = table.labels.labels
    return {
        "graders": list(table.graders),
        "cells": {
            l1: {
                l2: {t: table.cells[i][j][k] for k, t in enumerate(names)}
                for j, l2 in enumerate(names)
            }
            for i, l1 in enumerate(names)
        },
    }


def _pair_verdict_to_dict(pair: PairVerdict) -> dict:
    return {
        "graders": list(pair.graders),
        "status": pair.status,
        "relaxation": pair.relaxation,
        "witness": _triple_to_dict(pair.witness) if pair.witness is not None else None,
        "relaxation_witness": (
            [format_rational(v) for v in pair.relaxation_witness]
            if pair.relaxation_witness is not None
            else None
        ),
        "certificate": (
            [format_rational(v) for v in pair.certificate]
            if pair.certificate is not None
            else None
        ),
    }


def point_verdict_to_dict(verdict: PointVerdict) -> dict:
    return {
        "q_point": list(verdict.q_point.counts),
        "status": verdict.status,
        "graders": [
            {
                "grader": g.grader,
                "feasible": g.feasible,
                "violating_labels": list(g.violating_labels),
                "witness": _matrix_to_dict(g.witness) if g.witness is not None else None,
            }
            for g in verdict.graders
        ],
        "pair": _pair_verdict_to_dict(verdict.pair) if verdict.pair is not None else None,
    }


def report_to_dict(report: AlarmReport) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "alarm": report.alarm,
        "status": report.status,
        "level": report.level,
        "labels": list(report.labels.labels),
        "q": report.q,
        "requirements": [
            {"grader": g, "threshold": t, "mode": m} for g, t, m in report.requirements
        ],
        "simplex_points": report.simplex_points,
        "q_points_scanned": report.q_points_scanned,
        "undecided_count": report.undecided_count,
        "witness_points": [list(p.counts) for p in report.witness_points],
        "witness": (
            point_verdict_to_dict(report.witness_verdict)
            if report.witness_verdict is not None
            else None
        ),
        "infeasible_samples": [point_verdict_to_dict(v) for v in report.infeasible_samples],
        "undecided_points": [list(p.counts) for p in report.undecided_points],
    }


def render_report(report: AlarmReport) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"


_TOP_LEVEL_KEYS = {
    "schema",
    "alarm",
    "status",
    "level",
    "labels",
    "q",
    "requirements",
    "simplex_points",
    "q_points_scanned",
    "undecided_count",
    "witness_points",
    "witness",
    "infeasible_samples",
    "undecided_points",
}


def validate_report(data: dict) -> list[str]:
    """Schema check for a rendered report; returns problems, empty when clean.

    The key-set check is an allow-list on purpose: the verdict deliberately
    cannot say *which* grader is misaligned, only which graders fail at which
    points, so any extra field claiming a global attribution (or anything
    else) is rejected rather than ignored.
    """
    problems: list[str] = []
    if not isinstance(data, dict):
        return ["report is not a JSON object"]
    unknown = set(data) - _TOP_LEVEL_KEYS
    if unknown:
        problems.append(f"unknown top-level fields: {sorted(unknown)}")
    missing = _TOP_LEVEL_KEYS - set(data)
    if missing:
        problems.append(f"missing fields: {sorted(missing)}")
        return problems
    if data["schema"] != REPORT_SCHEMA:
        problems.append(f"unknown schema {data['schema']!r}")
    if data["status"] not in ("alarm", "no_alarm", "undecided"):
        problems.append(f"bad status {data['status']!r}")
    if data["alarm"] is not (data["status"] == "alarm"):
        problems.append("alarm flag disagrees with status")
    if data["alarm"] and data["witness_points"]:
        problems.append("alarm report carries witness points")
    if data["alarm"] and data["q_points_scanned"] != data["simplex_points"]:
        problems.append("alarm report did not decide the whole simplex")
    if data["status"] == "no_alarm" and not data["witness_points"]:
        problems.append("no_alarm report has no witness point")
    if data["status"] == "undecided" and data["undecided_count"] == 0:
        problems.append("undecided report counts no undecided points")
    for sample in data.get("infeasible_samples", []):
        extra = set(sample) - {"q_point", "status", "graders", "pair"}
        if extra:
            problems.append(f"unknown per-point fields: {sorted(extra)}")
            break
    return problems

"""From vote records to count tables.

Input is pair-comparison voting data: each record says one voter preferred
model_a, model_b, or called a tie for one comparison item. Ground truth for a
panel is the weighted majority — a tie ballot contributes half a vote to each
side — and graders themselves may be single voters (an LLM judge) or panels
aggregated the same way. Everything downstream consumes the count structures
built here; item identities are gone once counting is done.

The module also owns the counts-file format, the JSON that decouples alarm
runs from vote-level data: fully unsupervised runs can start from a counts
file that no vote file ever produced.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from fnmatch import fnmatch
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .model import (
    ConfusionMatrix,
    GraderAlarmError,
    InvalidCountsError,
    LabelMismatchError,
    LabelSet,
    PairCountTable,
    QPoint,
    ResponseCounts,
)

PAIR_LABELS = LabelSet(("model_a", "model_b", "tie"))
COUNTS_SCHEMA = "graderalarm-counts/1"

ItemKey = tuple[str, str, str]


class VoteParseError(GraderAlarmError):
    """A vote file line could not be parsed; the message carries the line number."""


@dataclass(frozen=True)
class VoteRecord:
    """One ballot: a voter's label for one (question, model_a, model_b) item."""

    question_id: str
    model_a: str
    model_b: str
    voter: str
    ballot: str

    def __post_init__(self) -> None:
        if self.ballot not in PAIR_LABELS:
            raise InvalidCountsError(
                f"ballot {self.ballot!r} is not one of {PAIR_LABELS.labels}"
            )

    @property
    def item(self) -> ItemKey:
        return (self.question_id, self.model_a, self.model_b)


@dataclass(frozen=True)
class BallotTally:
    """Weighted scores for one item: ties split into two half-votes."""

    score_a: Fraction
    score_b: Fraction

    @property
    def total(self) -> Fraction:
        return self.score_a + self.score_b


def tally_ballots(ballots: Sequence[str]) -> BallotTally:
    score_a = Fraction(0)
    score_b = Fraction(0)
    for ballot in ballots:
        if ballot == "model_a":
            score_a += 1
        elif ballot == "model_b":
            score_b += 1
        elif ballot == "tie":
            score_a += Fraction(1, 2)
            score_b += Fraction(1, 2)
        else:
            raise InvalidCountsError(f"ballot {ballot!r} is not one of {PAIR_LABELS.labels}")
    return BallotTally(score_a, score_b)


def weighted_majority(ballots: Sequence[str]) -> str:
    """Aggregate ballots into one label; equal scores come out as a tie.

    The half-vote weighting makes a lone tie ballot break symmetric deadlocks
    toward "tie", and the equal-score rule is the symmetric extension of that.
    """
    if not ballots:
        raise InvalidCountsError("cannot aggregate an empty ballot list")
    tally = tally_ballots(ballots)
    if tally.score_a > tally.score_b:
        return "model_a"
    if tally.score_b > tally.score_a:
        return "model_b"
    return "tie"


def parse_votes(lines: Iterable[str]) -> list[VoteRecord]:
    """Parse JSONL vote records, reporting the 1-based line number on failure."""
    records: list[VoteRecord] = []
    fields = ("question_id", "model_a", "model_b", "voter", "ballot")
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise VoteParseError(f"line {lineno}: invalid JSON: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise VoteParseError(f"line {lineno}: expected a JSON object")
        missing = [f for f in fields if f not in raw]
        if missing:
            raise VoteParseError(f"line {lineno}: missing fields {missing}")
        values = {f: raw[f] for f in fields}
        for f, v in values.items():
            if not isinstance(v, str):
                raise VoteParseError(f"line {lineno}: field {f!r} must be a string")
        try:
            records.append(VoteRecord(**values))
        except InvalidCountsError as exc:
            raise VoteParseError(f"line {lineno}: {exc}") from None
    return records


def read_votes(path: str | Path) -> list[VoteRecord]:
    with open(path, encoding="utf-8") as handle:
        return parse_votes(handle)


def filter_records(records: Iterable[VoteRecord], voter_patterns: Sequence[str]) -> list[VoteRecord]:
    """Records whose voter matches any of the glob patterns (or exact names)."""
    return [r for r in records if any(fnmatch(r.voter, p) for p in voter_patterns)]


def build_ground_truth(records: Iterable[VoteRecord], min_voters: int) -> dict[ItemKey, str]:
    """Weighted-majority label per item, keeping items with enough distinct voters.

    Duplicate ballots by the same voter still count toward the majority (they
    were cast), but only distinct voters count toward the ``min_voters`` gate.
    """
    if min_voters < 1:
        raise InvalidCountsError(f"min_voters must be at least 1, got {min_voters}")
    ballots: dict[ItemKey, list[str]] = {}
    voters: dict[ItemKey, set[str]] = {}
    for record in records:
        ballots.setdefault(record.item, []).append(record.ballot)
        voters.setdefault(record.item, set()).add(record.voter)
    return {
        item: weighted_majority(ballots[item])
        for item in ballots
        if len(voters[item]) >= min_voters
    }


def _check_same_items(a: Mapping[ItemKey, str], b: Mapping[ItemKey, str]) -> None:
    if set(a) != set(b):
        only_a = sorted(set(a) - set(b))[:3]
        only_b = sorted(set(b) - set(a))[:3]
        raise LabelMismatchError(
            f"item sets differ (first extras: {only_a} vs {only_b})"
        )


def build_response_counts(
    grader: str, votes: Mapping[ItemKey, str], labels: LabelSet = PAIR_LABELS
) -> ResponseCounts:
    counts = [0] * len(labels)
    for label in votes.values():
        counts[labels.index(label)] += 1
    return ResponseCounts(grader, labels, tuple(counts))


def build_pair_table(
    graders: tuple[str, str],
    votes_g1: Mapping[ItemKey, str],
    votes_g2: Mapping[ItemKey, str],
    labels: LabelSet = PAIR_LABELS,
) -> PairCountTable:
    """Joint decision counts of two graders over an identical item set."""
    _check_same_items(votes_g1, votes_g2)
    size = len(labels)
    cells = [[0] * size for _ in range(size)]
    for item, label1 in votes_g1.items():
        cells[labels.index(label1)][labels.index(votes_g2[item])] += 1
    return PairCountTable(graders, labels, tuple(tuple(row) for row in cells))


def build_confusion(
    grader: str,
    votes: Mapping[ItemKey, str],
    truth: Mapping[ItemKey, str],
    labels: LabelSet = PAIR_LABELS,
) -> ConfusionMatrix:
    """Decision-by-true counts of one grader against a ground-truth map."""
    _check_same_items(votes, truth)
    size = len(labels)
    cells = [[0] * size for _ in range(size)]
    for item, decision in votes.items():
        cells[labels.index(decision)][labels.index(truth[item])] += 1
    return ConfusionMatrix(grader, labels, tuple(tuple(row) for row in cells))


# --- counts file ----------------------------------------------------------


@dataclass(frozen=True)
class CountsBundle:
    """Everything an alarm run needs, decoupled from item-level data."""

    labels: LabelSet
    responses: tuple[ResponseCounts, ...]
    pair: PairCountTable | None = None
    truth: QPoint | None = None
    confusions: tuple[ConfusionMatrix, ...] = ()

    @property
    def q(self) -> int:
        return self.responses[0].total

    def __post_init__(self) -> None:
        if not self.responses:
            raise InvalidCountsError("counts bundle needs at least one grader")
        totals = {r.total for r in self.responses}
        if len(totals) != 1:
            raise InvalidCountsError(f"graders disagree on the item count: {sorted(totals)}")


def counts_to_dict(bundle: CountsBundle) -> dict:
    names = bundle.labels.labels
    data: dict = {
        "schema": COUNTS_SCHEMA,
        "labels": list(names),
        "q": bundle.q,
        "graders": [
            {"name": r.grader, "counts": {n: c for n, c in zip(names, r.counts)}}
            for r in bundle.responses
        ],
    }
    if bundle.pair is not None:
        data["pair"] = {
            "graders": list(bundle.pair.graders),
            "cells": {
                l1: {l2: bundle.pair.cells[i][j] for j, l2 in enumerate(names)}
                for i, l1 in enumerate(names)
            },
        }
    if bundle.truth is not None:
        data["truth"] = {n: c for n, c in zip(names, bundle.truth.counts)}
    if bundle.confusions:
        data["confusions"] = [
            {
                "grader": m.grader,
                "cells": {
                    decision: {true: m.cells[i][j] for j, true in enumerate(names)}
                    for i, decision in enumerate(names)
                },
            }
            for m in bundle.confusions
        ]
    return data


def counts_from_dict(data: dict) -> CountsBundle:
    try:
        if data.get("schema") != COUNTS_SCHEMA:
            raise InvalidCountsError(f"not a counts file (schema {data.get('schema')!r})")
        labels = LabelSet(tuple(data["labels"]))
        names = labels.labels
        responses = tuple(
            ResponseCounts(
                g["name"], labels, tuple(int(g["counts"].get(n, 0)) for n in names)
            )
            for g in data["graders"]
        )
        pair = None
        if "pair" in data:
            cells = tuple(
                tuple(int(data["pair"]["cells"][l1][l2]) for l2 in names) for l1 in names
            )
            pair = PairCountTable(tuple(data["pair"]["graders"]), labels, cells)
        truth = None
        if "truth" in data:
            truth = QPoint(tuple(int(data["truth"].get(n, 0)) for n in names))
        confusions = tuple(
            ConfusionMatrix(
                m["grader"],
                labels,
                tuple(tuple(int(m["cells"][d][t]) for t in names) for d in names),
            )
            for m in data.get("confusions", ())
        )
        bundle = CountsBundle(labels, responses, pair, truth, confusions)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidCountsError(f"malformed counts file: {exc}") from None
    if bundle.q != data["q"]:
        raise InvalidCountsError(
            f"declared q={data['q']} but grader counts sum to {bundle.q}"
        )
    _check_bundle_consistency(bundle)
    return bundle


def _check_bundle_consistency(bundle: CountsBundle) -> None:
    by_name = {r.grader: r for r in bundle.responses}
    if bundle.pair is not None:
        for slot, marginal in zip(
            bundle.pair.graders,
            (bundle.pair.row_marginals(), bundle.pair.col_marginals()),
        ):
            if slot not in by_name:
                raise InvalidCountsError(f"pair table grader {slot!r} has no counts entry")
            if by_name[slot].counts != marginal.counts:
                raise InvalidCountsError(
                    f"pair table marginals for {slot!r} disagree with its counts"
                )
    if bundle.truth is not None and bundle.truth.total != bundle.q:
        raise InvalidCountsError("truth counts do not sum to q")
    for matrix in bundle.confusions:
        if matrix.grader not in by_name:
            raise InvalidCountsError(f"confusion matrix grader {matrix.grader!r} has no counts entry")
        if matrix.row_sums() != by_name[matrix.grader].counts:
            raise InvalidCountsError(
                f"confusion matrix rows for {matrix.grader!r} disagree with its counts"
            )
        if bundle.truth is not None and matrix.col_sums() != bundle.truth.counts:
            raise InvalidCountsError(
                f"confusion matrix columns for {matrix.grader!r} disagree with the truth counts"
            )


def write_counts(path: str | Path, bundle: CountsBundle) -> None:
    text = json.dumps(counts_to_dict(bundle), sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def read_counts(path: str | Path) -> CountsBundle:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidCountsError(f"{path}: invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InvalidCountsError(f"{path}: expected a JSON object")
    return counts_from_dict(data)


# --- CSV exports ----------------------------------------------------------


def pair_table_csv(table: PairCountTable) -> str:
    """Rows are the first grader's labels, columns the second's."""
    names = table.labels.labels
    lines = [",".join([f"{table.graders[0]}/{table.graders[1]}", *names])]
    for i, l1 in enumerate(names):
        lines.append(",".join([l1, *(str(table.cells[i][j]) for j in range(len(names)))]))
    return "\n".join(lines) + "\n"


def confusion_csv(matrix: ConfusionMatrix) -> str:
    """Rows are true labels, columns are decision labels (printed table layout)."""
    names = matrix.labels.labels
    lines = [",".join(["true/decision", *names])]
    for t, true in enumerate(names):
        lines.append(",".join([true, *(str(matrix.cells[d][t]) for d in range(len(names)))]))
    return "\n".join(lines) + "\n"

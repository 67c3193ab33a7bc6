from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest

from graderalarm import (
    AbilityRequirement,
    ConfusionMatrix,
    LabelSet,
    PairCountTable,
    QPoint,
    ResponseCounts,
)

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def labels() -> LabelSet:
    return LabelSet(("model_a", "model_b", "tie"))


@pytest.fixture(scope="session")
def gpt4_counts(labels: LabelSet) -> ResponseCounts:
    return ResponseCounts("gpt4", labels, (5, 10, 10))


@pytest.fixture(scope="session")
def authors_counts(labels: LabelSet) -> ResponseCounts:
    return ResponseCounts("authors", labels, (4, 18, 3))


@pytest.fixture(scope="session")
def pair_table(labels: LabelSet) -> PairCountTable:
    # rows: gpt4's decision, cols: authors' decision
    return PairCountTable(
        ("gpt4", "authors"), labels, ((3, 2, 0), (0, 10, 0), (1, 6, 3))
    )


@pytest.fixture(scope="session")
def gpt4_confusion(labels: LabelSet) -> ConfusionMatrix:
    # rows: decision, cols: true label; column sums give the key point (4, 14, 7)
    return ConfusionMatrix("gpt4", labels, ((1, 2, 2), (0, 9, 1), (3, 3, 4)))


@pytest.fixture(scope="session")
def authors_confusion(labels: LabelSet) -> ConfusionMatrix:
    return ConfusionMatrix("authors", labels, ((2, 1, 1), (1, 12, 5), (1, 1, 1)))


@pytest.fixture(scope="session")
def truth_point() -> QPoint:
    return QPoint((4, 14, 7))


@pytest.fixture(scope="session")
def strict_half() -> AbilityRequirement:
    return AbilityRequirement(Fraction(1, 2), strict=True)


@pytest.fixture(scope="session")
def lenient_half() -> AbilityRequirement:
    return AbilityRequirement(Fraction(1, 2), strict=False)


@pytest.fixture(scope="session")
def votes_path() -> Path:
    return DATA_DIR / "mtbench25_votes.jsonl"


@pytest.fixture(scope="session")
def golden_counts_path() -> Path:
    return GOLDEN_DIR / "mtbench25_counts.json"

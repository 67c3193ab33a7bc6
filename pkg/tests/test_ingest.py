import json

import pytest

from graderalarm.ingest import (
    PAIR_LABELS,
    VoteParseError,
    VoteRecord,
    build_confusion,
    build_ground_truth,
    build_pair_table,
    build_response_counts,
    confusion_csv,
    counts_from_dict,
    counts_to_dict,
    filter_records,
    pair_table_csv,
    parse_votes,
    read_counts,
    read_votes,
    weighted_majority,
    write_counts,
)
from graderalarm.model import InvalidCountsError, LabelMismatchError, QPoint


def rec(qid, voter, ballot, model_a="m1", model_b="m2"):
    return VoteRecord(qid, model_a, model_b, voter, ballot)


class TestWeightedMajority:
    @pytest.mark.parametrize(
        "ballots,expected",
        [
            (["model_a"], "model_a"),
            (["model_a", "model_a", "model_b"], "model_a"),
            (["model_a", "model_b"], "tie"),
            (["tie"], "tie"),
            (["tie", "tie", "model_b"], "model_b"),
            (["model_a", "model_b", "tie"], "tie"),
            (["model_a", "tie"], "model_a"),  # 1.5 vs 0.5
            (["model_b", "model_b", "model_a", "tie"], "model_b"),
        ],
    )
    def test_decisions(self, ballots, expected):
        assert weighted_majority(ballots) == expected

    def test_empty_rejected(self):
        with pytest.raises(InvalidCountsError):
            weighted_majority([])

    def test_symmetry(self):
        flip = {"model_a": "model_b", "model_b": "model_a", "tie": "tie"}
        for ballots in (["model_a", "tie"], ["model_a", "model_a", "model_b", "tie"]):
            mirrored = [flip[b] for b in ballots]
            assert weighted_majority(mirrored) == flip[weighted_majority(ballots)]


class TestParseVotes:
    def test_happy_path(self):
        lines = [
            '{"question_id": "q1", "model_a": "x", "model_b": "y", "voter": "v", "ballot": "tie"}',
            "",
            '{"question_id": "q2", "model_a": "x", "model_b": "y", "voter": "v", "ballot": "model_a"}',
        ]
        records = parse_votes(lines)
        assert len(records) == 2
        assert records[0].item == ("q1", "x", "y")

    @pytest.mark.parametrize(
        "line,needle",
        [
            ("{not json", "line 1"),
            ("[1, 2]", "line 1"),
            ('{"question_id": "q"}', "line 1"),
            ('{"question_id": "q", "model_a": "x", "model_b": "y", "voter": "v", "ballot": "A"}', "ballot"),
            ('{"question_id": 3, "model_a": "x", "model_b": "y", "voter": "v", "ballot": "tie"}', "line 1"),
        ],
    )
    def test_errors_carry_line_numbers(self, line, needle):
        with pytest.raises(VoteParseError) as err:
            parse_votes([line])
        assert needle in str(err.value)

    def test_line_numbers_skip_blanks(self):
        with pytest.raises(VoteParseError) as err:
            parse_votes(["", "", "{oops"])
        assert "line 3" in str(err.value)


class TestGroundTruth:
    def test_min_voters_gate_counts_distinct_voters(self):
        records = [rec("q1", "alice", "model_a"), rec("q1", "alice", "model_a")]
        assert build_ground_truth(records, min_voters=2) == {}
        records.append(rec("q1", "bob", "model_b"))
        # alice's duplicate ballots both count toward the majority: 2 vs 1
        assert build_ground_truth(records, min_voters=2) == {("q1", "m1", "m2"): "model_a"}

    def test_filter_records_globs(self):
        records = [rec("q1", "expert1", "tie"), rec("q1", "author1", "model_a")]
        assert [r.voter for r in filter_records(records, ["expert*"])] == ["expert1"]
        assert [r.voter for r in filter_records(records, ["author1", "expert*"])] == [
            "expert1",
            "author1",
        ]


class TestBuilders:
    def test_pair_table_requires_same_items(self):
        votes1 = {("q1", "m1", "m2"): "model_a"}
        votes2 = {("q2", "m1", "m2"): "model_a"}
        with pytest.raises(LabelMismatchError):
            build_pair_table(("g1", "g2"), votes1, votes2)

    def test_confusion_requires_same_items(self):
        votes = {("q1", "m1", "m2"): "model_a"}
        truth = {("q2", "m1", "m2"): "model_a"}
        with pytest.raises(LabelMismatchError):
            build_confusion("g", votes, truth)

    def test_counts_and_tables_line_up(self):
        items = [("q%d" % i, "m1", "m2") for i in range(4)]
        votes1 = dict(zip(items, ["model_a", "model_a", "tie", "model_b"]))
        votes2 = dict(zip(items, ["model_a", "tie", "tie", "model_b"]))
        table = build_pair_table(("g1", "g2"), votes1, votes2)
        assert table.row_marginals().counts == build_response_counts("g1", votes1).counts
        assert table.col_marginals().counts == build_response_counts("g2", votes2).counts
        assert table.cell("model_a", "model_a") == 1
        assert table.cell("model_a", "tie") == 1


class TestGoldenIngestion:
    """The 25-item fixture must reproduce the reference tables exactly."""

    def test_full_pipeline(self, votes_path, truth_point):
        records = read_votes(votes_path)
        truth = build_ground_truth(filter_records(records, ["expert*"]), 2)
        gpt4 = build_ground_truth(filter_records(records, ["gpt4"]), 1)
        authors = build_ground_truth(
            filter_records(records, ["author1", "author2", "author3"]), 1
        )
        assert len(truth) == len(gpt4) == len(authors) == 25

        assert build_response_counts("gpt4", gpt4).counts == (5, 10, 10)
        assert build_response_counts("authors", authors).counts == (4, 18, 3)
        pair = build_pair_table(("gpt4", "authors"), gpt4, authors)
        assert pair.cells == ((3, 2, 0), (0, 10, 0), (1, 6, 3))
        assert build_confusion("gpt4", gpt4, truth).cells == ((1, 2, 2), (0, 9, 1), (3, 3, 4))
        assert build_confusion("authors", authors, truth).cells == (
            (2, 1, 1),
            (1, 12, 5),
            (1, 1, 1),
        )
        truth_counts = [0, 0, 0]
        for label in truth.values():
            truth_counts[PAIR_LABELS.index(label)] += 1
        assert tuple(truth_counts) == truth_point.counts

    def test_golden_counts_file_round_trips(self, golden_counts_path):
        bundle = read_counts(golden_counts_path)
        assert bundle.q == 25
        assert bundle.truth == QPoint((4, 14, 7))
        rendered = json.dumps(counts_to_dict(bundle), sort_keys=True, indent=2) + "\n"
        assert rendered == golden_counts_path.read_text()


class TestCountsIO:
    def test_round_trip(self, tmp_path, golden_counts_path):
        bundle = read_counts(golden_counts_path)
        out = tmp_path / "counts.json"
        write_counts(out, bundle)
        assert read_counts(out) == bundle
        assert out.read_text() == golden_counts_path.read_text()

    def test_consistency_cross_checks(self, golden_counts_path):
        data = json.loads(golden_counts_path.read_text())
        data["graders"][0]["counts"]["model_a"] += 1
        with pytest.raises(InvalidCountsError):
            counts_from_dict(data)

    def test_q_cross_check(self, golden_counts_path):
        data = json.loads(golden_counts_path.read_text())
        data["q"] = 24
        with pytest.raises(InvalidCountsError):
            counts_from_dict(data)

    def test_schema_check(self, golden_counts_path):
        data = json.loads(golden_counts_path.read_text())
        data["schema"] = "something/else"
        with pytest.raises(InvalidCountsError):
            counts_from_dict(data)


class TestCsv:
    def test_pair_csv(self, pair_table):
        assert pair_table_csv(pair_table) == (
            "gpt4/authors,model_a,model_b,tie\n"
            "model_a,3,2,0\n"
            "model_b,0,10,0\n"
            "tie,1,6,3\n"
        )

    def test_confusion_csv_prints_true_rows(self, gpt4_confusion):
        assert confusion_csv(gpt4_confusion) == (
            "true/decision,model_a,model_b,tie\n"
            "model_a,1,0,3\n"
            "model_b,2,9,3\n"
            "tie,2,1,4\n"
        )

import json

import pytest

from graderalarm.cli import main
from graderalarm.ingest import PAIR_LABELS, CountsBundle, write_counts
from graderalarm.model import PairCountTable, ResponseCounts

from conftest import DATA_DIR, GOLDEN_DIR

VOTES = str(DATA_DIR / "mtbench25_votes.jsonl")
GOLDEN_COUNTS = GOLDEN_DIR / "mtbench25_counts.json"

INGEST_FLAGS = [
    "--truth-voters", "expert*",
    "--grader", "gpt4=gpt4",
    "--grader", "authors=author1,author2,author3",
]


@pytest.fixture()
def counts_file(tmp_path):
    out = tmp_path / "counts.json"
    out.write_text(GOLDEN_COUNTS.read_text())
    return str(out)


@pytest.fixture()
def disagreeing_counts(tmp_path):
    """One item, two graders, opposite calls — misalignment provable from counts."""
    g1 = ResponseCounts("gpt1", PAIR_LABELS, (1, 0, 0))
    g2 = ResponseCounts("gpt2", PAIR_LABELS, (0, 1, 0))
    pair = PairCountTable(("gpt1", "gpt2"), PAIR_LABELS, ((0, 1, 0), (0, 0, 0), (0, 0, 0)))
    out = tmp_path / "one_bit.json"
    write_counts(out, CountsBundle(PAIR_LABELS, (g1, g2), pair))
    return str(out)


class TestIngest:
    def test_reproduces_golden_counts(self, tmp_path):
        out = tmp_path / "counts.json"
        assert main(["ingest", VOTES, "--out", str(out), *INGEST_FLAGS]) == 0
        assert out.read_text() == GOLDEN_COUNTS.read_text()

    def test_counts_passthrough_is_idempotent(self, tmp_path, counts_file):
        out = tmp_path / "again.json"
        assert main(["ingest", counts_file, "--out", str(out)]) == 0
        assert out.read_text() == GOLDEN_COUNTS.read_text()

    def test_csv_side_outputs(self, tmp_path):
        out = tmp_path / "counts.json"
        csv_dir = tmp_path / "csv"
        assert main(
            ["ingest", VOTES, "--out", str(out), "--csv-dir", str(csv_dir), *INGEST_FLAGS]
        ) == 0
        assert (csv_dir / "pair_gpt4_authors.csv").read_text().startswith("gpt4/authors,")
        assert (csv_dir / "confusion_authors.csv").read_text().startswith("true/decision,")

    def test_missing_grader_flag_errors(self, tmp_path, capsys):
        out = tmp_path / "counts.json"
        assert main(["ingest", VOTES, "--out", str(out)]) == 1
        assert "grader" in capsys.readouterr().err

    def test_unmatched_truth_panel_errors(self, tmp_path, capsys):
        out = tmp_path / "counts.json"
        code = main(
            ["ingest", VOTES, "--out", str(out), "--truth-voters", "nobody*",
             "--grader", "gpt4=gpt4"]
        )
        assert code == 1
        assert not out.exists()

    def test_empty_votes_file_errors(self, tmp_path):
        votes = tmp_path / "votes.jsonl"
        votes.write_text("")
        assert main(["ingest", str(votes), "--out", str(tmp_path / "c.json"),
                     "--grader", "g=v"]) == 1


class TestAlarm:
    def test_no_alarm_exits_zero_and_writes_report(self, tmp_path, counts_file, capsys):
        report = tmp_path / "report.json"
        code = main(
            ["alarm", counts_file, "--threshold", "1/2", "--strict",
             "--level", "m2", "--jobs", "1", "--out", str(report)]
        )
        assert code == 0
        data = json.loads(report.read_text())
        assert data["status"] == "no_alarm"
        assert data["witness_points"] == [[1, 19, 5]]
        assert "no alarm" in capsys.readouterr().out

    def test_alarm_exits_two(self, disagreeing_counts, capsys):
        code = main(
            ["alarm", disagreeing_counts, "--threshold", "1", "--non-strict", "--level", "m1"]
        )
        assert code == 2
        assert "ALARM" in capsys.readouterr().out

    def test_undecided_exits_one(self, counts_file, capsys):
        code = main(
            ["alarm", counts_file, "--threshold", "1/2", "--strict",
             "--level", "m2", "--jobs", "1", "--budget", "0"]
        )
        assert code == 1
        assert "undecided" in capsys.readouterr().out

    def test_decimal_threshold_rejected(self, counts_file, capsys):
        assert main(["alarm", counts_file, "--threshold", "0.5"]) == 1
        assert "error" in capsys.readouterr().err

    def test_report_bytes_identical_across_jobs(self, tmp_path, counts_file):
        texts = []
        for jobs in ("1", "4"):
            out = tmp_path / f"report{jobs}.json"
            main(["alarm", counts_file, "--threshold", "1/2", "--strict",
                  "--level", "m1", "--jobs", jobs, "--out", str(out)])
            texts.append(out.read_text())
        assert texts[0] == texts[1]


class TestPoint:
    def test_violating_labels_are_printed(self, counts_file, capsys):
        code = main(["point", counts_file, "--q-point", "25,0,0", "--threshold", "1/2"])
        assert code == 0
        out = capsys.readouterr().out
        assert "gpt4: infeasible on {model_a}" in out
        assert "model_a<= 5" in out

    def test_diagonal_export(self, tmp_path, counts_file):
        csv = tmp_path / "diagonals.csv"
        main(["point", counts_file, "--q-point", "8,9,8", "--threshold", "1/2",
              "--diagonals-csv", str(csv)])
        lines = csv.read_text().splitlines()
        assert lines[0] == "d_model_a,d_model_b,d_tie,grader"
        gpt4_rows = [l for l in lines[1:] if l.endswith(",gpt4")]
        authors_rows = [l for l in lines[1:] if l.endswith(",authors")]
        assert len(gpt4_rows) == 339
        assert len(authors_rows) == 90

    def test_off_simplex_point_errors(self, counts_file, capsys):
        assert main(["point", counts_file, "--q-point", "9,9,9", "--threshold", "1/2"]) == 1
        assert "25" in capsys.readouterr().err


class TestVerify:
    def test_m1_engine_matches_oracle(self, counts_file, capsys):
        code = main(["verify", counts_file, "--threshold", "1/2", "--strict"])
        assert code == 0
        out = capsys.readouterr().out
        assert "351 points" in out
        assert "agree everywhere" in out

    def test_zero_budget_cannot_verify(self, counts_file):
        code = main(["verify", counts_file, "--threshold", "1/2",
                     "--level", "m2", "--budget", "0"])
        assert code == 1


class TestCorrelate:
    def test_interval_output(self, counts_file, capsys):
        code = main(["correlate", counts_file, "--q-point", "4,14,7", "--label", "tie"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "0/1 .. 12/49"

    def test_zero_count_label_errors(self, counts_file, capsys):
        code = main(["correlate", counts_file, "--q-point", "0,20,5", "--label", "model_a"])
        assert code == 1
        assert "count 0" in capsys.readouterr().err

    def test_unknown_label_errors(self, counts_file):
        assert main(["correlate", counts_file, "--q-point", "4,14,7", "--label", "draw"]) == 1


class TestUsageErrors:
    def test_bad_flag_exits_one_not_two(self, capsys):
        # argparse would exit 2, which is reserved for a raised alarm
        with pytest.raises(SystemExit) as err:
            main(["alarm", "--no-such-flag"])
        assert err.value.code == 1

    def test_unknown_command_exits_one(self):
        with pytest.raises(SystemExit) as err:
            main(["panic"])
        assert err.value.code == 1

"""Command-line front end.

Subcommands wire the library into reproducible runs: ``ingest`` turns vote
files into a counts file, ``alarm`` scans the simplex and writes the report,
``point`` inspects one answer-key hypothesis, ``verify`` replays decisions
against the brute-force oracle, and ``correlate`` prints exact error
correlation ranges.

Exit codes are the machine contract: 0 no alarm, 2 alarm, 1 anything that
prevents a sound verdict (bad input, undecided scan, oracle disagreement).
Usage errors also exit 1 — argparse's default of 2 would masquerade as an
alarm.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import engine, ingest, m1 as m1mod, m2 as m2mod, oracle
from .model import (
    BUDGET_ENV_VAR,
    DEFAULT_BUDGET,
    FEASIBLE,
    INFEASIBLE,
    UNDECIDED,
    AbilityRequirement,
    AlarmReport,
    GraderAlarmError,
    InvalidCountsError,
    PointVerdict,
    QPoint,
    format_rational,
    parse_rational,
)
from .simplex import enumerate_q_points


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit 1 instead of argparse's 2."""

    def error(self, message: str) -> "argparse.NoReturn":  # type: ignore[name-defined]
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _requirement_from_args(args: argparse.Namespace) -> AbilityRequirement:
    threshold = parse_rational(args.threshold)
    return AbilityRequirement(threshold, strict=args.strict)


def _add_requirement_flags(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument(
        "--threshold",
        required=required,
        metavar="P/Q",
        help="per-label recall requirement as an exact rational, e.g. 1/2 (decimals rejected)",
    )
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument(
        "--strict",
        dest="strict",
        action="store_true",
        default=True,
        help="require recall strictly above the threshold (default)",
    )
    mode.add_argument(
        "--non-strict",
        dest="strict",
        action="store_false",
        help="require recall at or above the threshold",
    )


def _add_budget_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--budget",
        type=int,
        default=None,
        metavar="N",
        help="enumeration budget (a-priori split count); defaults to "
        f"${BUDGET_ENV_VAR} or {DEFAULT_BUDGET}",
    )


def _parse_q_point(text: str, r: int, q: int) -> QPoint:
    parts = text.split(",")
    if len(parts) != r:
        raise InvalidCountsError(f"--q-point needs {r} comma-separated counts, got {text!r}")
    try:
        counts = tuple(int(p.strip()) for p in parts)
    except ValueError:
        raise InvalidCountsError(f"--q-point counts must be integers, got {text!r}") from None
    point = QPoint(counts)
    if point.total != q:
        raise InvalidCountsError(f"--q-point sums to {point.total}, the test has {q} items")
    return point


def _print_point_verdict(bundle: ingest.CountsBundle, verdict: PointVerdict) -> None:
    names = bundle.labels.labels
    print(f"q_point: {','.join(str(c) for c in verdict.q_point.counts)}")
    for g, r in zip(verdict.graders, bundle.responses):
        bounds = ", ".join(
            f"{name}<= {min(rc, qc)}"
            for name, rc, qc in zip(names, r.counts, verdict.q_point.counts)
        )
        if g.feasible:
            print(f"  {g.grader}: feasible (max correct per label: {bounds})")
        else:
            print(
                f"  {g.grader}: infeasible on {{{', '.join(g.violating_labels)}}} "
                f"(max correct per label: {bounds})"
            )
    if verdict.pair is not None:
        print(f"  pair {verdict.pair.graders[0]}+{verdict.pair.graders[1]}: {verdict.pair.status}")
    print(f"point status: {verdict.status}")


# --- ingest ---------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    path = Path(args.votes)
    passthrough = _try_counts_passthrough(path)
    if passthrough is not None:
        bundle = passthrough
    else:
        records = ingest.read_votes(path)
        if not records:
            raise InvalidCountsError(f"{path}: no vote records")
        if not args.grader:
            raise InvalidCountsError("need at least one --grader NAME=VOTERS")
        truth_patterns = [p.strip() for p in args.truth_voters.split(",") if p.strip()]
        if not truth_patterns:
            raise InvalidCountsError("--truth-voters must name at least one voter pattern")
        truth = ingest.build_ground_truth(
            ingest.filter_records(records, truth_patterns), args.min_voters
        )
        grader_maps: list[tuple[str, dict[ingest.ItemKey, str]]] = []
        for spec_text in args.grader:
            name, _, voters_text = spec_text.partition("=")
            voters = [v.strip() for v in voters_text.split(",") if v.strip()]
            if not name or not voters:
                raise InvalidCountsError(
                    f"--grader must look like NAME=VOTER[,VOTER...], got {spec_text!r}"
                )
            votes = ingest.build_ground_truth(
                ingest.filter_records(records, voters), min_voters=1
            )
            grader_maps.append((name, votes))

        common = set(truth)
        for _, votes in grader_maps:
            common &= set(votes)
        if not common:
            raise InvalidCountsError("no items are covered by the truth panel and every grader")
        truth = {k: v for k, v in truth.items() if k in common}
        grader_maps = [
            (name, {k: v for k, v in votes.items() if k in common})
            for name, votes in grader_maps
        ]

        responses = tuple(
            ingest.build_response_counts(name, votes) for name, votes in grader_maps
        )
        pair = None
        if len(grader_maps) == 2:
            pair = ingest.build_pair_table(
                (grader_maps[0][0], grader_maps[1][0]), grader_maps[0][1], grader_maps[1][1]
            )
        truth_counts = [0] * len(ingest.PAIR_LABELS)
        for label in truth.values():
            truth_counts[ingest.PAIR_LABELS.index(label)] += 1
        confusions = tuple(
            ingest.build_confusion(name, votes, truth) for name, votes in grader_maps
        )
        bundle = ingest.CountsBundle(
            ingest.PAIR_LABELS, responses, pair, QPoint(tuple(truth_counts)), confusions
        )

    ingest.write_counts(args.out, bundle)
    if args.csv_dir:
        csv_dir = Path(args.csv_dir)
        csv_dir.mkdir(parents=True, exist_ok=True)
        if bundle.pair is not None:
            name = f"pair_{bundle.pair.graders[0]}_{bundle.pair.graders[1]}.csv"
            (csv_dir / name).write_text(ingest.pair_table_csv(bundle.pair), encoding="utf-8")
        for matrix in bundle.confusions:
            (csv_dir / f"confusion_{matrix.grader}.csv").write_text(
                ingest.confusion_csv(matrix), encoding="utf-8"
            )
    names = bundle.labels.labels
    print(f"items: {bundle.q}")
    if bundle.truth is not None:
        print("truth: " + ", ".join(f"{n}={c}" for n, c in zip(names, bundle.truth.counts)))
    for r in bundle.responses:
        print(f"{r.grader}: " + ", ".join(f"{n}={c}" for n, c in zip(names, r.counts)))
    print(f"wrote {args.out}")
    return 0


def _try_counts_passthrough(path: Path) -> ingest.CountsBundle | None:
    """A counts file given to ingest round-trips unchanged (canonical rewrite)."""
    import json

    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return None
    if isinstance(data, dict) and data.get("schema") == ingest.COUNTS_SCHEMA:
        return ingest.counts_from_dict(data)
    return None


# --- alarm ----------------------------------------------------------------


def _config_from_args(
    args: argparse.Namespace, bundle: ingest.CountsBundle, jobs: int | None = None
) -> engine.AlarmConfig:
    return engine.AlarmConfig(
        labels=bundle.labels,
        q=bundle.q,
        level=args.level,
        requirement=_requirement_from_args(args),
        jobs=jobs if jobs is not None else args.jobs,
        retain=args.retain,
        budget=args.budget,
    )


def _ordered_responses(bundle: ingest.CountsBundle, level: str) -> tuple:
    if level != "m2":
        return bundle.responses
    if bundle.pair is None:
        raise InvalidCountsError("counts file has no pair table; m2 needs one")
    by_name = {r.grader: r for r in bundle.responses}
    return tuple(by_name[g] for g in bundle.pair.graders)


def cmd_alarm(args: argparse.Namespace) -> int:
    bundle = ingest.read_counts(args.counts)
    config = _config_from_args(args, bundle)
    responses = _ordered_responses(bundle, args.level)
    report = engine.scan_alarm(config, responses, bundle.pair)
    text = engine.render_report(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    _print_alarm_summary(report)
    if args.out:
        print(f"report: {args.out}")
    if report.status == "alarm":
        return 2
    if report.status == "no_alarm":
        return 0
    return 1


def _print_alarm_summary(report: AlarmReport) -> None:
    reqs = "; ".join(f"{g} {m} {t}" for g, t, m in report.requirements)
    print(f"level {report.level}, requirement {reqs}")
    if report.status == "no_alarm":
        point = ",".join(str(c) for c in report.witness_points[0].counts)
        print(f"no alarm: answer key ({point}) admits all graders")
    elif report.status == "alarm":
        print(
            f"ALARM: all {report.simplex_points} candidate answer keys are impossible "
            "for these counts"
        )
    else:
        print(
            f"undecided: {report.undecided_count} of {report.simplex_points} points "
            "exceeded the enumeration budget and no witness was found"
        )


def cmd_point(args: argparse.Namespace) -> int:
    bundle = ingest.read_counts(args.counts)
    config = _config_from_args(args, bundle, jobs=1)
    responses = _ordered_responses(bundle, args.level)
    point = _parse_q_point(args.q_point, len(bundle.labels), bundle.q)
    verdict = engine.point_report(config, responses, bundle.pair, point)
    _print_point_verdict(bundle, verdict)
    if args.diagonals_csv:
        _write_diagonals_csv(Path(args.diagonals_csv), bundle, point)
        print(f"diagonals: {args.diagonals_csv}")
    return 0


def _write_diagonals_csv(path: Path, bundle: ingest.CountsBundle, point: QPoint) -> None:
    header = ",".join([*(f"d_{n}" for n in bundle.labels.labels), "grader"])
    lines = [header]
    for r in bundle.responses:
        diagonals = sorted(d.counts for d in m1mod.enumerate_correct_diagonals(r, point))
        lines.extend(",".join([*map(str, d), r.grader]) for d in diagonals)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# --- verify ---------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    bundle = ingest.read_counts(args.counts)
    req = _requirement_from_args(args)
    r = len(bundle.labels)
    mismatches = 0
    undecided = 0
    points = 0
    if args.level == "m1":
        for point in enumerate_q_points(bundle.q, r):
            points += 1
            for resp in bundle.responses:
                fast = m1mod.m1_feasible(resp, point, req)
                slow = oracle.oracle_m1(resp, point, req, budget=args.budget)
                if slow.status == UNDECIDED:
                    undecided += 1
                    continue
                fast_status = FEASIBLE if fast.graders[0].feasible else INFEASIBLE
                diagonals = {
                    d.counts for d in m1mod.enumerate_correct_diagonals(resp, point)
                }
                if fast_status != slow.status or diagonals != set(slow.diagonals):
                    mismatches += 1
                    print(
                        f"MISMATCH {resp.grader} at {point.counts}: "
                        f"engine {fast_status}, oracle {slow.status}"
                    )
    else:
        if bundle.pair is None:
            raise InvalidCountsError("counts file has no pair table; m2 needs one")
        responses = _ordered_responses(bundle, "m2")
        for point in enumerate_q_points(bundle.q, r):
            points += 1
            fast = m2mod.m2_integer_feasible(bundle.pair, point, req, req, budget=args.budget)
            slow = oracle.oracle_m2(bundle.pair, point, req, req, budget=args.budget)
            assert fast.pair is not None
            if UNDECIDED in (fast.pair.status, slow.status):
                undecided += 1
                continue
            if fast.pair.status != slow.status:
                mismatches += 1
                print(
                    f"MISMATCH pair at {point.counts}: "
                    f"engine {fast.pair.status}, oracle {slow.status}"
                )
    print(f"checked {points} points: {mismatches} mismatches, {undecided} undecided")
    if mismatches or undecided:
        return 1
    print("oracle and engine agree everywhere")
    return 0


# --- correlate --------------------------------------------------------------


def cmd_correlate(args: argparse.Namespace) -> int:
    bundle = ingest.read_counts(args.counts)
    if bundle.pair is None:
        raise InvalidCountsError("counts file has no pair table; correlation needs one")
    if args.label not in bundle.labels:
        raise InvalidCountsError(
            f"unknown label {args.label!r}; have {bundle.labels.labels}"
        )
    point = _parse_q_point(args.q_point, len(bundle.labels), bundle.q)
    req = _requirement_from_args(args) if args.threshold else None
    interval = m2mod.correlation_range(
        bundle.pair, point, args.label, req, req, budget=args.budget
    )
    if interval is None:
        idx = bundle.labels.index(args.label)
        if point.counts[idx] == 0:
            raise InvalidCountsError(
                f"label {args.label!r} has count 0 at this point; correlation is undefined"
            )
        raise InvalidCountsError("no integer table is compatible with these constraints")
    lo, hi = interval
    print(f"{format_rational(lo)} .. {format_rational(hi)}")
    return 0


# --- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="graderalarm",
        description="Sound misalignment alarm for multiple-choice graders, "
        "from agreement counts alone.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_ingest = sub.add_parser("ingest", help="build a counts file from vote records")
    p_ingest.add_argument("votes", help="JSONL vote records, or an existing counts file")
    p_ingest.add_argument("--out", required=True, help="counts JSON output path")
    p_ingest.add_argument(
        "--truth-voters",
        default="*",
        metavar="PATTERNS",
        help="comma-separated voter names/globs forming the ground-truth panel",
    )
    p_ingest.add_argument(
        "--min-voters", type=int, default=2, help="distinct truth voters required per item"
    )
    p_ingest.add_argument(
        "--grader",
        action="append",
        default=[],
        metavar="NAME=VOTERS",
        help="grader built from these voters (weighted majority if several); repeatable",
    )
    p_ingest.add_argument("--csv-dir", help="also write pair/confusion tables as CSV here")
    p_ingest.set_defaults(func=cmd_ingest)

    p_alarm = sub.add_parser("alarm", help="scan all answer keys and report the verdict")
    p_alarm.add_argument("counts", help="counts JSON file")
    _add_requirement_flags(p_alarm)
    p_alarm.add_argument("--level", choices=("m1", "m2"), default="m1")
    p_alarm.add_argument(
        "--jobs", type=int, default=os.cpu_count() or 1, help="worker processes"
    )
    p_alarm.add_argument(
        "--retain", type=int, default=8, help="diagnostic points kept in the report"
    )
    _add_budget_flag(p_alarm)
    p_alarm.add_argument("--out", help="write the JSON report here")
    p_alarm.set_defaults(func=cmd_alarm)

    p_point = sub.add_parser("point", help="evaluate one answer-key hypothesis")
    p_point.add_argument("counts")
    p_point.add_argument("--q-point", required=True, metavar="N,N,...")
    _add_requirement_flags(p_point)
    p_point.add_argument("--level", choices=("m1", "m2"), default="m1")
    p_point.add_argument("--retain", type=int, default=8, help=argparse.SUPPRESS)
    _add_budget_flag(p_point)
    p_point.add_argument(
        "--diagonals-csv", help="write every achievable per-label correct tuple here"
    )
    p_point.set_defaults(func=cmd_point)

    p_verify = sub.add_parser("verify", help="replay every decision against the oracle")
    p_verify.add_argument("counts")
    _add_requirement_flags(p_verify)
    p_verify.add_argument("--level", choices=("m1", "m2"), default="m1")
    _add_budget_flag(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_corr = sub.add_parser("correlate", help="exact error-correlation interval at a point")
    p_corr.add_argument("counts")
    p_corr.add_argument("--q-point", required=True, metavar="N,N,...")
    p_corr.add_argument("--label", required=True)
    _add_requirement_flags(p_corr, required=False)
    _add_budget_flag(p_corr)
    p_corr.set_defaults(func=cmd_correlate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GraderAlarmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

from __future__ import annotations

from qfsc.metrics import AggregateScore
from qfsc.report import (
    LENGTH_COLUMNS,
    QAGS_COLUMNS,
    build_report,
    build_table,
    format_mean_std,
    format_number,
    render_markdown,
)


def test_format_number():
    assert format_number(0.2) == "0.2"
    assert format_number(0.43) == "0.43"
    assert format_number(1.0) == "1"
    assert format_number(0.0) == "0"
    assert format_number(-0.0001) == "0"
    assert format_number(20.8, 2, strip_zeros=False) == "20.80"


def test_length_layout_two_decimals():
    assert format_mean_std(2080.48, 954.39, 2, False) == "2080.48 ± 954.39"
    assert format_mean_std(171, 40.04, 2, False) == "171.00 ± 40.04"


def test_ties_mark_every_tied_row():
    groups = {
        ("m", "no_aug"): {"token_f1": AggregateScore(0.5, 0.1, 3)},
        ("m", "ner_aug"): {"token_f1": AggregateScore(0.5, 0.2, 3)},
    }
    t = build_table("x", (("token_f1", "F1"),), groups)
    assert all("token_f1" in r.best_in_model and "token_f1" in r.best_overall for r in t.rows)


def test_rows_follow_setting_order_and_missing_cells():
    groups = {
        ("m", "ner_aug"): {"char_count": AggregateScore(10, 0, 1), "word_count": None},
        ("m", "no_aug"): {"char_count": AggregateScore(20, 0, 1), "word_count": None},
    }
    t = build_table("lengths", LENGTH_COLUMNS, groups, digits=2, strip_zeros=False)
    assert [r.setting for r in t.rows] == ["no_aug", "ner_aug"]
    md = render_markdown([t])
    assert "n/a" in md


def test_build_report_ignores_failed_records():
    eval_rows = [
        {"evaluator": "qags", "model": "m", "setting": "no_aug", "result": None, "error": "x"},
        {"evaluator": "qags", "model": "m", "setting": "no_aug",
         "result": {"per_question": [{"scores": {c: 1.0 for c, _ in QAGS_COLUMNS}}, {"scores": None}]}},
    ]
    (table,) = build_report([], eval_rows)
    assert table.rows[0].cells["exact_match"] == AggregateScore(1.0, 0.0, 1)


def test_length_table_is_unmarked():
    summary_rows = [{"model": "m", "setting": s, "char_count": c, "word_count": 1} for s, c in
                    (("no_aug", 10), ("ner_aug", 20))]
    (table,) = build_report(summary_rows, [])
    assert all(not r.best_in_model and not r.best_overall for r in table.rows)
    assert "**" not in render_markdown([table])

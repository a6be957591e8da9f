"""Aggregate tables from eval.jsonl / summaries.jsonl and their markdown rendering.

Three tables, one row per (model, setting) group:

* QAGS: F1, EM, edit distance, similarity. Per-question values are pooled
  across all documents of the group before taking mean and population std.
* QuestEval: per-document F1 aggregated over the group.
* Lengths: character and word counts of the summaries.

Score cells carry two markers: best within the model (rendered underlined) and
best over the whole table (rendered bold). Edit distance is lower-is-better.
Length cells are descriptive and unmarked.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from qfsc.decomposer import Setting
from qfsc.metrics import LOWER_IS_BETTER, AggregateScore, aggregate

SETTING_ORDER = [s.value for s in Setting]

QAGS_COLUMNS = (
    ("token_f1", "F1"),
    ("exact_match", "EM"),
    ("edit_distance", "Edit Distance"),
    ("similarity", "Similarity F1"),
)
QUESTEVAL_COLUMNS = (("f1", "QuestEval"), ("precision", "Precision"), ("recall", "Recall"))
LENGTH_COLUMNS = (("char_count", "Character count"), ("word_count", "Word count"))


def format_number(x: float, digits: int = 3, strip_zeros: bool = True) -> str:
    s = f"{x:.{digits}f}"
    if strip_zeros and "." in s:
        s = s.rstrip("0").rstrip(".")
    if s == "-0":
        s = "0"
    return s


def format_mean_std(mean: float, std: float, digits: int = 3, strip_zeros: bool = True) -> str:
    return f"{format_number(mean, digits, strip_zeros)} ± {format_number(std, digits, strip_zeros)}"


@dataclass
class TableRow:
    model: str
    setting: str
    cells: dict[str, Optional[AggregateScore]]
    best_in_model: set[str] = field(default_factory=set)
    best_overall: set[str] = field(default_factory=set)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "setting": self.setting,
            "cells": {k: (v.as_dict() if v else None) for k, v in self.cells.items()},
            "best_in_model": sorted(self.best_in_model),
            "best_overall": sorted(self.best_overall),
        }


@dataclass
class Table:
    name: str
    columns: tuple[tuple[str, str], ...]
    rows: list[TableRow]
    digits: int = 3
    strip_zeros: bool = True

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "columns": [c for c, _ in self.columns],
            "lower_is_better": [c for c, _ in self.columns if c in LOWER_IS_BETTER],
            "rows": [r.to_dict() for r in self.rows],
        }


def _order_key(model_order: list[str]):
    def key(row: TableRow):
        s = SETTING_ORDER.index(row.setting) if row.setting in SETTING_ORDER else len(SETTING_ORDER)
        return (model_order.index(row.model), s, row.setting)

    return key


def mark_best(rows: Sequence[TableRow], columns: Iterable[str]) -> None:
    """Set best-in-model / best-overall markers; ties mark every tied row.

    Means are compared after rounding to 9 decimals so float noise cannot
    split a genuine tie.
    """
    for col in columns:
        lower = col in LOWER_IS_BETTER

        def best(rs):
            vals = [round(r.cells[col].mean, 9) for r in rs if r.cells.get(col) is not None]
            if not vals:
                return None
            return min(vals) if lower else max(vals)

        top = best(rows)
        by_model: dict[str, list[TableRow]] = defaultdict(list)
        for r in rows:
            by_model[r.model].append(r)
        for rs in by_model.values():
            b = best(rs)
            for r in rs:
                c = r.cells.get(col)
                if c is None:
                    continue
                if round(c.mean, 9) == b:
                    r.best_in_model.add(col)
                if round(c.mean, 9) == top:
                    r.best_overall.add(col)


def build_table(name: str, columns, groups: dict[tuple[str, str], dict[str, Optional[AggregateScore]]],
                digits: int = 3, strip_zeros: bool = True, mark: bool = True) -> Table:
    model_order: list[str] = []
    for model, _ in groups:
        if model not in model_order:
            model_order.append(model)
    rows = [TableRow(m, s, dict(cells)) for (m, s), cells in groups.items()]
    rows.sort(key=_order_key(model_order))
    if mark:
        mark_best(rows, [c for c, _ in columns])
    return Table(name, tuple(columns), rows, digits, strip_zeros)


def _agg_or_none(values: list[float]) -> Optional[AggregateScore]:
    return aggregate(values) if values else None


def qags_groups(eval_rows: Iterable[dict]) -> dict[tuple[str, str], dict[str, Optional[AggregateScore]]]:
    pooled: dict[tuple[str, str], dict[str, list[float]]] = {}
    for row in eval_rows:
        if row.get("evaluator") != "qags" or row.get("result") is None:
            continue
        g = pooled.setdefault((row["model"], row["setting"]), {c: [] for c, _ in QAGS_COLUMNS})
        for q in row["result"]["per_question"]:
            if q["scores"] is None:
                continue
            for c, _ in QAGS_COLUMNS:
                g[c].append(float(q["scores"][c]))
    return {k: {c: _agg_or_none(v) for c, v in cols.items()} for k, cols in pooled.items()}


def questeval_groups(eval_rows: Iterable[dict]) -> dict[tuple[str, str], dict[str, Optional[AggregateScore]]]:
    per_doc: dict[tuple[str, str], dict[str, list[float]]] = {}
    for row in eval_rows:
        if row.get("evaluator") != "questeval" or row.get("result") is None:
            continue
        g = per_doc.setdefault((row["model"], row["setting"]), {c: [] for c, _ in QUESTEVAL_COLUMNS})
        for c, _ in QUESTEVAL_COLUMNS:
            g[c].append(float(row["result"][c]))
    return {k: {c: _agg_or_none(v) for c, v in cols.items()} for k, cols in per_doc.items()}


def length_groups(summary_rows: Iterable[dict]) -> dict[tuple[str, str], dict[str, Optional[AggregateScore]]]:
    acc: dict[tuple[str, str], dict[str, list[float]]] = {}
    for row in summary_rows:
        g = acc.setdefault((row["model"], row["setting"]), {c: [] for c, _ in LENGTH_COLUMNS})
        for c, _ in LENGTH_COLUMNS:
            g[c].append(float(row[c]))
    return {k: {c: _agg_or_none(v) for c, v in cols.items()} for k, cols in acc.items()}


def build_report(summary_rows: Sequence[dict], eval_rows: Sequence[dict]) -> list[Table]:
    tables = []
    q = qags_groups(eval_rows)
    if q:
        tables.append(build_table("qags", QAGS_COLUMNS, q))
    qe = questeval_groups(eval_rows)
    if qe:
        tables.append(build_table("questeval", QUESTEVAL_COLUMNS, qe))
    if summary_rows:
        tables.append(build_table("lengths", LENGTH_COLUMNS, length_groups(summary_rows), digits=2,
                                  strip_zeros=False, mark=False))
    return tables


def render_cell(row: TableRow, col: str, table: Table) -> str:
    agg = row.cells.get(col)
    if agg is None:
        return "n/a"
    text = format_mean_std(agg.mean, agg.std, table.digits, table.strip_zeros)
    if col in row.best_in_model:
        text = f"<u>{text}</u>"
    if col in row.best_overall:
        text = f"**{text}**"
    return text


TITLES = {
    "qags": "QAGS (mean ± std)",
    "questeval": "QuestEval (mean ± std)",
    "lengths": "Summary length (mean ± std)",
}


def render_table(table: Table) -> str:
    headers = ["Model / Setting"] + [
        f"{label} (lower is better)" if col in LOWER_IS_BETTER else label for col, label in table.columns
    ]
    lines = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
    current = None
    for row in table.rows:
        if row.model != current:
            current = row.model
            lines.append("| " + " | ".join([f"*{row.model}*"] + [""] * len(table.columns)) + " |")
        cells = [render_cell(row, c, table) for c, _ in table.columns]
        lines.append("| " + " | ".join([row.setting] + cells) + " |")
    return "\n".join(lines)


def render_markdown(tables: Sequence[Table]) -> str:
    parts = ["# Evaluation report", "",
             "Underlined: best within a model. Bold: best across the whole table.", ""]
    for t in tables:
        parts += [f"## {TITLES.get(t.name, t.name)}", "", render_table(t), ""]
    return "\n".join(parts)


def report_json(tables: Sequence[Table]) -> dict:
    return {"tables": {t.name: t.to_dict() for t in tables}}

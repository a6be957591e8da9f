"""Offline experiment on the synthetic corpus with the mock stack.

1. Runs the full CLI flow (summarize -> evaluate -> report) for all three
   settings and prints the report.
2. Scores verbatim extractive summaries and single-entity corruptions of
   them, showing the QAGS EM drop to (k-1)/k and the QuestEval F1 drop.
"""
from __future__ import annotations

import argparse
import logging
import tempfile
from pathlib import Path

from qfsc import cli, synthetic
from qfsc.backends import mock_eval_backends
from qfsc.corpus import write_corpus
from qfsc.metrics import aggregate
from qfsc.qags import qags
from qfsc.questeval import questeval
from qfsc.report import format_mean_std

log = logging.getLogger("mock_experiment")


def corruption_study(n_docs: int, seed: int) -> None:
    backends = mock_eval_backends()
    rows = {"extractive": ([], []), "corrupted": ([], [])}
    for entry in synthetic.make_corpus(n_docs, seed=seed):
        doc = entry.to_document()
        clean = synthetic.extractive_summary(entry)
        ents = synthetic.summary_entities(entry)
        bad = synthetic.corrupt_summary(clean, ents[len(ents) // 2])
        for name, summary in (("extractive", clean), ("corrupted", bad)):
            rep = qags(doc, summary, backends)
            rows[name][0].append(rep.aggregates["exact_match"].mean)
            rows[name][1].append(questeval(doc, summary, backends).f1)

    print(f"\n{'summary':<12} {'QAGS EM (per doc)':<20} {'QuestEval F1':<20}")
    for name, (em, f1) in rows.items():
        e, f = aggregate(em), aggregate(f1)
        print(f"{name:<12} {format_mean_std(e.mean, e.std):<20} {format_mean_std(f.mean, f.std):<20}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=21)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", help="keep the run directory here instead of a temp dir")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    with tempfile.TemporaryDirectory() as tmp:
        base = Path(args.out or tmp)
        base.mkdir(parents=True, exist_ok=True)
        corpus = base / "corpus.jsonl"
        write_corpus(synthetic.make_corpus(args.n, seed=args.seed), corpus)
        run_id = f"mock-n{args.n}-s{args.seed}"
        code = cli.main(["summarize", str(corpus), "--out", str(base), "--mock", "--run-id", run_id])
        if code != cli.EXIT_OK:
            raise SystemExit(code)
        code = cli.main(["evaluate", str(base / run_id), "--mock"])
        if code != cli.EXIT_OK:
            raise SystemExit(code)
        print((base / run_id / "report.md").read_text(encoding="utf-8"))
    corruption_study(args.n, args.seed)


if __name__ == "__main__":
    main()

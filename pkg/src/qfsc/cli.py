"""Command-line interface: validate, summarize, evaluate, report.

A run directory holds everything needed to reconstruct a run:

    manifest.json     run id, corpus, settings, backend digest, timestamps
    summaries.jsonl   one SummaryRecord per (entry, setting), canonical order
    timings.jsonl     per-record stage timings (kept apart so summaries are byte-stable)
    log.jsonl         warnings and per-task failures
    eval.jsonl        one evaluator result per (record, evaluator)
    report.md / report.json
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import uuid
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

from qfsc import __version__
from qfsc.backends.base import Backends
from qfsc.backends.mock import mock_eval_backends, mock_pipeline_backends
from qfsc.config import API_KEY_ENV, BackendConfig, QAConfig, RunConfig, load_config
from qfsc.corpus import CorpusEntry, CorpusError, scan_corpus
from qfsc.decomposer import Setting
from qfsc.pipeline import Pipeline, PipelineError, QueryTask, SummaryRecord
from qfsc.prompts import TEMPLATE_VERSION
from qfsc.qags import QagsError, QagsEvaluator
from qfsc.questeval import QuestEvaluator
from qfsc.report import build_report, render_markdown, report_json
from qfsc.types import RunLog

log = logging.getLogger("qfsc")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_PARTIAL = 3
EXIT_FAILED = 4

MOCK_DIGEST = "mock"
EVALUATORS = ("qags", "questeval")


class UsageError(Exception):
    pass


def utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def dump_line(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False) + "\n"


def read_jsonl(path: Path) -> list[dict]:
    """Parse a JSONL file; an unterminated or unparseable final line (crash debris) is dropped."""
    if not path.exists():
        return []
    rows = []
    lines = path.read_text(encoding="utf-8").split("\n")
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError:
            if i >= len(lines) - 2:
                log.warning("dropping truncated last line of %s", path)
                continue
            raise
    return rows


def write_atomic(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


# --- backends -----------------------------------------------------------------------------


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    qa_over = {
        k: v
        for k, v in (("top_n", args.top_n), ("threshold", args.threshold), ("chunk_budget", args.chunk_budget))
        if v is not None
    }
    if qa_over:
        cfg = dataclasses.replace(cfg, qa=dataclasses.replace(cfg.qa, **qa_over))
    if args.question_cap is not None:
        cfg = dataclasses.replace(
            cfg, eval=dataclasses.replace(cfg.eval, qags_k=args.question_cap, question_cap=args.question_cap)
        )
    if getattr(args, "workers", None) is not None:
        cfg = dataclasses.replace(cfg, task_workers=args.workers)
    return cfg


def live_backends(cfg: RunConfig) -> tuple[Backends, str]:
    """HTTP backends; fails before any work if they cannot be set up."""
    if cfg.backend is None:
        raise UsageError("no backend configured: pass --config with a 'backend' section, or use --mock")
    if not os.environ.get(API_KEY_ENV):
        raise UsageError(f"backend API key missing: set {API_KEY_ENV}, or use --mock")
    from qfsc.backends.http import http_backends

    return http_backends(cfg.backend), cfg.backend.digest()


# --- validate -------------------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    entries, diags = scan_corpus(args.corpus)
    for d in diags:
        print(f"{args.corpus}:{d}")
    if diags:
        print(f"{len(diags)} problem(s), {len(entries)} valid entr{'y' if len(entries) == 1 else 'ies'}")
        return EXIT_INVALID
    print(f"ok: {len(entries)} entries")
    return EXIT_OK


# --- summarize ------------------------------------------------------------------------------


@dataclasses.dataclass
class RunManifest:
    run_id: str
    corpus_path: str
    settings: list[str]
    backend_config_digest: str
    template_version: str
    started_at: str
    finished_at: Optional[str] = None
    qa: dict = dataclasses.field(default_factory=dict)
    eval: dict = dataclasses.field(default_factory=dict)
    status: str = "running"
    counts: dict = dataclasses.field(default_factory=dict)
    version: str = __version__

    def write(self, run_dir: Path) -> None:
        write_atomic(run_dir / "manifest.json", json.dumps(dataclasses.asdict(self), ensure_ascii=False, indent=2) + "\n")

    @classmethod
    def read(cls, run_dir: Path) -> RunManifest:
        data = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})


def _load_entries(path: str) -> list[CorpusEntry]:
    entries, diags = scan_corpus(path)
    if diags:
        raise CorpusError(diags)
    return entries


def _canonical(rows: Iterable[dict], entries: Sequence[CorpusEntry], settings: Sequence[str]) -> list[dict]:
    pos = {e.id: i for i, e in enumerate(entries)}
    spos = {s: i for i, s in enumerate(settings)}
    by_key = {(r["entry_id"], r["setting"]): r for r in rows}
    return sorted(by_key.values(), key=lambda r: (pos.get(r["entry_id"], len(pos)), spos.get(r["setting"], len(spos))))


def run_ordered(fn: Callable, items: Sequence, workers: int) -> Iterable:
    """Apply ``fn`` with up to ``workers`` threads, yielding results in input order."""
    if workers <= 1:
        for it in items:
            yield fn(it)
        return
    with ThreadPoolExecutor(workers) as pool:
        yield from pool.map(fn, items)


def cmd_summarize(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    entries = _load_entries(args.corpus)
    out = Path(args.out)

    if args.resume:
        run_dir = out / args.resume
        if not (run_dir / "manifest.json").exists():
            raise UsageError(f"nothing to resume at {run_dir}")
        manifest = RunManifest.read(run_dir)
        settings = [Setting(s).value for s in args.setting] if args.setting else manifest.settings
        if settings != manifest.settings:
            raise UsageError("settings differ from the run being resumed")
    else:
        settings = [Setting(s).value for s in (args.setting or [s.value for s in Setting])]
        run_id = args.run_id or f"run-{datetime.now(timezone.utc):%Y%m%dT%H%M%S}-{uuid.uuid4().hex[:6]}"
        run_dir = out / run_id
        if run_dir.exists() and any(run_dir.iterdir()):
            raise UsageError(f"run directory {run_dir} already exists; use --resume {run_id}")
        manifest = None

    if args.mock:
        backends, digest = mock_pipeline_backends(), MOCK_DIGEST
    else:
        backends, digest = live_backends(cfg)

    run_dir.mkdir(parents=True, exist_ok=True)
    if manifest is None:
        manifest = RunManifest(
            run_id=run_dir.name,
            corpus_path=str(Path(args.corpus).resolve()),
            settings=settings,
            backend_config_digest=digest,
            template_version=TEMPLATE_VERSION,
            started_at=utcnow(),
            qa=dataclasses.asdict(cfg.qa),
            eval=dataclasses.asdict(cfg.eval),
        )
    elif manifest.backend_config_digest != digest:
        log.warning("backend config changed since the run started (%s -> %s)", manifest.backend_config_digest, digest)
    manifest.status = "running"
    manifest.write(run_dir)

    summaries_path = run_dir / "summaries.jsonl"
    done_rows = _canonical(read_jsonl(summaries_path), entries, settings)
    write_atomic(summaries_path, "".join(dump_line(r) for r in done_rows))
    done = {(r["entry_id"], r["setting"]) for r in done_rows}
    tasks = [
        QueryTask(e.to_document(), e.query, Setting(s))
        for e in entries
        for s in settings
        if (e.id, s) not in done
    ]
    log.info("%s: %d task(s) to run, %d already done", run_dir.name, len(tasks), len(done))

    run_log = RunLog()
    pipeline = Pipeline(backends, cfg.qa, cfg.decomposition_cap, run_log=run_log)

    def attempt(task: QueryTask):
        try:
            return pipeline.summarize(task)
        except PipelineError as exc:
            return exc

    failures = 0
    with open(summaries_path, "a", encoding="utf-8") as fs, \
            open(run_dir / "timings.jsonl", "a", encoding="utf-8") as ft, \
            open(run_dir / "log.jsonl", "a", encoding="utf-8") as fl:
        for result in run_ordered(attempt, tasks, cfg.task_workers):
            if isinstance(result, PipelineError):
                failures += 1
                log.error("%s", result)
                fl.write(dump_line({"level": "error", "stage": result.stage, "entry_id": result.task.document.id,
                                    "setting": result.task.setting.value, "message": str(result),
                                    "partial": result.partial}))
                fl.flush()
                continue
            fs.write(dump_line(result.to_dict(with_timing=False)))
            fs.flush()
            ft.write(dump_line({"entry_id": result.key[0], "setting": result.key[1], "timing_ms": result.timing}))
            ft.flush()
        for ev in run_log.events:
            fl.write(dump_line(ev))

    # canonical order regardless of completion order across resumes
    rows = _canonical(read_jsonl(summaries_path), entries, settings)
    write_atomic(summaries_path, "".join(dump_line(r) for r in rows))

    manifest.finished_at = utcnow()
    manifest.counts = {"records": len(rows), "failed": failures, "expected": len(entries) * len(settings)}
    if failures == 0:
        code, manifest.status = EXIT_OK, "complete"
    elif failures < len(tasks):
        code, manifest.status = EXIT_PARTIAL, "partial"
    else:
        code, manifest.status = EXIT_FAILED, "failed"
    manifest.write(run_dir)
    print(f"{run_dir}: {len(rows)} record(s), {failures} failure(s)")
    return code


# --- evaluate / report ---------------------------------------------------------------------


def evaluate_record(row: dict, evaluator: str, runner) -> dict:
    rec = SummaryRecord.from_dict(row)
    out = {"entry_id": row["entry_id"], "setting": row["setting"], "model": row["model"],
           "evaluator": evaluator, "result": None, "error": None}
    try:
        out["result"] = runner.evaluate(rec.task.document, rec.summary).to_dict()
    except QagsError as exc:
        out["error"] = str(exc)
        out["partial"] = exc.partial.to_dict()
    except Exception as exc:  # one failed record must not sink the rest
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def write_report(run_dir: Path, out_dir: Optional[Path] = None) -> dict:
    out_dir = out_dir or run_dir
    tables = build_report(read_jsonl(run_dir / "summaries.jsonl"), read_jsonl(out_dir / "eval.jsonl"))
    data = report_json(tables)
    write_atomic(out_dir / "report.json", json.dumps(data, ensure_ascii=False, indent=2) + "\n")
    write_atomic(out_dir / "report.md", render_markdown(tables))
    return data


def _evaluate_args_config(args: argparse.Namespace, manifest: Optional[RunManifest]) -> RunConfig:
    cfg = resolve_config(args)
    if manifest is not None:
        # defaults come from the run itself unless overridden on the command line
        qa = dict(manifest.qa)
        qa.update({k: v for k, v in (("top_n", args.top_n), ("threshold", args.threshold),
                                     ("chunk_budget", args.chunk_budget)) if v is not None})
        if qa:
            cfg = dataclasses.replace(cfg, qa=QAConfig(**qa))
    return cfg


def cmd_evaluate(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    summaries = read_jsonl(run_dir / "summaries.jsonl")
    if not (run_dir / "summaries.jsonl").exists():
        raise UsageError(f"{run_dir} has no summaries.jsonl")
    manifest = RunManifest.read(run_dir) if (run_dir / "manifest.json").exists() else None
    cfg = _evaluate_args_config(args, manifest)
    evaluators = args.evaluator or list(EVALUATORS)

    if args.mock:
        backends = mock_eval_backends()
    else:
        backends, _ = live_backends(cfg)

    runners = {
        "qags": QagsEvaluator(backends, k=cfg.eval.qags_k, qa_config=cfg.qa),
        "questeval": QuestEvaluator(backends, cap=cfg.eval.question_cap, qa_config=cfg.qa),
    }
    out_dir = Path(args.out) if args.out else run_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(row, ev) for row in summaries for ev in evaluators]
    failures = 0
    with open(out_dir / "eval.jsonl", "w", encoding="utf-8") as fe:
        for res in run_ordered(lambda j: evaluate_record(j[0], j[1], runners[j[1]]), jobs, cfg.task_workers):
            failures += res["error"] is not None
            fe.write(dump_line(res))
            fe.flush()
    write_report(run_dir, out_dir)
    print(f"{out_dir}: {len(jobs)} evaluation(s), {failures} failure(s)")
    if failures == 0:
        return EXIT_OK
    return EXIT_PARTIAL if failures < len(jobs) else EXIT_FAILED


def cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    if not (run_dir / "eval.jsonl").exists() and not (run_dir / "summaries.jsonl").exists():
        raise UsageError(f"{run_dir} is not a run directory")
    write_report(run_dir)
    print((run_dir / "report.md").read_text(encoding="utf-8"))
    return EXIT_OK


# --- parser ---------------------------------------------------------------------------------


def _qa_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--top-n", type=int, help="chunks consulted per question (default 3)")
    p.add_argument("--threshold", type=float, help="chunk score a chunk must exceed (default 0.85)")
    p.add_argument("--chunk-budget", type=int, help="max characters per chunk (default 350)")
    p.add_argument("--question-cap", type=int, help="max questions per evaluator (default 10)")
    p.add_argument("--config", help="YAML/JSON run config")
    p.add_argument("--mock", action="store_true", help="use the offline mock backends")
    p.add_argument("--workers", type=int, help="concurrent tasks (default 2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfsc", description="Query-focused summarization and QA-based evaluation.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a corpus JSONL file")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("summarize", help="summarize every entry under each setting")
    p.add_argument("corpus")
    p.add_argument("--out", required=True, help="parent directory for run directories")
    p.add_argument("--setting", action="append", choices=[s.value for s in Setting],
                   help="repeatable; default all three")
    p.add_argument("--run-id")
    p.add_argument("--resume", metavar="RUN_ID", help="continue an interrupted run")
    _qa_flags(p)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("evaluate", help="score a run's summaries and write reports")
    p.add_argument("run", help="run directory")
    p.add_argument("--evaluator", action="append", choices=EVALUATORS, help="repeatable; default both")
    p.add_argument("--out", help="output directory (default: the run directory)")
    _qa_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="rebuild report.md / report.json from eval.jsonl")
    p.add_argument("run")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CorpusError as exc:
        for d in exc.diagnostics:
            print(f"qfsc {args.command}: {d}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, OSError, ValueError) as exc:
        print(f"qfsc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

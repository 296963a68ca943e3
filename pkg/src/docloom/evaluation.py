"""Dataset evaluation harness.

Runs the full ingest -> index -> ask pipeline for every record of a JSON
Lines dataset, scores each generated answer against its reference with
ROUGE-1/2/L, and reports per-record scores plus arithmetic-mean averages.
A comparison table places the averages next to published results from
other summarization systems.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .chain import ChatSession, LlmConfig
from .embed import EmbedderConfig, embed_texts
from .errors import AllZeroError, DocloomError, EmptyDatasetError, InvalidParamsError
from .index import DEFAULT_TOP_K, VectorStore
from .ingest import ChunkingParams, extract_text, format_for_filename, ingest_document
from .rouge import DEFAULT_BETA, RougeScore, rouge_l, rouge_n

# Published ROUGE-1/2/L results used for the comparison table.
PUBLISHED_ROWS: tuple[tuple[str, float, float, float], ...] = (
    ("RAG-PDF (published)", 0.4604, 0.3576, 0.4283),
    ("ML + RL ROUGE + Novel, with LM", 0.4019, 0.1738, 0.3752),
    ("COSUM", 0.4908, 0.2379, 0.2834),
    ("Latent Semantic Analysis", 0.4621, 0.2618, 0.3479),
    ("EdgeSumm", 0.5379, 0.2858, 0.4979),
    ("Generative Adversarial Network", 0.3992, 0.1765, 0.3671),
    ("TFRSP", 0.2483, 0.2874, 0.2043),
)
LOCAL_ROW_LABEL = "This run (local)"

METRIC_NAMES = ("rouge1", "rouge2", "rougeL")


@dataclass(frozen=True)
class EvalRecord:
    record_id: str
    document_path: str
    question: str
    reference: str

    def __post_init__(self):
        if not self.reference:
            raise DocloomError(f"record {self.record_id!r} has an empty reference")


@dataclass(frozen=True)
class RecordScores:
    record_id: str
    rouge1: RougeScore
    rouge2: RougeScore
    rougeL: RougeScore
    answer: str


@dataclass(frozen=True)
class RecordFailure:
    record_id: str
    error: str


@dataclass(frozen=True)
class EvalReport:
    beta: float
    records: tuple[RecordScores, ...]  # sorted by record_id; successes only
    failures: tuple[RecordFailure, ...]
    averages: dict[str, float]  # metric name -> mean F over successes


@dataclass(frozen=True)
class PipelineConfig:
    chunking: ChunkingParams = ChunkingParams()
    embedder: EmbedderConfig = EmbedderConfig()
    llm: LlmConfig = LlmConfig()
    k: int = DEFAULT_TOP_K
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParamsError(f"k must be >= 1, got {self.k}")
        if not self.beta > 0:
            raise InvalidParamsError(f"beta must be > 0, got {self.beta}")


def load_dataset(path: str | Path) -> list[EvalRecord]:
    """Read a JSON Lines dataset: one record per line with keys
    id, document, question, reference."""
    records = []
    base = Path(path).parent
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            document = row["document"]
            if not Path(document).is_absolute():
                document = str(base / document)
            records.append(EvalRecord(
                record_id=str(row["id"]),
                document_path=document,
                question=row["question"],
                reference=row["reference"],
            ))
        except (KeyError, ValueError, TypeError) as exc:
            raise DocloomError(f"bad dataset line {line_no}: {exc}") from exc
    return records


def answer_record(record: EvalRecord, config: PipelineConfig) -> str:
    """Run one record through ingest -> embed -> index -> ask."""
    path = Path(record.document_path)
    doc = extract_text(path.read_bytes(), format_for_filename(path.name),
                       source_name=path.name)
    chunks = ingest_document(doc, config.chunking)
    store = VectorStore(config.embedder.dim)
    for chunk in chunks:
        try:
            vector = embed_texts([chunk.text], config.embedder)[0]
        except AllZeroError:
            continue  # chunk has no embeddable signal; leave it unindexed
        store.add(chunk, vector)
    session = ChatSession(store, config.embedder, config.llm, k=config.k)
    return session.ask(record.question).text


def evaluate_dataset(records: list[EvalRecord],
                     config: PipelineConfig | None = None) -> EvalReport:
    """Score every record; failures are collected, not raised.

    Averages are arithmetic means of the per-record F values over the
    successful records only.
    """
    if not records:
        raise EmptyDatasetError("dataset contains no records")
    config = config or PipelineConfig()
    scored: list[RecordScores] = []
    failures: list[RecordFailure] = []
    for record in records:
        try:
            answer = answer_record(record, config)
            scored.append(RecordScores(
                record_id=record.record_id,
                rouge1=rouge_n(answer, record.reference, 1),
                rouge2=rouge_n(answer, record.reference, 2),
                rougeL=rouge_l(answer, record.reference, config.beta),
                answer=answer,
            ))
        except (DocloomError, OSError) as exc:
            failures.append(RecordFailure(record.record_id, f"{type(exc).__name__}: {exc}"))
    scored.sort(key=lambda s: s.record_id)
    failures.sort(key=lambda f: f.record_id)
    averages = {}
    for name in METRIC_NAMES:
        values = [getattr(s, name).f for s in scored]
        averages[name] = sum(values) / len(values) if values else 0.0
    return EvalReport(
        beta=config.beta,
        records=tuple(scored),
        failures=tuple(failures),
        averages=averages,
    )


def report_to_json(report: EvalReport) -> str:
    """Canonical JSON rendering; byte-stable for identical reports."""
    def score_dict(score: RougeScore) -> dict:
        return {"recall": score.recall, "precision": score.precision, "f": score.f}

    payload = {
        "beta": report.beta,
        "n_records": len(report.records) + len(report.failures),
        "n_failures": len(report.failures),
        "averages": report.averages,
        "records": [
            {
                "id": s.record_id,
                "rouge1": score_dict(s.rouge1),
                "rouge2": score_dict(s.rouge2),
                "rougeL": score_dict(s.rougeL),
            }
            for s in report.records
        ],
        "failures": [{"id": f.record_id, "error": f.error} for f in report.failures],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _format_row(cells: list[str], widths: list[int]) -> str:
    return "  ".join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()


def render_metrics_table(report: EvalReport) -> str:
    """Averages as an aligned two-column text table."""
    rows = [["Performance Metric", "Average F"]]
    for label, name in (("ROUGE-1", "rouge1"), ("ROUGE-2", "rouge2"),
                        ("ROUGE-L", "rougeL")):
        rows.append([label, f"{report.averages[name]:.4f}"])
    widths = [max(len(r[i]) for r in rows) for i in range(2)]
    lines = [_format_row(rows[0], widths), "-" * (sum(widths) + 2)]
    lines.extend(_format_row(row, widths) for row in rows[1:])
    return "\n".join(lines)


def render_comparison(report: EvalReport) -> str:
    """This run's averages alongside the published scoreboard rows."""
    rows = [["Model", "ROUGE-1", "ROUGE-2", "ROUGE-L"]]
    rows.append([LOCAL_ROW_LABEL] +
                [f"{report.averages[name]:.4f}" for name in METRIC_NAMES])
    for label, r1, r2, rl in PUBLISHED_ROWS:
        rows.append([label, f"{r1:.4f}", f"{r2:.4f}", f"{rl:.4f}"])
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = [_format_row(rows[0], widths), "-" * (sum(widths) + 6)]
    lines.extend(_format_row(row, widths) for row in rows[1:])
    return "\n".join(lines)


def write_records_csv(report: EvalReport, path: str | Path) -> None:
    """Per-record scores as a delimited table."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["id"]
        for name in METRIC_NAMES:
            header += [f"{name}_recall", f"{name}_precision", f"{name}_f"]
        writer.writerow(header)
        for s in report.records:
            row = [s.record_id]
            for name in METRIC_NAMES:
                score = getattr(s, name)
                row += [f"{score.recall:.6f}", f"{score.precision:.6f}", f"{score.f:.6f}"]
            writer.writerow(row)

"""Command-line entry points: ingest, chat, eval, serve.

Exit codes: 0 success, 1 runtime failure, 2 usage error, 78 config error.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import NoReturn

import click

from . import __version__
from .chain import ChatSession, LlmConfig, LlmKind
from .embed import EmbedderConfig, EmbedderKind, embed_texts
from .errors import AllZeroError, ConfigError, DocloomError
from .index import DEFAULT_TOP_K, VectorStore
from .ingest import ChunkingParams, extract_text, format_for_filename, ingest_document

_PREVIEW_CHARS = 80


def _fail(message: str, code: int = 1) -> NoReturn:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _embedder_config(embedder: str, dim: int, endpoint: str, model: str) -> EmbedderConfig:
    return EmbedderConfig(kind=EmbedderKind(embedder), dim=dim,
                          endpoint_url=endpoint,
                          **({"model_id": model} if model else {}))


def _llm_config(llm: str, endpoint: str, model: str) -> LlmConfig:
    return LlmConfig(kind=LlmKind(llm), model_id=model, endpoint_url=endpoint)


def _build_store(data: bytes, filename: str, chunking: ChunkingParams,
                 embedder: EmbedderConfig) -> tuple[VectorStore, int]:
    """Extract, chunk, and embed one document into a fresh store.

    The document id is derived from the content hash, so re-running on the
    same bytes produces an identical store file.
    """
    doc = extract_text(data, format_for_filename(filename), source_name=filename)
    chunks = ingest_document(doc, chunking)
    store = VectorStore(embedder.dim)
    for chunk in chunks:
        try:
            vector = embed_texts([chunk.text], embedder)[0]
        except AllZeroError:
            continue
        store.add(chunk, vector)
    return store, len(chunks)


def _preview(text: str, limit: int = _PREVIEW_CHARS) -> str:
    flat = " ".join(text.split())
    return flat if len(flat) <= limit else flat[:limit] + "…"


@click.group()
@click.version_option(version=__version__, prog_name="docloom")
def main():
    """Document chat: ingest files, retrieve, answer with sources."""


_embed_options = [
    click.option("--embedder", type=click.Choice([k.value for k in EmbedderKind]),
                 default=EmbedderKind.HASHED.value, show_default=True,
                 help="Embedding backend."),
    click.option("--dim", type=int, default=EmbedderConfig().dim, show_default=True,
                 help="Embedding dimensionality."),
    click.option("--embed-endpoint", default="", help="Remote embedder URL."),
    click.option("--embed-model", default="", help="Remote embedder model id."),
]

_llm_options = [
    click.option("--llm", type=click.Choice([k.value for k in LlmKind]),
                 default=LlmKind.EXTRACTIVE_STUB.value, show_default=True,
                 help="Answer backend."),
    click.option("--llm-endpoint", default="", help="Remote chat completion URL."),
    click.option("--llm-model", default="", help="Remote chat model id."),
]


def _apply(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--store", "store_path", type=click.Path(dir_okay=False, path_type=Path),
              default=None, help="Output store path [default: <file>.dlvs].")
@click.option("--chunk-size", type=int, default=ChunkingParams().chunk_size,
              show_default=True)
@click.option("--overlap", type=int, default=ChunkingParams().chunk_overlap,
              show_default=True)
@_apply(_embed_options)
def ingest(file: Path, store_path: Path | None, chunk_size: int, overlap: int,
           embedder: str, dim: int, embed_endpoint: str, embed_model: str):
    """Chunk and embed FILE into a vector store."""
    if store_path is None:
        store_path = file.with_suffix(file.suffix + ".dlvs")
    try:
        chunking = ChunkingParams(chunk_size=chunk_size, chunk_overlap=overlap)
        embed_cfg = _embedder_config(embedder, dim, embed_endpoint, embed_model)
        store, chunk_count = _build_store(file.read_bytes(), file.name,
                                          chunking, embed_cfg)
        store.save(store_path)
    except (DocloomError, OSError) as exc:
        _fail(str(exc))
    click.echo(f"{chunk_count} chunks -> {store_path}")


@main.command()
@click.option("--store", "store_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Vector store to chat against.")
@click.option("--k", type=int, default=DEFAULT_TOP_K, show_default=True,
              help="Chunks retrieved per question.")
@_apply(_llm_options)
@_apply(_embed_options)
def chat(store_path: Path, k: int, llm: str, llm_endpoint: str, llm_model: str,
         embedder: str, dim: int, embed_endpoint: str, embed_model: str):
    """Interactive question loop over an ingested store. :quit exits."""
    try:
        store = VectorStore.load(store_path)
        embed_cfg = _embedder_config(embedder, dim, embed_endpoint, embed_model)
        llm_cfg = _llm_config(llm, llm_endpoint, llm_model)
        session = ChatSession(store, embed_cfg, llm_cfg, k=k)
    except DocloomError as exc:
        _fail(str(exc))
    click.echo(f"docloom chat: {len(store)} chunks from {store_path.name}. "
               ":quit to exit.")
    while True:
        try:
            question = input("> ").strip()
        except EOFError:
            break
        if not question:
            continue
        if question == ":quit":
            break
        try:
            answer = session.ask(question)
        except DocloomError as exc:
            click.echo(f"error: {exc}", err=True)
            continue
        click.echo(answer.text)
        for source in answer.sources:
            click.echo(f"{source.source_id} ({source.source_key}): "
                       f"{_preview(source.excerpt)}")


@main.command(name="eval")
@click.option("--dataset", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="JSONL dataset: id, document, question, reference.")
@click.option("--beta", type=float, default=None,
              help="ROUGE-L beta [default: 1.2].")
@click.option("--k", type=int, default=DEFAULT_TOP_K, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path),
              default=None, help="Directory for report JSON, CSV, and figures.")
@click.option("--strict", is_flag=True,
              help="Exit nonzero if any record fails.")
@_apply(_llm_options)
@_apply(_embed_options)
def eval_cmd(dataset: Path, beta: float | None, k: int, out_dir: Path | None,
             strict: bool, llm: str, llm_endpoint: str, llm_model: str,
             embedder: str, dim: int, embed_endpoint: str, embed_model: str):
    """Score the pipeline on a dataset and print the results tables."""
    from .evaluation import (PipelineConfig, evaluate_dataset, load_dataset,
                             render_comparison, render_metrics_table,
                             report_to_json, write_records_csv)

    try:
        records = load_dataset(dataset)
        kwargs = {} if beta is None else {"beta": beta}
        config = PipelineConfig(
            embedder=_embedder_config(embedder, dim, embed_endpoint, embed_model),
            llm=_llm_config(llm, llm_endpoint, llm_model),
            k=k, **kwargs)
        report = evaluate_dataset(records, config)
    except (DocloomError, OSError) as exc:
        _fail(str(exc))
    click.echo(render_metrics_table(report))
    click.echo("")
    click.echo(render_comparison(report))
    averages = " / ".join(f"{report.averages[m]:.4f}"
                          for m in ("rouge1", "rouge2", "rougeL"))
    click.echo(f"\nAverage F (R1 / R2 / RL): {averages}")
    if report.failures:
        for failure in report.failures:
            click.echo(f"failed: {failure.record_id}: {failure.error}", err=True)
    if out_dir is not None:
        from .figures import render_report_figures
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(report_to_json(report), encoding="utf-8")
        write_records_csv(report, out_dir / "records.csv")
        figures = render_report_figures(report, out_dir)
        written = ["report.json", "records.csv"] + [p.name for p in figures]
        click.echo("wrote " + ", ".join(written) + f" to {out_dir}")
    if strict and report.failures:
        sys.exit(1)


@main.command()
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="TOML config file.")
@click.option("--host", default=None, help="Override configured bind host.")
@click.option("--port", type=int, default=None, help="Override configured port.")
def serve(config_path: Path | None, host: str | None, port: int | None):
    """Run the HTTP service until interrupted."""
    import dataclasses

    import uvicorn

    from .service import AppConfig, create_app, load_config

    try:
        config = load_config(config_path) if config_path else AppConfig()
        overrides = {}
        if host is not None:
            overrides["host"] = host
        if port is not None:
            overrides["port"] = port
        if overrides:
            config = dataclasses.replace(config, **overrides)
    except ConfigError as exc:
        _fail(str(exc), code=78)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


if __name__ == "__main__":
    main()

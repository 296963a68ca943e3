"""Conversational retrieval over documents: ingest, embed, rank, answer, score.

The service (`docloom.service`), figure rendering (`docloom.figures`), and
CLI (`docloom.cli`) pull in heavier dependencies and are imported on demand
rather than here.
"""

from .chain import (
    ChatAnswer,
    ChatSession,
    ConversationMemory,
    LlmConfig,
    LlmKind,
    SourceRef,
    build_prompt,
    extractive_respond,
    remote_complete,
    split_sentences,
)
from .embed import (
    EmbedderConfig,
    EmbedderKind,
    embed_texts,
    fnv1a64,
    hashed_embed,
    remote_embed,
    tokenize,
)
from .errors import (
    AllZeroError,
    ChecksumMismatchError,
    ConfigError,
    CorruptStoreError,
    DimensionMismatchError,
    DocloomError,
    DuplicateIdError,
    EmptyCompletionError,
    EmptyDatasetError,
    EmptyDocumentError,
    InvalidParamsError,
    MalformedDocumentError,
    NoContextError,
    ProviderError,
    ProviderUnreachableError,
    ZeroVectorError,
)
from .evaluation import (
    EvalRecord,
    EvalReport,
    PipelineConfig,
    evaluate_dataset,
    load_dataset,
    render_comparison,
    render_metrics_table,
    report_to_json,
    write_records_csv,
)
from .index import RetrievalResult, StoreEntry, VectorStore, cosine_similarity, crc32c
from .ingest import (
    Chunk,
    ChunkingParams,
    ChunkMetadata,
    DocumentFormat,
    RawDocument,
    chunk_text,
    extract_text,
    ingest_document,
)
from .rouge import RougeScore, lcs_length, ngrams, rouge_l, rouge_n

__version__ = "0.1.0"

__all__ = [
    "AllZeroError",
    "ChatAnswer",
    "ChatSession",
    "ChecksumMismatchError",
    "Chunk",
    "ChunkMetadata",
    "ChunkingParams",
    "ConfigError",
    "ConversationMemory",
    "CorruptStoreError",
    "DimensionMismatchError",
    "DocloomError",
    "DocumentFormat",
    "DuplicateIdError",
    "EmbedderConfig",
    "EmbedderKind",
    "EmptyCompletionError",
    "EmptyDatasetError",
    "EmptyDocumentError",
    "EvalRecord",
    "EvalReport",
    "InvalidParamsError",
    "LlmConfig",
    "LlmKind",
    "MalformedDocumentError",
    "NoContextError",
    "PipelineConfig",
    "ProviderError",
    "ProviderUnreachableError",
    "RawDocument",
    "RetrievalResult",
    "RougeScore",
    "SourceRef",
    "StoreEntry",
    "VectorStore",
    "ZeroVectorError",
    "build_prompt",
    "chunk_text",
    "cosine_similarity",
    "crc32c",
    "embed_texts",
    "evaluate_dataset",
    "extract_text",
    "extractive_respond",
    "fnv1a64",
    "hashed_embed",
    "ingest_document",
    "lcs_length",
    "load_dataset",
    "ngrams",
    "remote_complete",
    "remote_embed",
    "render_comparison",
    "render_metrics_table",
    "report_to_json",
    "rouge_l",
    "rouge_n",
    "split_sentences",
    "tokenize",
    "write_records_csv",
]

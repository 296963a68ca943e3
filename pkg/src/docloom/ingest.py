"""Document ingestion: text extraction and overlapping sliding-window chunking.

Chunk n (1-based) starts at (n-1) * (chunk_size - chunk_overlap) and ends
chunk_size characters later, clamped to the text length; generation stops
once a chunk reaches the end of the text. All offsets count Unicode code
points, never bytes, so multi-byte text is never split mid-character.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, replace
from enum import Enum

from .errors import EmptyDocumentError, InvalidParamsError, MalformedDocumentError
from .pdf import extract_pdf_pages

DEFAULT_CHUNK_SIZE = 1000
DEFAULT_CHUNK_OVERLAP = 100

# a paragraph break is a newline followed by one or more blank lines
_PARA_BREAK_RE = re.compile(r"\n(?:[ \t]*\n)+")


class DocumentFormat(str, Enum):
    PLAIN_TEXT = "plain_text"
    PDF = "pdf"


@dataclass(frozen=True)
class RawDocument:
    """Extracted document text, one entry per physical page."""

    doc_id: str
    source_name: str
    pages: tuple[str, ...]

    @property
    def text(self) -> str:
        """Full document text: all pages concatenated."""
        return "".join(self.pages)


@dataclass(frozen=True)
class ChunkingParams:
    chunk_size: int = DEFAULT_CHUNK_SIZE
    chunk_overlap: int = DEFAULT_CHUNK_OVERLAP

    def __post_init__(self):
        if self.chunk_size < 1:
            raise InvalidParamsError(f"chunk_size must be >= 1, got {self.chunk_size}")
        if not 0 <= self.chunk_overlap < self.chunk_size:
            raise InvalidParamsError(
                f"chunk_overlap must be in [0, chunk_size), got "
                f"{self.chunk_overlap} with chunk_size {self.chunk_size}"
            )


@dataclass(frozen=True)
class ChunkMetadata:
    """Provenance of a chunk: 1-based page and paragraph of its start."""

    page: int
    paragraph: int

    @property
    def source_key(self) -> str:
        return f"p{self.page}-pl{self.paragraph}"

    def to_dict(self) -> dict:
        return {"page": self.page, "paragraph": self.paragraph,
                "source_key": self.source_key}

    @classmethod
    def from_dict(cls, data: dict) -> "ChunkMetadata":
        return cls(page=int(data["page"]), paragraph=int(data["paragraph"]))


@dataclass(frozen=True)
class Chunk:
    """A contiguous span of document text: text == document[start:end]."""

    chunk_id: str
    doc_id: str
    text: str
    start_index: int
    end_index: int
    metadata: ChunkMetadata | None = None


def extract_text(document_bytes: bytes, format: DocumentFormat,
                 doc_id: str | None = None, source_name: str = "") -> RawDocument:
    """Extract page texts from raw document bytes.

    Plain text yields exactly one page. When doc_id is omitted it is
    derived from a content hash, so repeated extraction is deterministic.
    """
    if format is DocumentFormat.PLAIN_TEXT:
        try:
            pages = [document_bytes.decode("utf-8")]
        except UnicodeDecodeError as exc:
            raise MalformedDocumentError(f"input is not valid UTF-8: {exc}") from exc
    elif format is DocumentFormat.PDF:
        pages = extract_pdf_pages(document_bytes)
    else:
        raise InvalidParamsError(f"unsupported format: {format!r}")
    if sum(len(p) for p in pages) == 0:
        raise EmptyDocumentError("document contains no extractable characters")
    if doc_id is None:
        doc_id = hashlib.sha256(document_bytes).hexdigest()[:12]
    return RawDocument(doc_id=doc_id, source_name=source_name, pages=tuple(pages))


def chunk_text(text: str, params: ChunkingParams, doc_id: str = "") -> list[Chunk]:
    """Split text into overlapping chunks.

    Consecutive chunks overlap by exactly params.chunk_overlap characters;
    the final chunk is clamped to the text length.
    """
    length = len(text)
    chunks: list[Chunk] = []
    step = params.chunk_size - params.chunk_overlap
    n = 1
    while True:
        start = (n - 1) * step
        if start >= length:
            break
        end = min(start + params.chunk_size, length)
        prefix = f"{doc_id}-" if doc_id else ""
        chunks.append(Chunk(
            chunk_id=f"{prefix}c{n:05d}",
            doc_id=doc_id,
            text=text[start:end],
            start_index=start,
            end_index=end,
        ))
        if end == length:
            break
        n += 1
    return chunks


def _page_starts(doc: RawDocument) -> list[int]:
    starts = [0]
    for page in doc.pages[:-1]:
        starts.append(starts[-1] + len(page))
    return starts


def _paragraph_at(page_text: str, local_offset: int) -> int:
    count = 1
    for m in _PARA_BREAK_RE.finditer(page_text):
        if m.end() <= local_offset:
            count += 1
        else:
            break
    return count


def assign_metadata(doc: RawDocument, chunks: list[Chunk]) -> list[Chunk]:
    """Tag each chunk with the page and paragraph containing its start.

    Chunks must have been produced from the concatenation of doc.pages.
    Paragraphs are blank-line-separated blocks, counted per page.
    """
    starts = _page_starts(doc)
    tagged: list[Chunk] = []
    for chunk in chunks:
        page = 1
        for i, page_start in enumerate(starts, start=1):
            if chunk.start_index >= page_start:
                page = i
        local = chunk.start_index - starts[page - 1]
        meta = ChunkMetadata(page=page, paragraph=_paragraph_at(doc.pages[page - 1], local))
        tagged.append(replace(chunk, doc_id=chunk.doc_id or doc.doc_id, metadata=meta))
    return tagged


def ingest_document(doc: RawDocument, params: ChunkingParams) -> list[Chunk]:
    """Chunk a document and tag every chunk with provenance metadata."""
    return assign_metadata(doc, chunk_text(doc.text, params, doc_id=doc.doc_id))


def format_for_filename(name: str) -> DocumentFormat:
    """Map a filename extension to a document format."""
    lowered = name.lower()
    if lowered.endswith(".txt"):
        return DocumentFormat.PLAIN_TEXT
    if lowered.endswith(".pdf"):
        return DocumentFormat.PDF
    raise InvalidParamsError(f"unsupported file extension: {name!r}")


def chunks_to_jsonl(chunks: list[Chunk]) -> str:
    """Serialize chunks to the JSON Lines debug dump format."""
    lines = []
    for c in chunks:
        lines.append(json.dumps({
            "chunk_id": c.chunk_id,
            "doc_id": c.doc_id,
            "start": c.start_index,
            "end": c.end_index,
            "source_key": c.metadata.source_key if c.metadata else None,
            "text": c.text,
        }, ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")

"""Exact cosine top-k vector store with checksummed binary persistence.

Retrieval is a brute-force scan: scores are computed against every stored
vector in 64-bit arithmetic, ties broken by insertion order. Vectors are
held at 32-bit precision, matching the on-disk layout.

Store file layout (all integers little-endian):

    magic "DLVS" | version u16 | dim u32 | entry count u64
    per entry: chunk_id (u32 length + UTF-8)
               metadata (u32 length + canonical JSON)
               text     (u32 length + UTF-8)
               vector   (dim * f32)
    CRC32C u32 over every preceding byte
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ChecksumMismatchError,
    CorruptStoreError,
    DimensionMismatchError,
    DuplicateIdError,
    InvalidParamsError,
    ZeroVectorError,
)
from .ingest import Chunk, ChunkMetadata

MAGIC = b"DLVS"
FORMAT_VERSION = 1
DEFAULT_TOP_K = 4

_HEADER = struct.Struct("<4sHIQ")
_U32 = struct.Struct("<I")


def _build_crc32c_table() -> list[int]:
    poly = 0x82F63B78  # Castagnoli, reflected
    table = []
    for i in range(256):
        crc = i
        for _ in range(8):
            crc = (crc >> 1) ^ poly if crc & 1 else crc >> 1
        table.append(crc)
    return table


_CRC32C_TABLE = _build_crc32c_table()


def crc32c(data: bytes) -> int:
    crc = 0xFFFFFFFF
    for byte in data:
        crc = _CRC32C_TABLE[(crc ^ byte) & 0xFF] ^ (crc >> 8)
    return crc ^ 0xFFFFFFFF


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of the angle between u and v, clamped to [-1, 1].

    Dot and both squared norms are accumulated in float64; the evaluation
    is symmetric in its arguments down to the last bit.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"dimensions differ: {u.shape} vs {v.shape}")
    dot = float(np.dot(u, v))
    norm_u_sq = float(np.dot(u, u))
    norm_v_sq = float(np.dot(v, v))
    if norm_u_sq == 0.0 or norm_v_sq == 0.0:
        raise ZeroVectorError("cosine similarity is undefined for zero vectors")
    denom = math.sqrt(norm_u_sq * norm_v_sq)
    if denom == 0.0 or math.isinf(denom):
        # the product of two tiny (or huge) squared norms can leave the
        # float64 range even when both norms are representable
        denom = math.sqrt(norm_u_sq) * math.sqrt(norm_v_sq)
    return min(1.0, max(-1.0, dot / denom))


@dataclass(frozen=True)
class RetrievalResult:
    chunk_id: str
    score: float
    rank: int
    metadata: ChunkMetadata
    text: str


@dataclass(frozen=True)
class StoreEntry:
    chunk_id: str
    vector: np.ndarray  # float32, length == store dim
    metadata: ChunkMetadata
    text: str


class VectorStore:
    """Ordered (chunk_id, vector, metadata, text) collection; one writer,
    many concurrent readers."""

    def __init__(self, dim: int):
        if dim < 1:
            raise InvalidParamsError(f"dim must be >= 1, got {dim}")
        self.dim = dim
        self.insertion_counter = 0
        self._entries: list[StoreEntry] = []
        self._by_id: dict[str, int] = {}
        self._matrix: np.ndarray | None = None  # cached float64 view for top_k
        self._norms: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorStore):
            return NotImplemented
        if self.dim != other.dim or len(self) != len(other):
            return False
        return all(
            a.chunk_id == b.chunk_id and a.text == b.text
            and a.metadata == b.metadata
            and a.vector.tobytes() == b.vector.tobytes()
            for a, b in zip(self._entries, other._entries)
        )

    @property
    def entries(self) -> tuple[StoreEntry, ...]:
        return tuple(self._entries)

    def get(self, chunk_id: str) -> StoreEntry | None:
        pos = self._by_id.get(chunk_id)
        return self._entries[pos] if pos is not None else None

    def add(self, chunk: Chunk, vector: np.ndarray) -> str:
        """Append a chunk with its vector; returns the chunk id."""
        vec = np.asarray(vector, dtype=np.float32)
        if vec.ndim != 1 or vec.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"vector has shape {vec.shape}, store dim is {self.dim}")
        if not np.all(np.isfinite(vec)):
            raise InvalidParamsError("vector components must be finite")
        if chunk.chunk_id in self._by_id:
            raise DuplicateIdError(f"chunk id already present: {chunk.chunk_id!r}")
        if chunk.metadata is None:
            raise InvalidParamsError(f"chunk {chunk.chunk_id!r} has no metadata")
        self._by_id[chunk.chunk_id] = len(self._entries)
        self._entries.append(StoreEntry(chunk.chunk_id, vec, chunk.metadata, chunk.text))
        self.insertion_counter += 1
        self._matrix = None
        self._norms = None
        return chunk.chunk_id

    def _score_all(self, query: np.ndarray) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.stack([e.vector for e in self._entries]).astype(np.float64)
            self._norms = np.sqrt(np.einsum("ij,ij->i", self._matrix, self._matrix))
        q = np.asarray(query, dtype=np.float64)
        q_norm = math.sqrt(float(np.dot(q, q)))
        if q_norm == 0.0:
            raise ZeroVectorError("cannot rank against a zero query vector")
        with np.errstate(divide="ignore", invalid="ignore"):
            scores = (self._matrix @ q) / (self._norms * q_norm)
        np.clip(scores, -1.0, 1.0, out=scores)
        scores[self._norms == 0.0] = -np.inf  # zero-vector entries are unretrievable
        return scores

    def top_k(self, query: np.ndarray, k: int) -> list[RetrievalResult]:
        """The min(k, N) highest-cosine entries, ties broken by insertion order."""
        if k < 1:
            raise InvalidParamsError(f"k must be >= 1, got {k}")
        q = np.asarray(query, dtype=np.float64)
        if q.ndim != 1 or q.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"query has shape {q.shape}, store dim is {self.dim}")
        if not self._entries:
            return []
        scores = self._score_all(q)
        order = np.argsort(-scores, kind="stable")
        results = []
        for pos in order[:k]:
            if scores[pos] == -np.inf:
                break
            entry = self._entries[pos]
            results.append(RetrievalResult(
                chunk_id=entry.chunk_id,
                score=float(scores[pos]),
                rank=len(results) + 1,
                metadata=entry.metadata,
                text=entry.text,
            ))
        return results

    def save(self, path: str | Path) -> None:
        """Write the store; the byte stream is identical for identical contents."""
        parts = [_HEADER.pack(MAGIC, FORMAT_VERSION, self.dim, len(self._entries))]
        for entry in self._entries:
            for blob in (
                entry.chunk_id.encode("utf-8"),
                json.dumps(entry.metadata.to_dict(), sort_keys=True,
                           separators=(",", ":"), ensure_ascii=False).encode("utf-8"),
                entry.text.encode("utf-8"),
            ):
                parts.append(_U32.pack(len(blob)))
                parts.append(blob)
            parts.append(entry.vector.astype("<f4").tobytes())
        payload = b"".join(parts)
        Path(path).write_bytes(payload + _U32.pack(crc32c(payload)))

    @classmethod
    def load(cls, path: str | Path) -> "VectorStore":
        data = Path(path).read_bytes()
        if len(data) < _HEADER.size + _U32.size:
            raise CorruptStoreError("file too short to be a store")
        if data[:4] != MAGIC:
            raise CorruptStoreError(f"bad magic: {data[:4]!r}")
        payload, trailer = data[:-4], data[-4:]
        if crc32c(payload) != _U32.unpack(trailer)[0]:
            raise ChecksumMismatchError("payload checksum does not match trailer")
        _, version, dim, count = _HEADER.unpack_from(payload, 0)
        if version != FORMAT_VERSION:
            raise CorruptStoreError(f"unsupported store version: {version}")
        store = cls(dim)
        offset = _HEADER.size

        def take(size: int) -> bytes:
            nonlocal offset
            if offset + size > len(payload):
                raise CorruptStoreError("store file is truncated")
            out = payload[offset:offset + size]
            offset += size
            return out

        for _ in range(count):
            try:
                chunk_id = take(_U32.unpack(take(4))[0]).decode("utf-8")
                metadata = ChunkMetadata.from_dict(json.loads(take(_U32.unpack(take(4))[0])))
                text = take(_U32.unpack(take(4))[0]).decode("utf-8")
            except (UnicodeDecodeError, ValueError, KeyError, TypeError) as exc:
                raise CorruptStoreError(f"unreadable store entry: {exc}") from exc
            vector = np.frombuffer(take(4 * dim), dtype="<f4").copy()
            if chunk_id in store._by_id:
                raise CorruptStoreError(f"duplicate chunk id in store: {chunk_id!r}")
            store._by_id[chunk_id] = len(store._entries)
            store._entries.append(StoreEntry(chunk_id, vector, metadata, text))
        if offset != len(payload):
            raise CorruptStoreError("trailing bytes after last entry")
        store.insertion_counter = count
        return store

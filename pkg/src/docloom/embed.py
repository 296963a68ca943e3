"""Text embedding backends.

Two interchangeable backends produce fixed-dimension vectors:

* ``hashed``: a deterministic bag-of-words embedder. Every token is
  hashed (FNV-1a 64) to a signed one-hot vector; the sentence vector is
  the component-wise mean, L2-normalized. Bit-exact across platforms.
* ``remote``: an HTTP embedding service speaking the JSON protocol
  below, batched at most 64 texts per request.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from enum import Enum

import numpy as np
import requests

from .errors import (
    AllZeroError,
    DimensionMismatchError,
    InvalidParamsError,
    ProviderError,
    ProviderUnreachableError,
)

DEFAULT_MODEL_ID = "sentence-transformers/all-MiniLM-L6-v2"
DEFAULT_DIM = 384
MIN_DIM = 8
MAX_BATCH_SIZE = 64
EMBED_API_KEY_ENV = "DOCLOOM_EMBED_API_KEY"
REQUEST_TIMEOUT_S = 60.0

_TOKEN_RE = re.compile(r"[a-z0-9]+")

_FNV64_OFFSET = 0xCBF29CE484222325
_FNV64_PRIME = 0x100000001B3
_U64_MASK = (1 << 64) - 1


class EmbedderKind(str, Enum):
    REMOTE = "remote"
    HASHED = "hashed"


@dataclass(frozen=True)
class EmbedderConfig:
    kind: EmbedderKind = EmbedderKind.HASHED
    dim: int = DEFAULT_DIM
    model_id: str = DEFAULT_MODEL_ID
    endpoint_url: str = ""

    def __post_init__(self):
        if self.dim < MIN_DIM:
            raise InvalidParamsError(f"dim must be >= {MIN_DIM}, got {self.dim}")
        if self.kind is EmbedderKind.REMOTE and not self.endpoint_url:
            raise InvalidParamsError("remote embedder requires an endpoint_url")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash; trivially portable and bit-exact."""
    h = _FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV64_PRIME) & _U64_MASK
    return h


def hashed_embed(tokens: list[str], dim: int) -> np.ndarray:
    """Embed a token bag as a mean-pooled signed one-hot vector, L2-normalized.

    Each token contributes +1 or -1 (sign taken from the hash bits) at
    component hash % dim. Raises AllZeroError when there are no tokens or
    the signed contributions cancel exactly.
    """
    if dim < MIN_DIM:
        raise InvalidParamsError(f"dim must be >= {MIN_DIM}, got {dim}")
    if not tokens:
        raise AllZeroError("cannot embed an empty token sequence")
    acc = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        h = fnv1a64(token.encode("utf-8"))
        acc[h % dim] += 1.0 if (h // dim) & 1 == 0 else -1.0
    acc /= len(tokens)
    norm = math.sqrt(float(np.dot(acc, acc)))
    if norm == 0.0:
        raise AllZeroError("token contributions cancelled to the zero vector")
    return acc / norm


def _auth_headers(env_var: str) -> dict[str, str]:
    key = os.environ.get(env_var)
    return {"Authorization": f"Bearer {key}"} if key else {}


def remote_embed(texts: list[str], config: EmbedderConfig) -> list[np.ndarray]:
    """Fetch embeddings from the remote service, batched at MAX_BATCH_SIZE.

    Wire protocol: POST {"model", "input": [...]} ->
    {"data": [{"index", "embedding"}, ...]} sorted by index.
    """
    if config.kind is not EmbedderKind.REMOTE:
        raise InvalidParamsError("remote_embed requires a remote embedder config")
    if not texts:
        raise InvalidParamsError("remote_embed requires at least one text")
    headers = _auth_headers(EMBED_API_KEY_ENV)
    vectors: list[np.ndarray] = []
    for i in range(0, len(texts), MAX_BATCH_SIZE):
        batch = texts[i:i + MAX_BATCH_SIZE]
        try:
            resp = requests.post(
                config.endpoint_url,
                json={"model": config.model_id, "input": batch},
                headers=headers,
                timeout=REQUEST_TIMEOUT_S,
            )
        except requests.RequestException as exc:
            raise ProviderUnreachableError(
                f"embedding provider unreachable: {exc}") from exc
        if not resp.ok:
            raise ProviderError(
                f"embedding provider returned {resp.status_code}: {resp.text}",
                status=resp.status_code, body=resp.text)
        try:
            rows = sorted(resp.json()["data"], key=lambda r: r["index"])
            batch_vectors = [np.asarray(r["embedding"], dtype=np.float64) for r in rows]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(f"malformed embedding response: {exc}",
                                status=resp.status_code, body=resp.text) from exc
        if len(batch_vectors) != len(batch):
            raise ProviderError(
                f"expected {len(batch)} embeddings, got {len(batch_vectors)}",
                status=resp.status_code, body=resp.text)
        for vec in batch_vectors:
            if vec.ndim != 1 or vec.shape[0] != config.dim:
                raise DimensionMismatchError(
                    f"provider returned a vector of length {vec.shape}, "
                    f"expected {config.dim}")
        vectors.extend(batch_vectors)
    return vectors


def embed_texts(texts: list[str], config: EmbedderConfig) -> list[np.ndarray]:
    """Embed texts with the configured backend, order preserved."""
    if config.kind is EmbedderKind.REMOTE:
        return remote_embed(texts, config)
    vectors = []
    for i, text in enumerate(texts):
        try:
            vectors.append(hashed_embed(tokenize(text), config.dim))
        except AllZeroError as exc:
            raise AllZeroError(f"text at index {i} has no embeddable signal: {exc}",
                               index=i) from exc
    return vectors

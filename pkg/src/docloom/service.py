"""HTTP facade over the pipeline: uploads, chat sessions, chunk inspection.

Sessions are in-memory and lost on restart; stores are persisted under the
configured store directory and reloaded on demand, so retrieval survives
restarts bit-exactly. Messages within one session are processed strictly
in arrival order (per-session lock); distinct sessions run concurrently
against read-shared stores.
"""

from __future__ import annotations

import logging
import sys
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .chain import ChatSession, LlmConfig, LlmKind
from .embed import EmbedderConfig, EmbedderKind, embed_texts
from .errors import (
    AllZeroError,
    ConfigError,
    DocloomError,
    EmptyCompletionError,
    EmptyDocumentError,
    InvalidParamsError,
    MalformedDocumentError,
    NoContextError,
    ProviderError,
    ProviderUnreachableError,
)
from .index import DEFAULT_TOP_K, VectorStore
from .ingest import ChunkingParams, extract_text, format_for_filename, ingest_document

logger = logging.getLogger(__name__)

DEFAULT_MAX_UPLOAD_BYTES = 50 * 1024 * 1024
STORE_SUFFIX = ".dlvs"


@dataclass(frozen=True)
class AppConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    store_dir: Path = Path("stores")
    chunking: ChunkingParams = ChunkingParams()
    embedder: EmbedderConfig = EmbedderConfig()
    llm: LlmConfig = LlmConfig()
    k: int = DEFAULT_TOP_K
    cors_origins: tuple[str, ...] = ("*",)
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD_BYTES

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise ConfigError(f"port must be in [1, 65535], got {self.port}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")


def load_config(path: str | Path) -> AppConfig:
    """Parse a TOML config file into an AppConfig; raises ConfigError."""
    try:
        raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse config file: {exc}") from exc
    known = {"host", "port", "store_dir", "k", "cors_origins", "max_upload_bytes",
             "chunking", "embedder", "llm"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        kwargs: dict = {}
        for key in ("host", "port", "k", "max_upload_bytes"):
            if key in raw:
                kwargs[key] = raw[key]
        if "store_dir" in raw:
            kwargs["store_dir"] = Path(raw["store_dir"])
        if "cors_origins" in raw:
            kwargs["cors_origins"] = tuple(raw["cors_origins"])
        if "chunking" in raw:
            kwargs["chunking"] = ChunkingParams(**raw["chunking"])
        if "embedder" in raw:
            embedder = dict(raw["embedder"])
            if "kind" in embedder:
                embedder["kind"] = EmbedderKind(embedder["kind"])
            kwargs["embedder"] = EmbedderConfig(**embedder)
        if "llm" in raw:
            llm = dict(raw["llm"])
            if "kind" in llm:
                llm["kind"] = LlmKind(llm["kind"])
            kwargs["llm"] = LlmConfig(**llm)
        return AppConfig(**kwargs)
    except (TypeError, ValueError, DocloomError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


class ApiError(Exception):
    """Error carrying the HTTP status and machine-readable code."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code


_ERROR_MAP: list[tuple[type[Exception], int, str]] = [
    (EmptyDocumentError, 400, "empty_document"),
    (MalformedDocumentError, 400, "malformed_document"),
    (AllZeroError, 422, "no_signal"),
    (NoContextError, 422, "no_context"),
    (EmptyCompletionError, 502, "empty_completion"),
    (ProviderUnreachableError, 502, "provider_unreachable"),
    (ProviderError, 502, "provider_error"),
    (InvalidParamsError, 400, "invalid_params"),
    (DocloomError, 500, "internal_error"),
]


def _to_api_error(exc: Exception) -> ApiError:
    for exc_type, status, code in _ERROR_MAP:
        if isinstance(exc, exc_type):
            return ApiError(status, code, str(exc))
    return ApiError(500, "internal_error", str(exc))


@dataclass
class Session:
    session_id: str
    doc_id: str
    chat: ChatSession
    created_at: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class Engine:
    """Owns document stores and chat sessions for one service process."""

    def __init__(self, config: AppConfig):
        self.config = config
        self.stores: dict[str, VectorStore] = {}
        self.chunk_owner: dict[str, str] = {}  # chunk_id -> doc_id
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        config.store_dir.mkdir(parents=True, exist_ok=True)

    def _register(self, doc_id: str, store: VectorStore) -> None:
        self.stores[doc_id] = store
        for entry in store.entries:
            self.chunk_owner[entry.chunk_id] = doc_id

    def upload_document(self, data: bytes, filename: str) -> dict:
        if len(data) > self.config.max_upload_bytes:
            raise ApiError(413, "file_too_large",
                           f"upload exceeds {self.config.max_upload_bytes} bytes")
        try:
            fmt = format_for_filename(filename)
        except InvalidParamsError as exc:
            raise ApiError(400, "unsupported_format", str(exc)) from exc
        doc_id = uuid.uuid4().hex  # re-uploads get a fresh id; no dedup
        doc = extract_text(data, fmt, doc_id=doc_id, source_name=filename)
        chunks = ingest_document(doc, self.config.chunking)
        store = VectorStore(self.config.embedder.dim)
        for chunk in chunks:
            try:
                vector = embed_texts([chunk.text], self.config.embedder)[0]
            except AllZeroError:
                continue  # unretrievable chunk; document stays usable
            store.add(chunk, vector)
        store.save(self.config.store_dir / f"{doc_id}{STORE_SUFFIX}")
        with self._lock:
            self._register(doc_id, store)
        logger.info("ingested %s as %s (%d chunks)", filename, doc_id, len(chunks))
        return {"doc_id": doc_id, "chunk_count": len(chunks)}

    def _store_for(self, doc_id: str) -> VectorStore:
        with self._lock:
            store = self.stores.get(doc_id)
        if store is not None:
            return store
        path = self.config.store_dir / f"{doc_id}{STORE_SUFFIX}"
        if not path.exists():
            raise ApiError(404, "document_not_found", f"no document {doc_id!r}")
        store = VectorStore.load(path)
        with self._lock:
            self._register(doc_id, store)
        return store

    def create_session(self, doc_id: str) -> dict:
        store = self._store_for(doc_id)
        session_id = uuid.uuid4().hex
        chat = ChatSession(store, self.config.embedder, self.config.llm,
                           k=self.config.k)
        with self._lock:
            self.sessions[session_id] = Session(
                session_id=session_id, doc_id=doc_id, chat=chat,
                created_at=time.time())
        return {"session_id": session_id, "doc_id": doc_id}

    def _session(self, session_id: str) -> Session:
        with self._lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise ApiError(404, "session_not_found", f"no session {session_id!r}")
        return session

    def post_message(self, session_id: str, question: str) -> dict:
        session = self._session(session_id)
        with session.lock:  # serialize messages per session
            answer = session.chat.ask(question)
        return {
            "text": answer.text,
            "sources": [
                {"source_id": s.source_id, "chunk_id": s.chunk_id,
                 "source_key": s.source_key, "excerpt": s.excerpt}
                for s in answer.sources
            ],
            "retrieval": [
                {"chunk_id": r.chunk_id, "score": r.score, "rank": r.rank,
                 "source_key": r.metadata.source_key, "text": r.text}
                for r in answer.retrieval
            ],
        }

    def get_history(self, session_id: str) -> dict:
        session = self._session(session_id)
        return {"turns": [{"role": role, "content": content}
                          for role, content in session.chat.memory.turns]}

    def get_chunk(self, chunk_id: str) -> dict:
        with self._lock:
            doc_id = self.chunk_owner.get(chunk_id)
        if doc_id is None and "-c" in chunk_id:
            # chunk ids embed the document id, so a chunk from a store not
            # loaded yet (e.g. after a restart) can still be resolved
            try:
                self._store_for(chunk_id.rsplit("-c", 1)[0])
            except ApiError:
                pass
            with self._lock:
                doc_id = self.chunk_owner.get(chunk_id)
        if doc_id is None:
            raise ApiError(404, "chunk_not_found", f"no chunk {chunk_id!r}")
        entry = self.stores[doc_id].get(chunk_id)
        if entry is None:
            raise ApiError(404, "chunk_not_found", f"no chunk {chunk_id!r}")
        return {
            "chunk_id": entry.chunk_id,
            "doc_id": doc_id,
            "text": entry.text,
            "source_key": entry.metadata.source_key,
            "page": entry.metadata.page,
            "paragraph": entry.metadata.paragraph,
        }


class CreateSessionRequest(BaseModel):
    doc_id: str


class PostMessageRequest(BaseModel):
    question: str


def create_app(config: AppConfig | None = None) -> FastAPI:
    config = config or AppConfig()
    engine = Engine(config)
    app = FastAPI(title="docloom", version="0.1.0")
    app.state.engine = engine
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(config.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": str(exc)})

    @app.exception_handler(DocloomError)
    async def docloom_error_handler(_request: Request, exc: DocloomError):
        api_exc = _to_api_error(exc)
        return JSONResponse(status_code=api_exc.status,
                            content={"code": api_exc.code, "message": str(api_exc)})

    @app.post("/api/documents")
    async def upload_document(file: UploadFile):
        data = await file.read()
        return engine.upload_document(data, file.filename or "")

    @app.post("/api/sessions")
    async def create_session(body: CreateSessionRequest):
        return engine.create_session(body.doc_id)

    @app.post("/api/sessions/{session_id}/messages")
    async def post_message(session_id: str, body: PostMessageRequest):
        return engine.post_message(session_id, body.question)

    @app.get("/api/sessions/{session_id}/history")
    async def get_history(session_id: str):
        return engine.get_history(session_id)

    @app.get("/api/chunks/{chunk_id}")
    async def get_chunk(chunk_id: str):
        return engine.get_chunk(chunk_id)

    @app.get("/api/health")
    async def health():
        return {"status": "ok"}

    return app

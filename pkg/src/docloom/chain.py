"""Conversational retrieval chain.

A ChatSession embeds the question, retrieves the top-k chunks from its
vector store, stuffs them into a single deterministic prompt together
with the conversation history, and answers through either a remote
chat-completion service or the built-in extractive responder. Sources
are returned alongside every answer, labeled S1..Sk in retrieval order.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

import requests

from .embed import EmbedderConfig, embed_texts, tokenize, _auth_headers
from .errors import (
    EmptyCompletionError,
    InvalidParamsError,
    NoContextError,
    ProviderError,
    ProviderUnreachableError,
)
from .index import DEFAULT_TOP_K, RetrievalResult, VectorStore

LLM_API_KEY_ENV = "DOCLOOM_LLM_API_KEY"
DEFAULT_MAX_TURNS = 20
DEFAULT_STUB_SENTENCES = 3
REQUEST_TIMEOUT_S = 120.0

SYSTEM_PREAMBLE = (
    "You are a document assistant. Answer the question using only the "
    "numbered source excerpts below. If the excerpts do not contain the "
    "answer, say so."
)

# sentence boundary: terminator followed by whitespace or end of text
_SENTENCE_END_RE = re.compile(r"[.!?](?=\s|$)")


class LlmKind(str, Enum):
    REMOTE = "remote"
    EXTRACTIVE_STUB = "extractive_stub"


@dataclass(frozen=True)
class LlmConfig:
    kind: LlmKind = LlmKind.EXTRACTIVE_STUB
    model_id: str = ""
    endpoint_url: str = ""
    temperature: float = 0.0
    stub_sentence_count: int = DEFAULT_STUB_SENTENCES

    def __post_init__(self):
        if self.temperature < 0:
            raise InvalidParamsError(f"temperature must be >= 0, got {self.temperature}")
        if self.stub_sentence_count < 1:
            raise InvalidParamsError(
                f"stub_sentence_count must be >= 1, got {self.stub_sentence_count}")
        if self.kind is LlmKind.REMOTE and not self.endpoint_url:
            raise InvalidParamsError("remote LLM requires an endpoint_url")


class ConversationMemory:
    """Alternating user/assistant turn history, oldest pair evicted first."""

    def __init__(self, max_turns: int = DEFAULT_MAX_TURNS):
        if max_turns < 2 or max_turns % 2:
            raise InvalidParamsError(
                f"max_turns must be a positive even number, got {max_turns}")
        self.max_turns = max_turns
        self.turns: list[tuple[str, str]] = []  # (role, content)

    def __len__(self) -> int:
        return len(self.turns)

    def append_exchange(self, question: str, answer: str) -> None:
        self.turns.append(("user", question))
        self.turns.append(("assistant", answer))
        while len(self.turns) > self.max_turns:
            del self.turns[:2]


@dataclass(frozen=True)
class SourceRef:
    source_id: str  # "S1", "S2", ... dense, in retrieval rank order
    chunk_id: str
    source_key: str
    excerpt: str


@dataclass(frozen=True)
class ChatAnswer:
    text: str
    sources: list[SourceRef]
    retrieval: list[RetrievalResult]


def build_prompt(history: ConversationMemory, retrieved: list[RetrievalResult],
                 question: str) -> str:
    """Assemble the single stuffed prompt; fully deterministic."""
    blocks = [SYSTEM_PREAMBLE]
    for result in retrieved:
        blocks.append(f"[S{result.rank}] ({result.metadata.source_key})\n{result.text}")
    if history.turns:
        blocks.append("\n".join(
            f"{'User' if role == 'user' else 'Assistant'}: {content}"
            for role, content in history.turns))
    blocks.append(f"User: {question}")
    return "\n\n".join(blocks)


def split_sentences(text: str) -> list[str]:
    """Split on '.', '!' or '?' followed by whitespace or end of text."""
    sentences = []
    start = 0
    for m in _SENTENCE_END_RE.finditer(text):
        piece = text[start:m.end()].strip()
        if piece:
            sentences.append(piece)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def extractive_respond(question: str, retrieved: list[RetrievalResult],
                       n_sentences: int) -> str:
    """Return the retrieved sentences that best overlap the question.

    Each sentence scores |distinct shared tokens| / sqrt(sentence token
    count); the top n are returned in reading order, joined by spaces.
    Ties go to the earlier retrieval rank, then the earlier position.
    """
    if n_sentences < 1:
        raise InvalidParamsError(f"n_sentences must be >= 1, got {n_sentences}")
    question_tokens = set(tokenize(question))
    candidates = []  # (score, rank, position, sentence)
    for result in retrieved:
        for position, sentence in enumerate(split_sentences(result.text)):
            sent_tokens = tokenize(sentence)
            if not sent_tokens:
                continue
            score = len(question_tokens & set(sent_tokens)) / math.sqrt(len(sent_tokens))
            candidates.append((score, result.rank, position, sentence))
    if not candidates:
        raise NoContextError("no retrieved sentences to answer from")
    selected = sorted(candidates, key=lambda c: (-c[0], c[1], c[2]))[:n_sentences]
    selected.sort(key=lambda c: (c[1], c[2]))
    return " ".join(sentence for _, _, _, sentence in selected)


def remote_complete(messages: list[tuple[str, str]], config: LlmConfig) -> str:
    """Fetch one assistant message from a chat-completion JSON service.

    Wire protocol: POST {"model", "temperature", "messages"} ->
    {"choices": [{"message": {"role", "content"}}]}.
    """
    if config.kind is not LlmKind.REMOTE:
        raise InvalidParamsError("remote_complete requires a remote LLM config")
    payload = {
        "model": config.model_id,
        "temperature": config.temperature,
        "messages": [{"role": role, "content": content} for role, content in messages],
    }
    try:
        resp = requests.post(config.endpoint_url, json=payload,
                             headers=_auth_headers(LLM_API_KEY_ENV),
                             timeout=REQUEST_TIMEOUT_S)
    except requests.RequestException as exc:
        raise ProviderUnreachableError(f"chat provider unreachable: {exc}") from exc
    if not resp.ok:
        raise ProviderError(f"chat provider returned {resp.status_code}: {resp.text}",
                            status=resp.status_code, body=resp.text)
    try:
        choices = resp.json().get("choices", [])
    except ValueError as exc:
        raise ProviderError(f"malformed chat response: {exc}",
                            status=resp.status_code, body=resp.text) from exc
    if not choices:
        raise EmptyCompletionError("chat provider returned no choices")
    content = choices[0].get("message", {}).get("content")
    if not content:
        raise EmptyCompletionError("chat provider returned an empty message")
    return content


class ChatSession:
    """One conversation bound to a read-only store; not thread-safe itself."""

    def __init__(self, store: VectorStore, embedder: EmbedderConfig,
                 llm: LlmConfig, k: int = DEFAULT_TOP_K,
                 memory: ConversationMemory | None = None):
        if k < 1:
            raise InvalidParamsError(f"k must be >= 1, got {k}")
        self.store = store
        self.embedder = embedder
        self.llm = llm
        self.k = k
        self.memory = memory if memory is not None else ConversationMemory()

    def ask(self, question: str) -> ChatAnswer:
        """Retrieve, prompt, answer, and record the exchange.

        Memory is appended only after the backend succeeds, so a failed
        ask leaves the session state untouched.
        """
        query_vector = embed_texts([question], self.embedder)[0]
        retrieved = self.store.top_k(query_vector, self.k)
        prompt = build_prompt(self.memory, retrieved, question)
        if self.llm.kind is LlmKind.REMOTE:
            answer = remote_complete([("user", prompt)], self.llm)
        else:
            answer = extractive_respond(question, retrieved,
                                        self.llm.stub_sentence_count)
        self.memory.append_exchange(question, answer)
        sources = [
            SourceRef(source_id=f"S{r.rank}", chunk_id=r.chunk_id,
                      source_key=r.metadata.source_key, excerpt=r.text)
            for r in retrieved
        ]
        return ChatAnswer(text=answer, sources=sources, retrieval=retrieved)

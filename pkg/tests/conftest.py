"""Shared fixtures: a scriptable in-process HTTP provider and planted corpora."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest


class RecordedRequest:
    def __init__(self, path: str, headers: dict, body: dict):
        self.path = path
        self.headers = headers
        self.body = body


class MockProvider:
    """Single-endpoint JSON-over-HTTP server for provider protocol tests.

    Tests assign `respond`, a callable taking the parsed request body and
    returning (status, payload). Every request is recorded.
    """

    def __init__(self):
        self.requests: list[RecordedRequest] = []
        self.respond = lambda body: (200, {})
        provider = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length) if length else b"{}"
                body = json.loads(raw or b"{}")
                provider.requests.append(
                    RecordedRequest(self.path, dict(self.headers), body))
                status, payload = provider.respond(body)
                data = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.server = HTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_port}"
        self._thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self._thread.start()

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def provider():
    p = MockProvider()
    yield p
    p.close()


def echo_embeddings(dim: int):
    """Responder returning a distinct unit-ish vector per input index."""

    def respond(body):
        data = []
        for i, _text in enumerate(body["input"]):
            vec = [0.0] * dim
            vec[i % dim] = 1.0
            data.append({"index": i, "embedding": vec})
        return 200, {"data": data}

    return respond


# Invented token pairs chosen so that, at dim=384, every token's hash bucket
# is unique across the whole planted vocabulary (no collisions, no sign
# cancellation). That makes "rank 1 for the planted chunk" a provable
# property of the hashed embedder rather than a lucky draw.
RARE_TOKENS = (
    ("zorvex", "quemblat"), ("yfriinol", "voskkarn"), ("drellium", "xanthoq"),
    ("plumviar", "grettholin"), ("sornzorim", "ambzorim"), ("tulzorim", "nivrack"),
    ("oquestral", "fenrizol"), ("cabrinth", "welkitine"), ("harvoxen", "miraquel"),
    ("ostrevane", "bulmint"), ("kramint", "dovrixen"), ("sarquette", "tibovane"),
    ("moxquary", "perltrelle"), ("gastrelle", "wyvbractor"), ("lumbractor", "thornquill"),
    ("evramide", "coppletine"), ("jindabrel", "ruskavite"), ("olvemoor", "drazlotar"),
    ("quillotar", "benzcamber"), ("fulccamber", "trennadol"),
)


def planted_corpus():
    """20 synthetic documents, each with a fact sentence holding a
    corpus-unique pair of rare tokens.

    Returns a list of (doc_id, document_text, question, fact_sentence).
    """
    records = []
    for i, (a, b) in enumerate(RARE_TOKENS):
        fact = f"The {a} {b} calibration index equals {40 + i}."
        filler = f"Routine archive ledger entry {i}. "
        question = f"What is the {a} {b} calibration index?"
        records.append((f"doc{i:02d}", filler + fact, question, fact))
    return records

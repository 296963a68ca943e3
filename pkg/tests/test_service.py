"""HTTP service contract tests (in-process, via TestClient)."""

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from docloom.chain import LlmConfig
from docloom.errors import ConfigError
from docloom.ingest import ChunkingParams
from docloom.service import AppConfig, create_app, load_config
from test_pdf import raw_pdf

PLANTED = ("Catalog shelving follows the north wing plan. "
           "The zorvian constant equals 42. "
           "Visiting hours end at six in the evening.")


def make_client(tmp_path: Path, **overrides) -> TestClient:
    config = AppConfig(store_dir=tmp_path / "stores", **overrides)
    return TestClient(create_app(config))


@pytest.fixture()
def client(tmp_path):
    return make_client(tmp_path)


def upload(client: TestClient, text: str, name: str = "doc.txt") -> dict:
    resp = client.post("/api/documents",
                       files={"file": (name, text.encode("utf-8"), "text/plain")})
    assert resp.status_code == 200, resp.text
    return resp.json()


class TestHealth:
    def test_ok(self, client):
        resp = client.get("/api/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok"}


class TestUpload:
    def test_text_document(self, client, tmp_path):
        body = upload(client, PLANTED)
        assert set(body) == {"doc_id", "chunk_count"}
        assert len(body["doc_id"]) == 32
        assert body["chunk_count"] == 1
        stores = list((tmp_path / "stores").glob("*.dlvs"))
        assert [p.stem for p in stores] == [body["doc_id"]]

    def test_chunk_count_follows_window_law(self, client):
        # 2048 chars at the default 1000/100 window -> 3 chunks
        body = upload(client, "x" * 2048)
        assert body["chunk_count"] == 3

    def test_pdf_document(self, client):
        pdf = raw_pdf([b"BT /F1 12 Tf 72 720 Td (Vaults hold the ledgers.) Tj ET"])
        resp = client.post("/api/documents",
                           files={"file": ("scan.pdf", pdf, "application/pdf")})
        assert resp.status_code == 200
        assert resp.json()["chunk_count"] == 1

    def test_empty_document_rejected(self, client):
        resp = client.post("/api/documents",
                           files={"file": ("empty.txt", b"", "text/plain")})
        assert resp.status_code == 400
        assert resp.json()["code"] == "empty_document"

    def test_unsupported_format_rejected(self, client):
        resp = client.post("/api/documents",
                           files={"file": ("sheet.xlsx", b"PK", "application/zip")})
        assert resp.status_code == 400
        assert resp.json()["code"] == "unsupported_format"

    def test_malformed_pdf_rejected(self, client):
        resp = client.post("/api/documents",
                           files={"file": ("bad.pdf", b"not a pdf", "application/pdf")})
        assert resp.status_code == 400
        assert resp.json()["code"] == "malformed_document"

    def test_oversize_upload_rejected(self, tmp_path):
        client = make_client(tmp_path, max_upload_bytes=64)
        resp = client.post("/api/documents",
                           files={"file": ("big.txt", b"y" * 65, "text/plain")})
        assert resp.status_code == 413
        assert resp.json()["code"] == "file_too_large"

    def test_reupload_gets_fresh_id(self, client):
        first = upload(client, PLANTED)
        second = upload(client, PLANTED)
        assert first["doc_id"] != second["doc_id"]

    def test_error_body_shape(self, client):
        resp = client.post("/api/documents",
                           files={"file": ("empty.txt", b"", "text/plain")})
        assert set(resp.json()) == {"code", "message"}


class TestSessions:
    def test_create_session(self, client):
        doc_id = upload(client, PLANTED)["doc_id"]
        resp = client.post("/api/sessions", json={"doc_id": doc_id})
        assert resp.status_code == 200
        body = resp.json()
        assert body["doc_id"] == doc_id
        assert len(body["session_id"]) == 32

    def test_unknown_document(self, client):
        resp = client.post("/api/sessions", json={"doc_id": "feedfeed"})
        assert resp.status_code == 404
        assert resp.json()["code"] == "document_not_found"

    def test_message_answers_from_document(self, client):
        doc_id = upload(client, PLANTED)["doc_id"]
        sid = client.post("/api/sessions", json={"doc_id": doc_id}).json()["session_id"]
        resp = client.post(f"/api/sessions/{sid}/messages",
                           json={"question": "What is the zorvian constant?"})
        assert resp.status_code == 200
        body = resp.json()
        assert "The zorvian constant equals 42." in body["text"]
        assert body["sources"], "expected at least one source"
        assert body["sources"][0]["source_id"] == "S1"
        assert body["retrieval"][0]["rank"] == 1

    def test_source_excerpt_matches_chunk_text_exactly(self, client):
        doc_id = upload(client, PLANTED)["doc_id"]
        sid = client.post("/api/sessions", json={"doc_id": doc_id}).json()["session_id"]
        body = client.post(f"/api/sessions/{sid}/messages",
                           json={"question": "What is the zorvian constant?"}).json()
        for source in body["sources"]:
            chunk = client.get(f"/api/chunks/{source['chunk_id']}")
            assert chunk.status_code == 200
            assert source["excerpt"] == chunk.json()["text"]

    def test_sources_align_with_retrieval(self, client):
        doc_id = upload(client, "First point here. Second point there. " * 40)["doc_id"]
        sid = client.post("/api/sessions", json={"doc_id": doc_id}).json()["session_id"]
        body = client.post(f"/api/sessions/{sid}/messages",
                           json={"question": "Where is the second point?"}).json()
        assert len(body["sources"]) == len(body["retrieval"])
        for i, (source, hit) in enumerate(zip(body["sources"], body["retrieval"]), 1):
            assert source["source_id"] == f"S{i}"
            assert source["chunk_id"] == hit["chunk_id"]
            assert source["source_key"] == hit["source_key"]
            assert source["excerpt"] == hit["text"]
            assert hit["rank"] == i

    def test_history_records_turns_in_order(self, client):
        doc_id = upload(client, PLANTED)["doc_id"]
        sid = client.post("/api/sessions", json={"doc_id": doc_id}).json()["session_id"]
        q1 = "What is the zorvian constant?"
        q2 = "When do visiting hours end?"
        a1 = client.post(f"/api/sessions/{sid}/messages", json={"question": q1}).json()
        a2 = client.post(f"/api/sessions/{sid}/messages", json={"question": q2}).json()
        turns = client.get(f"/api/sessions/{sid}/history").json()["turns"]
        assert [t["role"] for t in turns] == ["user", "assistant", "user", "assistant"]
        assert [t["content"] for t in turns] == [q1, a1["text"], q2, a2["text"]]

    def test_history_empty_for_new_session(self, client):
        doc_id = upload(client, PLANTED)["doc_id"]
        sid = client.post("/api/sessions", json={"doc_id": doc_id}).json()["session_id"]
        assert client.get(f"/api/sessions/{sid}/history").json() == {"turns": []}

    def test_unknown_session(self, client):
        for resp in (
            client.post("/api/sessions/beef/messages", json={"question": "hi?"}),
            client.get("/api/sessions/beef/history"),
        ):
            assert resp.status_code == 404
            assert resp.json()["code"] == "session_not_found"

    @pytest.mark.parametrize("question", ["   ", "?!"])
    def test_question_without_signal_rejected(self, client, question):
        doc_id = upload(client, PLANTED)["doc_id"]
        sid = client.post("/api/sessions", json={"doc_id": doc_id}).json()["session_id"]
        resp = client.post(f"/api/sessions/{sid}/messages", json={"question": question})
        assert resp.status_code == 422
        assert resp.json()["code"] == "no_signal"

    def test_document_without_signal_yields_no_context(self, client):
        doc_id = upload(client, "!!! ??? ...")["doc_id"]
        sid = client.post("/api/sessions", json={"doc_id": doc_id}).json()["session_id"]
        resp = client.post(f"/api/sessions/{sid}/messages",
                           json={"question": "anything in here?"})
        assert resp.status_code == 422
        assert resp.json()["code"] == "no_context"

    def test_failed_ask_leaves_history_clean(self, client):
        doc_id = upload(client, PLANTED)["doc_id"]
        sid = client.post("/api/sessions", json={"doc_id": doc_id}).json()["session_id"]
        client.post(f"/api/sessions/{sid}/messages", json={"question": "?!"})
        assert client.get(f"/api/sessions/{sid}/history").json() == {"turns": []}


class TestChunks:
    def test_chunk_fields(self, client):
        doc_id = upload(client, PLANTED)["doc_id"]
        sid = client.post("/api/sessions", json={"doc_id": doc_id}).json()["session_id"]
        body = client.post(f"/api/sessions/{sid}/messages",
                           json={"question": "What is the zorvian constant?"}).json()
        chunk = client.get(f"/api/chunks/{body['sources'][0]['chunk_id']}").json()
        assert set(chunk) == {"chunk_id", "doc_id", "text", "source_key",
                              "page", "paragraph"}
        assert chunk["doc_id"] == doc_id
        assert chunk["source_key"] == "p1-pl1"
        assert (chunk["page"], chunk["paragraph"]) == (1, 1)

    def test_unknown_chunk(self, client):
        resp = client.get("/api/chunks/none-c00001")
        assert resp.status_code == 404
        assert resp.json()["code"] == "chunk_not_found"


class TestPersistence:
    def test_documents_survive_restart(self, tmp_path):
        first = make_client(tmp_path)
        doc_id = upload(first, PLANTED)["doc_id"]
        sid = first.post("/api/sessions", json={"doc_id": doc_id}).json()["session_id"]
        before = first.post(f"/api/sessions/{sid}/messages",
                            json={"question": "What is the zorvian constant?"}).json()

        second = make_client(tmp_path)  # same store_dir, fresh process state
        sid2 = second.post("/api/sessions", json={"doc_id": doc_id}).json()["session_id"]
        after = second.post(f"/api/sessions/{sid2}/messages",
                            json={"question": "What is the zorvian constant?"}).json()
        assert after == before

    def test_sessions_do_not_survive_restart(self, tmp_path):
        first = make_client(tmp_path)
        doc_id = upload(first, PLANTED)["doc_id"]
        sid = first.post("/api/sessions", json={"doc_id": doc_id}).json()["session_id"]
        second = make_client(tmp_path)
        resp = second.get(f"/api/sessions/{sid}/history")
        assert resp.status_code == 404
        assert resp.json()["code"] == "session_not_found"

    def test_chunk_fetch_after_restart(self, tmp_path):
        first = make_client(tmp_path)
        doc_id = upload(first, PLANTED)["doc_id"]
        sid = first.post("/api/sessions", json={"doc_id": doc_id}).json()["session_id"]
        body = first.post(f"/api/sessions/{sid}/messages",
                          json={"question": "What is the zorvian constant?"}).json()
        chunk_id = body["sources"][0]["chunk_id"]
        second = make_client(tmp_path)
        chunk = second.get(f"/api/chunks/{chunk_id}")
        assert chunk.status_code == 200
        assert chunk.json()["text"] == body["sources"][0]["excerpt"]


class TestAppConfig:
    def test_defaults(self):
        config = AppConfig()
        assert (config.host, config.port) == ("127.0.0.1", 8000)
        assert config.k == 4
        assert config.max_upload_bytes == 50 * 1024 * 1024

    @pytest.mark.parametrize("kwargs", [
        {"port": 0}, {"port": 70000}, {"k": 0},
    ])
    def test_invalid_values(self, kwargs):
        with pytest.raises(ConfigError):
            AppConfig(**kwargs)


class TestLoadConfig:
    def test_full_roundtrip(self, tmp_path):
        path = tmp_path / "conf.toml"
        path.write_text(
            'host = "0.0.0.0"\n'
            'port = 9100\n'
            'store_dir = "data/stores"\n'
            'k = 2\n'
            'cors_origins = ["http://localhost:5173"]\n'
            'max_upload_bytes = 1048576\n'
            '[chunking]\n'
            'chunk_size = 500\n'
            'chunk_overlap = 50\n'
            '[embedder]\n'
            'kind = "hashed"\n'
            'dim = 64\n'
            '[llm]\n'
            'kind = "extractive_stub"\n'
            'stub_sentence_count = 2\n'
        )
        config = load_config(path)
        assert config.host == "0.0.0.0"
        assert config.port == 9100
        assert config.store_dir == Path("data/stores")
        assert config.k == 2
        assert config.cors_origins == ("http://localhost:5173",)
        assert config.max_upload_bytes == 1048576
        assert config.chunking == ChunkingParams(chunk_size=500, chunk_overlap=50)
        assert config.embedder.dim == 64
        assert config.llm == LlmConfig(stub_sentence_count=2)

    def test_partial_file_keeps_defaults(self, tmp_path):
        path = tmp_path / "conf.toml"
        path.write_text("port = 9200\n")
        config = load_config(path)
        assert config.port == 9200
        assert config.host == "127.0.0.1"
        assert config.chunking == ChunkingParams()

    @pytest.mark.parametrize("text,hint", [
        ("bogus_key = 1\n", "unknown"),
        ("port = [\n", "parse"),
        ("port = 99999\n", "port"),
        ('[chunking]\nchunk_size = 10\nchunk_overlap = 10\n', "chunk"),
        ('[embedder]\nkind = "quantum"\n', "quantum"),
        ('[embedder]\nwidth = 3\n', "width"),
    ])
    def test_bad_config_rejected(self, tmp_path, text, hint):
        path = tmp_path / "conf.toml"
        path.write_text(text)
        with pytest.raises(ConfigError, match=f"(?i){hint}"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="read"):
            load_config(tmp_path / "absent.toml")

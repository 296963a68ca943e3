// Typed client for the docloom HTTP API. Wire shapes mirror the server
// responses verbatim (snake_case keys).

export interface UploadResult {
  doc_id: string;
  chunk_count: number;
}

export interface SessionInfo {
  session_id: string;
  doc_id: string;
}

export interface SourceRef {
  source_id: string;
  chunk_id: string;
  source_key: string;
  excerpt: string;
}

export interface RetrievalHit {
  chunk_id: string;
  score: number;
  rank: number;
  source_key: string;
  text: string;
}

export interface AnswerPayload {
  text: string;
  sources: SourceRef[];
  retrieval: RetrievalHit[];
}

export interface HistoryTurn {
  role: "user" | "assistant";
  content: string;
}

export interface ChunkPayload {
  chunk_id: string;
  doc_id: string;
  text: string;
  source_key: string;
  page: number;
  paragraph: number;
}

/** Server-reported failure: HTTP status plus the machine-readable code. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class DocloomClient {
  constructor(readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, "network_error", String(err));
    }
    if (!resp.ok) {
      let code = "http_error";
      let message = `${resp.status} ${resp.statusText}`;
      try {
        const body = await resp.json();
        if (typeof body.code === "string") code = body.code;
        if (typeof body.message === "string") message = body.message;
      } catch {
        // error body was not JSON; keep the status line
      }
      throw new ApiError(resp.status, code, message);
    }
    return resp.json() as Promise<T>;
  }

  private postJson<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  uploadDocument(file: File): Promise<UploadResult> {
    const form = new FormData();
    form.append("file", file, file.name);
    return this.request<UploadResult>("/api/documents", {
      method: "POST",
      body: form,
    });
  }

  createSession(docId: string): Promise<SessionInfo> {
    return this.postJson<SessionInfo>("/api/sessions", { doc_id: docId });
  }

  sendMessage(sessionId: string, question: string): Promise<AnswerPayload> {
    return this.postJson<AnswerPayload>(
      `/api/sessions/${encodeURIComponent(sessionId)}/messages`,
      { question },
    );
  }

  getHistory(sessionId: string): Promise<{ turns: HistoryTurn[] }> {
    return this.request<{ turns: HistoryTurn[] }>(
      `/api/sessions/${encodeURIComponent(sessionId)}/history`,
    );
  }

  getChunk(chunkId: string): Promise<ChunkPayload> {
    return this.request<ChunkPayload>(
      `/api/chunks/${encodeURIComponent(chunkId)}`,
    );
  }

  health(): Promise<{ status: string }> {
    return this.request<{ status: string }>("/api/health");
  }
}

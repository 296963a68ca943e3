// Conversation state, kept free of DOM concerns so it can be tested
// headlessly. The server owns the history; this store mirrors it.

import {
  AnswerPayload,
  ApiError,
  DocloomClient,
  SourceRef,
  UploadResult,
} from "./api.js";

export const STORAGE_KEY = "docloom.session";

export interface ChatMessage {
  role: "user" | "assistant";
  text: string;
  /**
   * Source excerpts for a fresh answer; null when unknown (restored
   * turns -- the server does not persist per-answer sources).
   */
  sources: SourceRef[] | null;
  /** Marks a transient assistant-side failure bubble. */
  error?: boolean;
}

interface StoredSession {
  sessionId: string;
  docName: string;
  chunkCount: number;
}

export class ConversationStore {
  messages: ChatMessage[] = [];
  pending = false;
  sessionId: string | null = null;
  docName = "";
  chunkCount = 0;

  constructor(
    private readonly api: DocloomClient,
    private readonly storage: Storage,
  ) {}

  get canSend(): boolean {
    return this.sessionId !== null && !this.pending;
  }

  /** Upload a document and open a fresh session over it. */
  async upload(file: File): Promise<UploadResult> {
    this.pending = true;
    try {
      const result = await this.api.uploadDocument(file);
      const session = await this.api.createSession(result.doc_id);
      this.sessionId = session.session_id;
      this.docName = file.name;
      this.chunkCount = result.chunk_count;
      this.messages = [];
      this.persist();
      return result;
    } finally {
      this.pending = false;
    }
  }

  /**
   * Send one question. The user bubble renders optimistically; on failure
   * it is joined by an error bubble and the server history stays as it was.
   */
  async send(question: string): Promise<AnswerPayload | null> {
    if (!this.canSend) {
      throw new Error("cannot send: no session or a request is in flight");
    }
    this.pending = true;
    this.messages.push({ role: "user", text: question, sources: null });
    try {
      const answer = await this.api.sendMessage(this.sessionId!, question);
      this.messages.push({
        role: "assistant",
        text: answer.text,
        sources: answer.sources,
      });
      return answer;
    } catch (err) {
      const detail =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      this.messages.push({
        role: "assistant",
        text: detail,
        sources: null,
        error: true,
      });
      return null;
    } finally {
      this.pending = false;
    }
  }

  /**
   * Rebuild the conversation from the stored session id, refetching the
   * turn list from the server. Returns false when there is nothing to
   * restore (no stored session, or the server no longer knows it).
   */
  async restore(): Promise<boolean> {
    const stored = this.loadStored();
    if (stored === null) return false;
    try {
      const history = await this.api.getHistory(stored.sessionId);
      this.sessionId = stored.sessionId;
      this.docName = stored.docName;
      this.chunkCount = stored.chunkCount;
      this.messages = history.turns.map((turn) => ({
        role: turn.role,
        text: turn.content,
        sources: null,
      }));
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.storage.removeItem(STORAGE_KEY);
        this.reset();
        return false;
      }
      throw err;
    }
  }

  reset(): void {
    this.sessionId = null;
    this.docName = "";
    this.chunkCount = 0;
    this.messages = [];
    this.pending = false;
  }

  private persist(): void {
    const record: StoredSession = {
      sessionId: this.sessionId!,
      docName: this.docName,
      chunkCount: this.chunkCount,
    };
    this.storage.setItem(STORAGE_KEY, JSON.stringify(record));
  }

  private loadStored(): StoredSession | null {
    const raw = this.storage.getItem(STORAGE_KEY);
    if (raw === null) return null;
    try {
      const parsed = JSON.parse(raw);
      if (typeof parsed.sessionId !== "string") return null;
      return {
        sessionId: parsed.sessionId,
        docName: typeof parsed.docName === "string" ? parsed.docName : "",
        chunkCount:
          typeof parsed.chunkCount === "number" ? parsed.chunkCount : 0,
      };
    } catch {
      return null;
    }
  }
}

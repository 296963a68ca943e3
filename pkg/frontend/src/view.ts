// DOM rendering and event wiring. Message nodes are append-only so an
// open source panel stays open across re-renders.

import { ApiError, SourceRef } from "./api.js";
import { ChatMessage, ConversationStore } from "./state.js";

export class ChatView {
  private readonly doc: Document;
  private readonly banner: HTMLElement;
  private readonly uploadScreen: HTMLElement;
  private readonly chatScreen: HTMLElement;
  private readonly fileInput: HTMLInputElement;
  private readonly uploadButton: HTMLButtonElement;
  private readonly uploadStatus: HTMLElement;
  private readonly messagesEl: HTMLElement;
  private readonly questionInput: HTMLInputElement;
  private readonly sendButton: HTMLButtonElement;
  private renderedCount = 0;

  constructor(
    private readonly root: HTMLElement,
    private readonly store: ConversationStore,
  ) {
    this.doc = root.ownerDocument;
    root.innerHTML = `
      <header class="topbar">
        <h1>docloom</h1>
        <span class="banner"></span>
      </header>
      <section class="upload-screen">
        <p class="upload-hint">Upload a document to start chatting.</p>
        <input type="file" class="file-input">
        <button type="button" class="upload-button">Upload</button>
        <p class="upload-status" hidden></p>
      </section>
      <section class="chat-screen" hidden>
        <div class="messages"></div>
        <form class="composer">
          <input class="question-input" placeholder="Ask about the document"
                 autocomplete="off">
          <button type="submit" class="send-button">Send</button>
        </form>
      </section>
    `;
    this.banner = this.query(".banner");
    this.uploadScreen = this.query(".upload-screen");
    this.chatScreen = this.query(".chat-screen");
    this.fileInput = this.query<HTMLInputElement>(".file-input");
    this.uploadButton = this.query<HTMLButtonElement>(".upload-button");
    this.uploadStatus = this.query(".upload-status");
    this.messagesEl = this.query(".messages");
    this.questionInput = this.query<HTMLInputElement>(".question-input");
    this.sendButton = this.query<HTMLButtonElement>(".send-button");

    this.uploadButton.addEventListener("click", () => {
      void this.handleUpload();
    });
    this.query<HTMLFormElement>(".composer").addEventListener("submit", (e) => {
      e.preventDefault();
      void this.handleSend();
    });
  }

  private query<T extends HTMLElement = HTMLElement>(selector: string): T {
    const el = this.root.querySelector(selector);
    if (el === null) throw new Error(`missing element: ${selector}`);
    return el as T;
  }

  render(): void {
    const hasSession = this.store.sessionId !== null;
    this.uploadScreen.hidden = hasSession;
    this.chatScreen.hidden = !hasSession;
    this.banner.textContent = hasSession
      ? `${this.store.docName} (${this.store.chunkCount} chunks)`
      : "";
    this.uploadButton.disabled = this.store.pending;
    this.sendButton.disabled = !this.store.canSend;
    this.questionInput.disabled = !hasSession;
    this.syncMessages();
  }

  private syncMessages(): void {
    if (this.store.messages.length < this.renderedCount) {
      this.messagesEl.innerHTML = ""; // conversation was replaced
      this.renderedCount = 0;
    }
    for (const msg of this.store.messages.slice(this.renderedCount)) {
      this.messagesEl.appendChild(this.renderMessage(msg));
      this.renderedCount += 1;
    }
  }

  private renderMessage(msg: ChatMessage): HTMLElement {
    const bubble = this.doc.createElement("div");
    bubble.className = `bubble ${msg.role}${msg.error ? " error" : ""}`;
    const text = this.doc.createElement("p");
    text.className = "bubble-text";
    text.textContent = msg.text;
    bubble.appendChild(text);
    if (msg.role === "assistant" && !msg.error) {
      if (msg.sources === null) {
        const note = this.doc.createElement("p");
        note.className = "sources-unavailable";
        note.textContent = "sources unavailable";
        bubble.appendChild(note);
      } else {
        for (const source of msg.sources) {
          bubble.appendChild(this.renderSourcePanel(source));
        }
      }
    }
    return bubble;
  }

  private renderSourcePanel(source: SourceRef): HTMLElement {
    const panel = this.doc.createElement("details");
    panel.className = "source-panel";
    panel.dataset.chunkId = source.chunk_id;
    const summary = this.doc.createElement("summary");
    summary.textContent = `${source.source_id} (${source.source_key})`;
    const excerpt = this.doc.createElement("pre");
    excerpt.className = "excerpt";
    excerpt.textContent = source.excerpt;
    panel.appendChild(summary);
    panel.appendChild(excerpt);
    return panel;
  }

  private setUploadStatus(message: string, isError = false): void {
    this.uploadStatus.textContent = message;
    this.uploadStatus.hidden = message === "";
    this.uploadStatus.classList.toggle("error", isError);
  }

  async handleUpload(): Promise<void> {
    const file = this.fileInput.files?.[0];
    if (file === undefined) {
      this.setUploadStatus("Choose a file first.", true);
      return;
    }
    this.setUploadStatus(`Uploading ${file.name}...`);
    try {
      await this.store.upload(file);
      this.setUploadStatus("");
    } catch (err) {
      // controls stay enabled, so the same upload can simply be retried
      const detail =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      this.setUploadStatus(detail, true);
    }
    this.render();
  }

  async handleSend(): Promise<void> {
    const question = this.questionInput.value.trim();
    if (question === "" || !this.store.canSend) return;
    this.questionInput.value = "";
    const done = this.store.send(question);
    this.render(); // optimistic user bubble, send disabled
    await done;
    this.render();
  }
}

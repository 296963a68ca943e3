import { DocloomClient } from "./api.js";
import { ConversationStore } from "./state.js";
import { ChatView } from "./view.js";

// API base resolution: ?api=http://host:port beats a window override,
// which beats same-origin.
const params = new URLSearchParams(window.location.search);
const base =
  params.get("api") ??
  (window as { DOCLOOM_API_BASE?: string }).DOCLOOM_API_BASE ??
  "";

const client = new DocloomClient(base);
const store = new ConversationStore(client, window.localStorage);
const root = document.getElementById("app");
if (root === null) throw new Error("missing #app mount point");
const view = new ChatView(root, store);

store
  .restore()
  .catch((err) => console.error("history restore failed:", err))
  .finally(() => view.render());

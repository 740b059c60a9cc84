/** Browser entry point.
 *
 * Query parameters:
 *   ?service=http://127.0.0.1:8787   service base URL (defaults to same origin)
 *   ?session=ses-000001              open an existing session
 *   ?owner=maya                      owner for a newly created session
 *
 * Without a session parameter a fresh session is created and the URL is
 * updated, so a page reload lands back in the same session (refresh safety:
 * server state always survives; the draft autosaves to localStorage).
 */

import { SynthLabClient } from "./api.js";
import { mountWorkspace } from "./workspace.js";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("service") ?? window.location.origin;
  const client = new SynthLabClient(base);
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");

  let sessionId = params.get("session");
  if (!sessionId) {
    const created = await client.createSession(params.get("owner") ?? "student");
    sessionId = created.id;
    params.set("session", sessionId);
    window.history.replaceState(null, "", `?${params.toString()}`);
  }

  await mountWorkspace(root, client, sessionId);
}

boot().catch((error) => {
  const root = document.getElementById("app");
  if (root) {
    root.innerHTML = `<div class="banner">Could not start: ${String(error)}</div>`;
  }
  console.error(error);
});

/** The three-column workspace: Distill, Analyze, Synthesize.
 *
 * All three columns render side by side and stay operable in any order.
 * The UI performs no domain logic: every mutation is a service call, and
 * nothing is rendered optimistically — after a 2xx the session state is
 * re-fetched and the whole view re-renders from that response. Mutations
 * queue client-side so at most one is in flight at a time.
 */

import {
  ApiError,
  type BacklinkEntry,
  type Group,
  type SessionState,
  ServiceUnreachable,
  type SynthDocument,
  SynthLabClient,
} from "./api.js";
import { MutationQueue } from "./queue.js";
import {
  clearDraft,
  initialViewState,
  isIdentityQuery,
  loadDraft,
  saveDraft,
  startDraftAutosave,
  type WorkspaceViewState,
} from "./state.js";

type Column = "distill" | "analyze" | "synthesize";

const REF_TOKEN = /\(\(ref:([A-Za-z0-9_.:\-]+)\)\)/g;

function extractRefIds(body: string): string[] {
  const seen = new Set<string>();
  for (const match of body.matchAll(REF_TOKEN)) seen.add(match[1]);
  return [...seen];
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function splitTerms(raw: string): string[] {
  return raw
    .split(",")
    .map((term) => term.trim())
    .filter((term) => term.length > 0);
}

function clip(text: string, max = 60): string {
  return text.length <= max ? text : text.slice(0, max - 1) + "…";
}

export interface WorkspaceOptions {
  storage?: Storage;
  autosaveMs?: number;
}

export class Workspace {
  readonly client: SynthLabClient;
  readonly queue = new MutationQueue();
  readonly state: WorkspaceViewState;

  private readonly root: HTMLElement;
  private readonly storage: Storage;
  private readonly stopAutosave: () => void;
  private offline = false;
  private errors: Record<Column, string | null> = {
    distill: null,
    analyze: null,
    synthesize: null,
  };
  private panel: { entityId: string; entries: BacklinkEntry[] } | null = null;
  private exportPreview = "";
  private skipKeep = new Set<string>();

  constructor(
    root: HTMLElement,
    client: SynthLabClient,
    sessionId: string,
    options: WorkspaceOptions = {},
  ) {
    this.root = root;
    this.client = client;
    this.state = initialViewState(sessionId);
    this.storage = options.storage ?? window.localStorage;
    this.stopAutosave = startDraftAutosave(
      this.storage,
      () =>
        this.state.draft.documentId === null
          ? null
          : {
              sessionId: this.state.sessionId,
              documentId: this.state.draft.documentId,
              body: this.state.draft.body,
            },
      options.autosaveMs,
    );
    this.root.addEventListener("submit", (event) => this.onSubmit(event));
    this.root.addEventListener("click", (event) => this.onClick(event));
    this.root.addEventListener("change", (event) => this.onChange(event));
    this.root.addEventListener("input", (event) => this.onInput(event));
  }

  destroy(): void {
    this.stopAutosave();
  }

  idle(): Promise<void> {
    return this.queue.idle();
  }

  /** Initial fetch + render; safe to call again to force a full reload. */
  load(): Promise<void> {
    return this.act("distill", async () => {
      await this.refreshState();
    });
  }

  // -- server synchronisation ----------------------------------------------

  private async refreshState(): Promise<void> {
    const server = await this.client.getSession(this.state.sessionId);
    this.state.server = server;
    const known = new Set(server.annotations.map((a) => a.id));
    this.state.selected = this.state.selected.filter((id) => known.has(id));
    if (this.state.filteredIds !== null) {
      this.state.filteredIds = this.state.filteredIds.filter((id) => known.has(id));
    }
  }

  /** Run one action through the queue; render exactly once afterwards. */
  private act(column: Column, task: () => Promise<void>): Promise<void> {
    return this.queue.run(async () => {
      this.errors[column] = null;
      try {
        await task();
        this.offline = false;
      } catch (error) {
        if (error instanceof ServiceUnreachable) {
          this.offline = true;
        } else if (error instanceof ApiError) {
          this.errors[column] = `${error.code}: ${error.detail}`;
        } else {
          this.render();
          throw error;
        }
      }
      this.render();
    });
  }

  // -- event delegation ------------------------------------------------------

  private onSubmit(event: Event): void {
    const form = (event.target as HTMLElement).closest<HTMLFormElement>("form");
    if (!form) return;
    event.preventDefault();
    if (form.dataset.filterForm !== undefined) this.applyFilter(form);
    else if (form.dataset.groupForm !== undefined) this.createGroup(form);
    else if (form.dataset.noteForm !== undefined) this.createNote(form);
    else if (form.dataset.documentForm !== undefined) this.createDocument(form);
  }

  private onClick(event: Event): void {
    const target = event.target as HTMLElement;
    const button = target.closest<HTMLElement>(
      "[data-assign], [data-remove], [data-transfer], [data-merge], [data-backlink-badge]," +
        " [data-jump], [data-jump-link], [data-close-panel], [data-clear-filter]," +
        " [data-insert-ref], [data-save-document], [data-export]",
    );
    if (!button) return;
    const data = button.dataset;
    if (data.assign !== undefined) this.assign(data.assign);
    else if (data.remove !== undefined) this.removeMember(data.remove);
    else if (data.transfer !== undefined) this.transferMember(data.transfer);
    else if (data.merge !== undefined) this.mergePicked();
    else if (data.backlinkBadge !== undefined) this.showBacklinks(data.backlinkBadge);
    else if (data.jump !== undefined) this.jumpTo(data.jump);
    else if (data.jumpLink !== undefined) this.jumpTo(data.jumpLink);
    else if (data.closePanel !== undefined) this.closePanel();
    else if (data.clearFilter !== undefined) this.clearFilter();
    else if (data.insertRef !== undefined) this.insertReference();
    else if (data.saveDocument !== undefined) this.saveDocument();
    else if (data.export !== undefined) this.exportDocument(data.export as "markdown" | "html");
  }

  private onChange(event: Event): void {
    const target = event.target as HTMLElement;
    if (target instanceof HTMLInputElement && target.dataset.selectAnnotation !== undefined) {
      const id = target.dataset.selectAnnotation;
      this.state.selected = this.state.selected.filter((x) => x !== id);
      if (target.checked) this.state.selected.push(id);
      this.render();
    } else if (
      target instanceof HTMLSelectElement &&
      target.dataset.documentPicker !== undefined
    ) {
      if (target.value) this.openDocument(target.value);
      this.render();
    }
  }

  private onInput(event: Event): void {
    const target = event.target as HTMLElement;
    if (target instanceof HTMLTextAreaElement && target.dataset.draft !== undefined) {
      this.state.draft.body = target.value;
    }
  }

  // -- Distill actions ---------------------------------------------------------

  private applyFilter(form: HTMLFormElement): void {
    const fields = new FormData(form);
    const query = {
      keywords: splitTerms(String(fields.get("keywords") ?? "")),
      authors: splitTerms(String(fields.get("authors") ?? "")),
      tags: splitTerms(String(fields.get("tags") ?? "")),
      include_replies: fields.get("include_replies") !== null,
    };
    void this.act("distill", async () => {
      if (isIdentityQuery(query)) {
        // no filtering requested: show everything without a server round-trip
        this.state.query = query;
        this.state.filteredIds = null;
        await this.refreshState();
        return;
      }
      const result = await this.client.filterAnnotations(this.state.sessionId, query);
      this.state.query = result.query;
      this.state.filteredIds = result.annotations.map((a) => a.id);
      for (const key of ["filter-keywords", "filter-authors", "filter-tags"]) {
        this.skipKeep.add(key);
      }
      await this.refreshState();
    });
  }

  private clearFilter(): void {
    void this.act("distill", async () => {
      this.state.query = { keywords: [], authors: [], tags: [], include_replies: true };
      this.state.filteredIds = null;
      for (const key of ["filter-keywords", "filter-authors", "filter-tags"]) {
        this.skipKeep.add(key);
      }
      await this.refreshState();
    });
  }

  private assign(annotationId: string): void {
    const select = this.root.querySelector<HTMLSelectElement>(
      `[data-assign-select="${annotationId}"]`,
    );
    const groupId = select?.value ?? "";
    if (!groupId) return;
    void this.act("distill", async () => {
      await this.client.assign(this.state.sessionId, groupId, annotationId);
      await this.refreshState();
    });
  }

  // -- Analyze actions ---------------------------------------------------------

  private createGroup(form: HTMLFormElement): void {
    const fields = new FormData(form);
    const label = String(fields.get("label") ?? "");
    const description = String(fields.get("description") ?? "");
    void this.act("analyze", async () => {
      await this.client.createGroup(this.state.sessionId, label, description);
      this.skipKeep.add("group-label");
      this.skipKeep.add("group-description");
      await this.refreshState();
    });
  }

  private removeMember(key: string): void {
    const [groupId, annotationId] = key.split(":", 2);
    void this.act("analyze", async () => {
      await this.client.removeFromGroup(this.state.sessionId, groupId, annotationId);
      await this.refreshState();
    });
  }

  private transferMember(key: string): void {
    const [fromGroupId, annotationId] = key.split(":", 2);
    const select = this.root.querySelector<HTMLSelectElement>(
      `[data-transfer-select="${key}"]`,
    );
    const toGroupId = select?.value ?? "";
    if (!toGroupId) return;
    void this.act("analyze", async () => {
      await this.client.transfer(this.state.sessionId, annotationId, fromGroupId, toGroupId);
      await this.refreshState();
    });
  }

  private mergePicked(): void {
    const picked = [...this.root.querySelectorAll<HTMLInputElement>("[data-merge-pick]")]
      .filter((box) => box.checked)
      .map((box) => box.dataset.mergePick as string);
    const label = this.root.querySelector<HTMLInputElement>("[data-merge-label]")?.value ?? "";
    void this.act("analyze", async () => {
      await this.client.merge(this.state.sessionId, picked, label);
      this.skipKeep.add("merge-label");
      await this.refreshState();
    });
  }

  private createNote(form: HTMLFormElement): void {
    const fields = new FormData(form);
    const text = String(fields.get("text") ?? "");
    const groupsSelect = form.querySelector<HTMLSelectElement>("[data-note-groups]");
    const linkedGroups = groupsSelect
      ? [...groupsSelect.selectedOptions].map((option) => option.value)
      : [];
    const linkedAnnotations = [...this.state.selected];
    void this.act("analyze", async () => {
      await this.client.createNote(this.state.sessionId, text, linkedAnnotations, linkedGroups);
      this.state.selected = [];
      this.skipKeep.add("note-text");
      this.skipKeep.add("note-groups");
      await this.refreshState();
    });
  }

  // -- Synthesize actions -------------------------------------------------------

  private createDocument(form: HTMLFormElement): void {
    const fields = new FormData(form);
    const level = String(fields.get("level") ?? "cross_source_synthesis") as
      | "per_source_summary"
      | "cross_source_synthesis";
    const sourceUri = String(fields.get("source_uri") ?? "");
    void this.act("synthesize", async () => {
      const doc = await this.client.createDocument(
        this.state.sessionId,
        level,
        level === "per_source_summary" ? sourceUri : undefined,
      );
      await this.refreshState();
      this.openDocument(doc.id);
    });
  }

  private openDocument(documentId: string): void {
    const previous = this.state.draft;
    if (previous.documentId !== null && previous.documentId !== documentId) {
      saveDraft(this.storage, this.state.sessionId, previous.documentId, previous.body);
    }
    const doc = this.state.server?.documents.find((d) => d.id === documentId);
    const stored = loadDraft(this.storage, this.state.sessionId, documentId);
    this.state.draft = { documentId, body: stored ?? doc?.body ?? "" };
    this.exportPreview = "";
  }

  private insertReference(): void {
    const picker = this.root.querySelector<HTMLSelectElement>("[data-ref-picker]");
    const textarea = this.root.querySelector<HTMLTextAreaElement>("[data-draft]");
    const entityId = picker?.value ?? "";
    if (!entityId || !textarea) return;
    const token = `((ref:${entityId}))`;
    const start = textarea.selectionStart ?? textarea.value.length;
    const end = textarea.selectionEnd ?? start;
    textarea.value = textarea.value.slice(0, start) + token + textarea.value.slice(end);
    const cursor = start + token.length;
    textarea.selectionStart = cursor;
    textarea.selectionEnd = cursor;
    this.state.draft.body = textarea.value;
    textarea.focus();
  }

  private saveDocument(): void {
    const { documentId, body } = this.state.draft;
    if (documentId === null) return;
    void this.act("synthesize", async () => {
      await this.client.editDocument(this.state.sessionId, documentId, body);
      clearDraft(this.storage, this.state.sessionId, documentId);
      await this.refreshState();
    });
  }

  private exportDocument(format: "markdown" | "html"): void {
    const documentId = this.state.draft.documentId;
    if (documentId === null) return;
    void this.act("synthesize", async () => {
      this.exportPreview = await this.client.exportDocument(
        this.state.sessionId,
        documentId,
        format,
      );
    });
  }

  // -- backlink navigation --------------------------------------------------------

  private showBacklinks(entityId: string): void {
    void this.act("analyze", async () => {
      const result = await this.client.backlinks(this.state.sessionId, entityId);
      this.panel = { entityId, entries: result.backlinks };
    });
  }

  private closePanel(): void {
    this.panel = null;
    this.render();
  }

  /** Scroll/focus the entity in its column; documents open in the editor. */
  jumpTo(entityId: string): void {
    this.panel = null;
    const doc = this.state.server?.documents.find((d) => d.id === entityId);
    if (doc) this.openDocument(doc.id);
    this.render();
    const target = this.root.querySelector<HTMLElement>(
      doc
        ? "[data-draft]"
        : `[data-annotation="${entityId}"], [data-group="${entityId}"],` +
            ` [data-lineage-chip="${entityId}"], [data-note="${entityId}"]`,
    );
    if (target) {
      target.scrollIntoView?.({ block: "center" });
      target.focus();
      target.classList.add("jump-flash");
    }
  }

  // -- rendering --------------------------------------------------------------

  private backlinkCounts(): Map<string, number> {
    const counts = new Map<string, number>();
    const server = this.state.server;
    if (!server) return counts;
    const bump = (id: string) => counts.set(id, (counts.get(id) ?? 0) + 1);
    for (const note of server.notes) {
      for (const id of [...note.linked_annotation_ids, ...note.linked_group_ids]) bump(id);
    }
    for (const doc of server.documents) {
      for (const id of extractRefIds(doc.body)) bump(id);
    }
    return counts;
  }

  render(): void {
    const kept = new Map<string, string | string[] | boolean>();
    for (const el of this.root.querySelectorAll<HTMLElement>("[data-keep]")) {
      const key = el.dataset.keep as string;
      if (this.skipKeep.has(key)) continue;
      if (el instanceof HTMLInputElement && el.type === "checkbox") kept.set(key, el.checked);
      else if (el instanceof HTMLSelectElement && el.multiple) {
        kept.set(key, [...el.selectedOptions].map((option) => option.value));
      } else if (
        el instanceof HTMLInputElement ||
        el instanceof HTMLSelectElement ||
        el instanceof HTMLTextAreaElement
      ) {
        kept.set(key, el.value);
      }
    }
    this.skipKeep.clear();

    this.root.innerHTML = this.html();

    for (const el of this.root.querySelectorAll<HTMLElement>("[data-keep]")) {
      const key = el.dataset.keep as string;
      if (!kept.has(key)) continue;
      const value = kept.get(key);
      if (el instanceof HTMLInputElement && el.type === "checkbox") {
        el.checked = value === true;
      } else if (el instanceof HTMLSelectElement && el.multiple && Array.isArray(value)) {
        for (const option of el.options) option.selected = value.includes(option.value);
      } else if (
        (el instanceof HTMLInputElement ||
          el instanceof HTMLSelectElement ||
          el instanceof HTMLTextAreaElement) &&
        typeof value === "string"
      ) {
        el.value = value;
      }
    }

    const draft = this.root.querySelector<HTMLTextAreaElement>("[data-draft]");
    if (draft) draft.value = this.state.draft.body;
    const preview = this.root.querySelector<HTMLElement>("[data-export-output]");
    if (preview) preview.textContent = this.exportPreview;
  }

  private html(): string {
    const server = this.state.server;
    return `
      <div class="banner" data-banner ${this.offline ? "" : "hidden"}>
        Service unreachable — the last action did not go through. It will not be retried;
        check the connection and try again.
      </div>
      <div class="columns">
        ${this.distillHtml(server)}
        ${this.analyzeHtml(server)}
        ${this.synthesizeHtml(server)}
      </div>
      ${this.panelHtml()}
    `;
  }

  private errorHtml(column: Column): string {
    const message = this.errors[column];
    return `<p class="inline-error" data-error="${column}" ${message ? "" : "hidden"}>${esc(
      message ?? "",
    )}</p>`;
  }

  private badgeHtml(counts: Map<string, number>, entityId: string): string {
    const count = counts.get(entityId) ?? 0;
    if (count === 0) return "";
    return `<button type="button" class="badge" data-backlink-badge="${esc(entityId)}"
      title="referencing notes and documents">⇠ ${count}</button>`;
  }

  private distillHtml(server: SessionState | null): string {
    const counts = this.backlinkCounts();
    const query = this.state.query;
    const openGroups = (server?.groups ?? []).filter((g) => !g.archived);
    const visible = (server?.annotations ?? []).filter(
      (a) => this.state.filteredIds === null || this.state.filteredIds.includes(a.id),
    );
    const cards = visible
      .map((a) => {
        const selected = this.state.selected.includes(a.id);
        const assign =
          openGroups.length === 0
            ? ""
            : `<span class="assign">
                 <select data-assign-select="${a.id}" data-keep="assign-target:${a.id}">
                   ${openGroups
                     .map((g) => `<option value="${g.id}">${esc(g.label)}</option>`)
                     .join("")}
                 </select>
                 <button type="button" data-assign="${a.id}">Assign</button>
               </span>`;
        return `<li class="card annotation" data-annotation="${a.id}" tabindex="-1">
          <header>
            <label><input type="checkbox" data-select-annotation="${a.id}" ${
              selected ? "checked" : ""
            }> select</label>
            <span class="author">${esc(a.author || "unknown")}</span>
            ${a.reply_to.length > 0 ? '<span class="chip">reply</span>' : ""}
            ${this.badgeHtml(counts, a.id)}
          </header>
          ${a.quote ? `<blockquote>${esc(a.quote)}</blockquote>` : ""}
          <p>${esc(a.body)}</p>
          <footer>
            ${a.tags.map((t) => `<span class="chip tag">${esc(t)}</span>`).join(" ")}
            <span class="meta">${esc(a.source_title || a.source_uri)}</span>
            ${assign}
          </footer>
        </li>`;
      })
      .join("");
    return `<section class="column" data-column="distill">
      <h2>Distill</h2>
      <form data-filter-form>
        <input name="keywords" data-keep="filter-keywords" placeholder="keywords, comma-separated"
          value="${esc(query.keywords.join(", "))}">
        <input name="authors" data-keep="filter-authors" placeholder="authors"
          value="${esc(query.authors.join(", "))}">
        <input name="tags" data-keep="filter-tags" placeholder="tags"
          value="${esc(query.tags.join(", "))}">
        <label><input type="checkbox" name="include_replies" data-keep="filter-replies" ${
          query.include_replies ? "checked" : ""
        }> include replies</label>
        <button type="submit">Apply filter</button>
        <button type="button" data-clear-filter>Clear</button>
      </form>
      ${this.errorHtml("distill")}
      <ul class="cards" data-annotation-list>
        ${cards || '<li class="empty">No annotations yet — ingest a source to begin.</li>'}
      </ul>
    </section>`;
  }

  private analyzeHtml(server: SessionState | null): string {
    const counts = this.backlinkCounts();
    const groups = server?.groups ?? [];
    const open = groups.filter((g) => !g.archived);
    const annotationById = new Map((server?.annotations ?? []).map((a) => [a.id, a]));
    const groupById = new Map(groups.map((g) => [g.id, g]));

    const memberHtml = (group: Group, annotationId: string): string => {
      const key = `${group.id}:${annotationId}`;
      const others = open.filter((g) => g.id !== group.id);
      const author = annotationById.get(annotationId)?.author ?? "";
      const controls = group.archived
        ? ""
        : `<button type="button" data-remove="${key}" title="remove from group">×</button>
           ${
             others.length === 0
               ? ""
               : `<select data-transfer-select="${key}" data-keep="transfer-target:${key}">
                    ${others
                      .map((g) => `<option value="${g.id}">${esc(g.label)}</option>`)
                      .join("")}
                  </select>
                  <button type="button" data-transfer="${key}" title="transfer">→</button>`
           }`;
      return `<li class="member" data-member="${key}">
        <code>${annotationId}</code> <span class="meta">${esc(author)}</span> ${controls}
      </li>`;
    };

    const lineageHtml = (group: Group): string =>
      group.parent_group_ids.length === 0
        ? ""
        : `<p class="lineage">merged from ${group.parent_group_ids
            .map((pid) => {
              const parent = groupById.get(pid);
              return `<span class="chip archived" data-lineage-chip="${pid}" tabindex="-1">
                ${esc(parent?.label ?? pid)}${this.badgeHtml(counts, pid)}</span>`;
            })
            .join(" ")}</p>`;

    const groupCards = open
      .map(
        (g) => `<li class="card group" data-group="${g.id}" tabindex="-1">
          <header>
            <label><input type="checkbox" data-merge-pick="${g.id}" data-keep="merge-pick:${g.id}">
              merge</label>
            <strong>${esc(g.label)}</strong>
            <span class="meta">(${g.member_ids.length})</span>
            ${this.badgeHtml(counts, g.id)}
          </header>
          ${g.description ? `<p class="meta">${esc(g.description)}</p>` : ""}
          ${lineageHtml(g)}
          <ul class="members">${g.member_ids.map((id) => memberHtml(g, id)).join("")}</ul>
        </li>`,
      )
      .join("");

    const notes = (server?.notes ?? [])
      .map((note) => {
        const links = [...note.linked_annotation_ids, ...note.linked_group_ids]
          .map(
            (id) =>
              `<button type="button" class="chip" data-jump-link="${id}">${id}</button>`,
          )
          .join(" ");
        return `<li class="card note" data-note="${note.id}" tabindex="-1">
          <header><code>${note.id}</code> ${this.badgeHtml(counts, note.id)}</header>
          <p>${esc(note.text)}</p>
          <footer>${links}</footer>
        </li>`;
      })
      .join("");

    const noteGroupOptions = groups
      .map(
        (g) =>
          `<option value="${g.id}">${esc(g.label)}${g.archived ? " (archived)" : ""}</option>`,
      )
      .join("");
    const selectionChips = this.state.selected
      .map((id) => `<code class="chip">${id}</code>`)
      .join(" ");

    return `<section class="column" data-column="analyze">
      <h2>Analyze</h2>
      <form data-group-form>
        <input name="label" data-keep="group-label" placeholder="new group label" required>
        <input name="description" data-keep="group-description" placeholder="description">
        <button type="submit">Create group</button>
      </form>
      <div class="merge-bar">
        <input data-merge-label data-keep="merge-label" placeholder="merged group label">
        <button type="button" data-merge>Merge checked groups</button>
      </div>
      ${this.errorHtml("analyze")}
      <ul class="cards" data-group-list>
        ${groupCards || '<li class="empty">No groups yet.</li>'}
      </ul>
      <div class="notes-box" data-notes-box>
        <h3>In-the-Moment Notes</h3>
        <ul class="cards" data-note-list>${notes}</ul>
        <form data-note-form>
          <textarea name="text" data-keep="note-text" placeholder="capture a thought…" required></textarea>
          <p class="meta">links to selected annotations: ${selectionChips || "none"}</p>
          <select multiple size="3" data-note-groups data-keep="note-groups">
            ${noteGroupOptions}
          </select>
          <button type="submit">Capture note</button>
        </form>
      </div>
    </section>`;
  }

  private synthesizeHtml(server: SessionState | null): string {
    const documents = server?.documents ?? [];
    const current = this.state.draft.documentId;
    const sources = server?.source_uris ?? [];
    const pickerOptions = documents
      .map(
        (d) =>
          `<option value="${d.id}" ${d.id === current ? "selected" : ""}>
            ${d.id} — ${d.level === "per_source_summary" ? "summary" : "synthesis"}</option>`,
      )
      .join("");

    const refOptions = (label: string, items: { id: string; hint: string }[]): string =>
      items.length === 0
        ? ""
        : `<optgroup label="${label}">${items
            .map((x) => `<option value="${x.id}">${x.id} — ${esc(clip(x.hint))}</option>`)
            .join("")}</optgroup>`;

    const editor =
      current === null
        ? '<p class="empty">Create or pick a document to start writing.</p>'
        : `<div class="editor">
            <textarea data-draft rows="14"></textarea>
            <div class="editor-tools">
              <select data-ref-picker data-keep="ref-picker">
                ${refOptions(
                  "Annotations",
                  (server?.annotations ?? []).map((a) => ({
                    id: a.id,
                    hint: `${a.author}: ${a.quote || a.body}`,
                  })),
                )}
                ${refOptions(
                  "Groups",
                  (server?.groups ?? []).map((g) => ({ id: g.id, hint: g.label })),
                )}
                ${refOptions(
                  "Notes",
                  (server?.notes ?? []).map((n) => ({ id: n.id, hint: n.text })),
                )}
              </select>
              <button type="button" data-insert-ref>Insert reference</button>
              <button type="button" data-save-document>Save</button>
              <button type="button" data-export="markdown">Export Markdown</button>
              <button type="button" data-export="html">Export HTML</button>
            </div>
            <pre class="export-preview" data-export-output></pre>
          </div>`;

    return `<section class="column" data-column="synthesize">
      <h2>Synthesize</h2>
      <form data-document-form>
        <select name="level" data-keep="doc-level">
          <option value="per_source_summary">per-source summary</option>
          <option value="cross_source_synthesis">cross-source synthesis</option>
        </select>
        <select name="source_uri" data-keep="doc-source">
          ${sources.map((uri) => `<option value="${esc(uri)}">${esc(uri)}</option>`).join("")}
        </select>
        <button type="submit">Create document</button>
      </form>
      <select data-document-picker>
        <option value="">— open a document —</option>
        ${pickerOptions}
      </select>
      ${this.errorHtml("synthesize")}
      ${editor}
    </section>`;
  }

  private panelHtml(): string {
    if (this.panel === null) return "";
    const entries = this.panel.entries
      .map((entry) => {
        const hint =
          entry.kind === "note"
            ? (entry.entity as { text: string }).text
            : (entry.entity as { level: string }).level;
        return `<li>
          <button type="button" data-jump="${entry.entity.id}">
            ${entry.kind} ${entry.entity.id} — ${esc(clip(hint))}
          </button>
        </li>`;
      })
      .join("");
    return `<aside class="backlink-panel" data-backlink-panel>
      <h3>Backlinks of <code>${esc(this.panel.entityId)}</code></h3>
      <ul>${entries || "<li>No references yet.</li>"}</ul>
      <button type="button" data-close-panel>Close</button>
    </aside>`;
  }
}

/** Create a workspace bound to `root` and load the session into it. */
export async function mountWorkspace(
  root: HTMLElement,
  client: SynthLabClient,
  sessionId: string,
  options: WorkspaceOptions = {},
): Promise<Workspace> {
  const workspace = new Workspace(root, client, sessionId, options);
  await workspace.load();
  return workspace;
}

/** Typed HTTP client for the synthesis session service.
 *
 * Wire shapes mirror the service's JSON exactly (snake_case and all); the
 * client adds no interpretation beyond parsing, so everything the UI shows
 * comes verbatim from a server response.
 */

export interface Annotation {
  id: string;
  source_uri: string;
  source_title: string;
  author: string;
  quote: string;
  body: string;
  tags: string[];
  created_at: string;
  updated_at: string;
  reply_to: string[];
}

export interface Group {
  id: string;
  label: string;
  description: string;
  member_ids: string[];
  parent_group_ids: string[];
  archived: boolean;
  created_at: string;
}

export interface Note {
  id: string;
  text: string;
  created_at: string;
  linked_annotation_ids: string[];
  linked_group_ids: string[];
}

export type DocumentLevel = "per_source_summary" | "cross_source_synthesis";

export interface SynthDocument {
  id: string;
  level: DocumentLevel;
  source_uri: string | null;
  body: string;
  created_at: string;
  updated_at: string;
}

export interface SessionState {
  format: string;
  id: string;
  owner: string;
  created_at: string;
  source_uris: string[];
  last_seq: number;
  annotations: Annotation[];
  groups: Group[];
  notes: Note[];
  documents: SynthDocument[];
}

export interface FilterQueryWire {
  keywords: string[];
  authors: string[];
  tags: string[];
  include_replies: boolean;
}

export interface FilterResult {
  query: FilterQueryWire;
  annotations: Annotation[];
}

export interface IngestResult {
  new: number;
  new_ids: string[];
  total_annotations: number;
}

export interface BacklinkEntry {
  kind: "note" | "document";
  entity: Note | SynthDocument;
}

export interface BacklinkResult {
  entity_id: string;
  backlinks: BacklinkEntry[];
}

export interface TransferResult {
  from_group: Group;
  to_group: Group;
}

export interface StrategyReport {
  classification: string;
  deductive_fraction: number | null;
  interleaving_score: number;
  counts: Record<string, number>;
}

export interface AnalyticsResult {
  strategy: StrategyReport;
  iteration: Record<string, number>;
}

export interface EventRecord {
  seq: number;
  at: string;
  kind: string;
  payload: Record<string, unknown>;
}

export interface EventsResult {
  events: EventRecord[];
  last_seq: number;
}

export type ExportFormat = "markdown" | "html";

/** A non-2xx response, carrying the service's error code and message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
  }
}

/** The service could not be reached at all (network-level failure). */
export class ServiceUnreachable extends Error {
  constructor(readonly baseUrl: string, cause: unknown) {
    super(`service unreachable at ${baseUrl}`);
    this.name = "ServiceUnreachable";
    this.cause = cause;
  }
}

export class SynthLabClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async raw(method: string, path: string, body?: unknown): Promise<Response> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, {
        method,
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (error) {
      throw new ServiceUnreachable(this.baseUrl, error);
    }
    if (!response.ok) {
      let code = `HTTP ${response.status}`;
      let detail = response.statusText;
      try {
        const payload = await response.json();
        if (payload && typeof payload.error === "string") code = payload.error;
        if (payload && typeof payload.detail === "string") detail = payload.detail;
      } catch {
        // non-JSON error body; keep the status-line fallback
      }
      throw new ApiError(response.status, code, detail);
    }
    return response;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    return (await this.raw(method, path, body)).json() as Promise<T>;
  }

  createSession(owner: string, sourceUris: string[] = []): Promise<SessionState> {
    return this.request("POST", "/sessions", { owner, source_uris: sourceUris });
  }

  getSession(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  ingestFixture(sessionId: string, fixturePath: string): Promise<IngestResult> {
    return this.request("POST", `/sessions/${sessionId}/ingest`, { fixture_path: fixturePath });
  }

  ingestRecords(sessionId: string, records: unknown[]): Promise<IngestResult> {
    return this.request("POST", `/sessions/${sessionId}/ingest`, { records });
  }

  ingestSource(sessionId: string, sourceUri: string): Promise<IngestResult> {
    return this.request("POST", `/sessions/${sessionId}/ingest`, { source_uri: sourceUri });
  }

  filterAnnotations(
    sessionId: string,
    query: Partial<FilterQueryWire> = {},
  ): Promise<FilterResult> {
    const params = new URLSearchParams();
    for (const keyword of query.keywords ?? []) params.append("keywords", keyword);
    for (const author of query.authors ?? []) params.append("authors", author);
    for (const tag of query.tags ?? []) params.append("tags", tag);
    if (query.include_replies !== undefined) {
      params.append("include_replies", String(query.include_replies));
    }
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    return this.request("GET", `/sessions/${sessionId}/annotations${suffix}`);
  }

  createGroup(sessionId: string, label: string, description = ""): Promise<Group> {
    return this.request("POST", `/sessions/${sessionId}/groups`, { label, description });
  }

  assign(sessionId: string, groupId: string, annotationId: string): Promise<Group> {
    return this.request("POST", `/sessions/${sessionId}/groups/${groupId}/assign`, {
      annotation_id: annotationId,
    });
  }

  removeFromGroup(sessionId: string, groupId: string, annotationId: string): Promise<Group> {
    return this.request("POST", `/sessions/${sessionId}/groups/${groupId}/remove`, {
      annotation_id: annotationId,
    });
  }

  transfer(
    sessionId: string,
    annotationId: string,
    fromGroupId: string,
    toGroupId: string,
  ): Promise<TransferResult> {
    return this.request("POST", `/sessions/${sessionId}/transfers`, {
      annotation_id: annotationId,
      from_group_id: fromGroupId,
      to_group_id: toGroupId,
    });
  }

  merge(sessionId: string, groupIds: string[], label: string): Promise<Group> {
    return this.request("POST", `/sessions/${sessionId}/merges`, {
      group_ids: groupIds,
      label,
    });
  }

  createNote(
    sessionId: string,
    text: string,
    linkedAnnotationIds: string[] = [],
    linkedGroupIds: string[] = [],
  ): Promise<Note> {
    return this.request("POST", `/sessions/${sessionId}/notes`, {
      text,
      linked_annotation_ids: linkedAnnotationIds,
      linked_group_ids: linkedGroupIds,
    });
  }

  backlinks(sessionId: string, entityId: string): Promise<BacklinkResult> {
    return this.request("GET", `/sessions/${sessionId}/entities/${entityId}/backlinks`);
  }

  createDocument(
    sessionId: string,
    level: DocumentLevel,
    sourceUri?: string,
  ): Promise<SynthDocument> {
    const body: Record<string, unknown> = { level };
    if (sourceUri !== undefined) body.source_uri = sourceUri;
    return this.request("POST", `/sessions/${sessionId}/documents`, body);
  }

  editDocument(sessionId: string, documentId: string, body: string): Promise<SynthDocument> {
    return this.request("PUT", `/sessions/${sessionId}/documents/${documentId}`, { body });
  }

  async exportDocument(
    sessionId: string,
    documentId: string,
    format: ExportFormat,
  ): Promise<string> {
    const response = await this.raw(
      "GET",
      `/sessions/${sessionId}/documents/${documentId}/export?format=${format}`,
    );
    return response.text();
  }

  analytics(sessionId: string): Promise<AnalyticsResult> {
    return this.request("GET", `/sessions/${sessionId}/analytics`);
  }

  events(sessionId: string, since = 0): Promise<EventsResult> {
    return this.request("GET", `/sessions/${sessionId}/events?since=${since}`);
  }
}

/**
 * Typed client for the annotation service HTTP API.
 *
 * Every method returns the parsed service response untouched; the UI never
 * derives numbers on its own. Non-2xx responses become ApiError carrying
 * the status code and the service's detail payload verbatim; network-level
 * failures become ConnectionError so callers can render a distinct
 * "service unreachable" state (and must not auto-retry).
 */

export interface SessionConfigPayload {
  rounds: number;
  batch_size: number;
  seed_batch_size: number;
  strategy: string;
  seed: number;
  max_features?: number;
}

export interface SessionHandle {
  session_id: string;
  created_at: string;
  config: Record<string, unknown>;
  status: string;
  round: number;
  labeled_count: number;
  annotators: string[] | null;
  dual_submitted: string[];
  conflicts: string[];
}

export interface AnnotationItem {
  doc_id: string;
  text: string;
  lang: string;
  round: number;
  position_in_batch: number;
}

export interface BatchResponse {
  session_id: string;
  round: number;
  items: AnnotationItem[];
}

export interface RoundMetrics {
  round: number;
  accuracy: number;
  f1_related: number;
  f1_unrelated: number;
  labeled_count: number;
}

export class ApiError extends Error {
  readonly status: number;
  readonly detail: unknown;

  constructor(status: number, detail: unknown) {
    super(`HTTP ${status}: ${typeof detail === "string" ? detail : JSON.stringify(detail)}`);
    this.status = status;
    this.detail = detail;
  }
}

export class ConnectionError extends Error {
  constructor(cause: unknown) {
    super(`service unreachable: ${cause instanceof Error ? cause.message : String(cause)}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (cause) {
    throw new ConnectionError(cause);
  }
  let body: unknown = null;
  const text = await response.text();
  if (text) {
    try {
      body = JSON.parse(text);
    } catch {
      body = text;
    }
  }
  if (!response.ok) {
    const detail =
      body && typeof body === "object" && "detail" in (body as Record<string, unknown>)
        ? (body as Record<string, unknown>)["detail"]
        : body;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

export class Client {
  constructor(readonly base: string) {}

  private url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  createSession(
    corpus: string,
    config: SessionConfigPayload,
    annotators?: string[],
  ): Promise<SessionHandle> {
    const payload: Record<string, unknown> = { corpus, config };
    if (annotators && annotators.length) payload.annotators = annotators;
    return request<SessionHandle>(this.url("/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  listSessions(): Promise<SessionHandle[]> {
    return request<SessionHandle[]>(this.url("/sessions"));
  }

  getSession(id: string): Promise<SessionHandle> {
    return request<SessionHandle>(this.url(`/sessions/${id}`));
  }

  getBatch(id: string): Promise<BatchResponse> {
    return request<BatchResponse>(this.url(`/sessions/${id}/batch`));
  }

  postLabels(
    id: string,
    labels: Record<string, number>,
    annotator?: string,
  ): Promise<RoundMetrics | { status: string; remaining: string[] }> {
    const payload: Record<string, unknown> = { labels };
    if (annotator) payload.annotator = annotator;
    return request(this.url(`/sessions/${id}/labels`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getMetrics(id: string): Promise<RoundMetrics[]> {
    return request<RoundMetrics[]>(this.url(`/sessions/${id}/metrics`));
  }
}

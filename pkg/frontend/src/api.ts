// Typed client for the dynsched HTTP JSON API. The UI talks to the server
// through this module only; it never computes scheduling logic locally.

export interface SolveReport {
  status: string;
  lower_bound: number | string;
  upper_bound: number | string;
  nodes: number;
  wall_time: number;
}

export interface ScheduleDoc {
  kind: string;
  family: string;
  row_labels: string[];
  columns: string[];
  rows: string[][];
  objective: number;
  feasible: boolean;
  status: string | null;
}

export interface DiffEntry {
  index: number[];
  old: number;
  new: number;
}

export interface PlanSections {
  new_params: [string, string][];
  new_vars: [string, string][];
  new_constraints_text: string;
}

export interface ConstraintResponse {
  patch_text: string;
  plan: PlanSections | null;
  attempts: number;
  report: SolveReport;
  diff: DiffEntry[];
  hamming: number;
  injected: Record<string, unknown>;
}

export interface DiffResponse {
  diff: DiffEntry[];
  hamming: number;
  pending: boolean;
}

export interface TraceResponse {
  pending: boolean;
  plan: PlanSections | null;
  attempts: number;
  patch_text?: string;
  transcript: { prompt: string; response: string; note: string }[];
}

export interface HistoryStep {
  mode: string;
  text: string;
  patch_text: string;
  attempts: number;
  status: string;
  objective: number | null;
  accepted_at: string;
}

export interface HistoryResponse {
  id: string;
  kind: string;
  created_at: string;
  updated_at: string;
  steps: HistoryStep[];
}

export interface ApiErrorDetail {
  error: string;
  message: string;
  span?: { line: number; col: number; end_line: number; end_col: number };
  [key: string]: unknown;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: ApiErrorDetail,
  ) {
    super(`${detail.error}: ${detail.message}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!resp.ok) {
    let detail: ApiErrorDetail = { error: `HTTP${resp.status}`, message: resp.statusText };
    try {
      const body = (await resp.json()) as { detail?: ApiErrorDetail };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body: keep the generic detail
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  createSession(kind: string, instance: unknown): Promise<{ id: string }> {
    return request(this.url("/sessions"), {
      method: "POST",
      body: JSON.stringify({ kind, instance }),
    });
  }

  solve(sessionId: string, timeLimit?: number): Promise<{ report: SolveReport }> {
    return request(this.url(`/sessions/${sessionId}/solve`), {
      method: "POST",
      body: JSON.stringify(timeLimit ? { time_limit: timeLimit } : {}),
    });
  }

  addConstraint(
    sessionId: string,
    mode: "nl" | "dsl",
    text: string,
    tPerturb?: number,
  ): Promise<ConstraintResponse> {
    const body: Record<string, unknown> = { mode, text };
    if (tPerturb !== undefined) body.t_perturb = tPerturb;
    return request(this.url(`/sessions/${sessionId}/constraints`), {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  accept(sessionId: string): Promise<{ accepted: boolean; history_length: number }> {
    return request(this.url(`/sessions/${sessionId}/accept`), { method: "POST" });
  }

  discard(sessionId: string): Promise<{ discarded: boolean }> {
    return request(this.url(`/sessions/${sessionId}/discard`), { method: "POST" });
  }

  schedule(sessionId: string): Promise<ScheduleDoc> {
    return request(this.url(`/sessions/${sessionId}/schedule`));
  }

  diff(sessionId: string): Promise<DiffResponse> {
    return request(this.url(`/sessions/${sessionId}/diff`));
  }

  trace(sessionId: string): Promise<TraceResponse> {
    return request(this.url(`/sessions/${sessionId}/trace`));
  }

  history(sessionId: string): Promise<HistoryResponse> {
    return request(this.url(`/sessions/${sessionId}/history`));
  }
}

// Typed client for the curation HTTP API. Every mutation carries the
// caller's version token; 409 surfaces as ConflictError so the UI can
// prompt a reload instead of silently overwriting.

import type {
  AssetWire,
  CurationReport,
  MoveRequest,
  ScenarioDetail,
  ScenarioListRow,
} from "./types";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly diagnostics: string[] = [],
  ) {
    super(message);
  }
}

export class ConflictError extends ApiError {}

async function parseFailure(response: Response): Promise<never> {
  let message = `${response.status}`;
  let diagnostics: string[] = [];
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") message = body.error;
    if (Array.isArray(body?.diagnostics)) diagnostics = body.diagnostics;
  } catch {
    // non-JSON failure body; keep the status text
  }
  if (response.status === 409) throw new ConflictError(message, 409, diagnostics);
  throw new ApiError(message, response.status, diagnostics);
}

export class ApiClient {
  constructor(readonly base: string) {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) await parseFailure(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await parseFailure(response);
    return (await response.json()) as T;
  }

  listScenarios(filter?: { task_type?: string; status?: string }): Promise<ScenarioListRow[]> {
    const params = new URLSearchParams();
    if (filter?.task_type) params.set("task_type", filter.task_type);
    if (filter?.status) params.set("status", filter.status);
    const query = params.toString();
    return this.get(`/scenarios${query ? "?" + query : ""}`);
  }

  getScenario(id: string): Promise<ScenarioDetail> {
    return this.get(`/scenarios/${id}`);
  }

  moveObjects(id: string, version: number, moves: MoveRequest[]): Promise<ScenarioDetail> {
    return this.post(`/scenarios/${id}/layout`, { version, moves });
  }

  editGraph(id: string, version: number, patch: Record<string, unknown>): Promise<ScenarioDetail> {
    return this.post(`/scenarios/${id}/graph`, { version, ...patch });
  }

  resolveLayout(id: string, version: number, seed?: number): Promise<ScenarioDetail> {
    return this.post(`/scenarios/${id}/resolve`, { version, seed });
  }

  setStatus(id: string, version: number, status: string, note?: string): Promise<ScenarioDetail> {
    return this.post(`/scenarios/${id}/status`, { version, status, note });
  }

  catalog(): Promise<AssetWire[]> {
    return this.get("/catalog");
  }

  report(): Promise<CurationReport> {
    return this.get("/report");
  }
}

import type {
  AuditRecord,
  ChallengeRecord,
  CommandRequest,
  CommandResponse,
  HealthReport,
  Platform,
  PolicyDocument,
} from "./types.js";

/** Minimal fetch signature so tests can inject a stub. */
export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

/**
 * Raised for any non-2xx response. `detail` carries the parsed JSON
 * `detail` field when the body had one (FastAPI convention), otherwise
 * the whole parsed body or null.
 */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
    message?: string,
  ) {
    super(message ?? `gateway returned HTTP ${status}`);
    this.name = "ApiError";
  }
}

export interface AuditFilter {
  from?: number;
  to?: number;
  action?: string;
  label?: string;
}

/** Build the query string for GET /v1/audit, skipping unset fields. */
export function buildAuditQuery(filter: AuditFilter): string {
  const params = new URLSearchParams();
  if (filter.from !== undefined) params.set("from", String(filter.from));
  if (filter.to !== undefined) params.set("to", String(filter.to));
  if (filter.action) params.set("action", filter.action);
  if (filter.label) params.set("label", filter.label);
  const qs = params.toString();
  return qs ? `?${qs}` : "";
}

export class GatewayClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    // Bind so an injected stub and the global agree on `this`.
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  async submitCommand(req: CommandRequest): Promise<CommandResponse> {
    return this.request("POST", "/v1/commands", req);
  }

  async listPendingChallenges(): Promise<ChallengeRecord[]> {
    return this.request("GET", "/v1/challenges?status=pending");
  }

  async respondToChallenge(
    id: string,
    verdict: "approve" | "deny",
  ): Promise<{ status: string }> {
    return this.request(
      "POST",
      `/v1/challenges/${encodeURIComponent(id)}/respond`,
      { verdict },
    );
  }

  async getPolicy(platform: Platform): Promise<PolicyDocument> {
    return this.request("GET", `/v1/policy?platform=${platform}`);
  }

  async putPolicy(doc: PolicyDocument): Promise<PolicyDocument> {
    return this.request("PUT", "/v1/policy", doc);
  }

  async queryAudit(filter: AuditFilter = {}): Promise<AuditRecord[]> {
    return this.request("GET", `/v1/audit${buildAuditQuery(filter)}`);
  }

  async health(): Promise<HealthReport> {
    return this.request("GET", "/v1/healthz");
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(`${this.base}${path}`, init);
    const parsed = await parseBody(resp);
    if (!resp.ok) {
      const detail =
        parsed && typeof parsed === "object" && "detail" in parsed
          ? (parsed as { detail: unknown }).detail
          : parsed;
      throw new ApiError(resp.status, detail);
    }
    return parsed as T;
  }
}

async function parseBody(resp: Response): Promise<unknown> {
  const text = await resp.text();
  if (!text) return null;
  try {
    return JSON.parse(text);
  } catch {
    return text;
  }
}

/** Thin typed client over fetch. Every number the UI shows comes out of
 * these responses; the client performs no arithmetic on them. */

import type {
  DiseasesResponse,
  ExplainResponse,
  IndividualIn,
  PlanRequest,
  PlanResponse,
  RiskResponse,
  SchemaResponse,
  SimulateRequest,
  TwinPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(`API error ${status}: ${summarize(detail)}`);
    this.name = "ApiError";
  }
}

function summarize(detail: unknown): string {
  if (typeof detail === "string") return detail;
  if (Array.isArray(detail)) {
    return detail
      .map((d) =>
        d && typeof d === "object" && "field" in d && "message" in d
          ? `${(d as { field: unknown }).field}: ${(d as { message: unknown }).message}`
          : JSON.stringify(d),
      )
      .join("; ");
  }
  return JSON.stringify(detail);
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { accept: "application/json" } };
    if (body !== undefined) {
      init.headers = { ...init.headers, "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    const payload: unknown = await response.json();
    if (!response.ok) {
      const detail =
        payload && typeof payload === "object" && "detail" in payload
          ? (payload as { detail: unknown }).detail
          : payload;
      throw new ApiError(response.status, detail);
    }
    return payload as T;
  }

  getSchema(): Promise<SchemaResponse> {
    return this.request("GET", "/v1/schema");
  }

  getDiseases(): Promise<DiseasesResponse> {
    return this.request("GET", "/v1/diseases");
  }

  risk(individual: IndividualIn): Promise<RiskResponse> {
    return this.request("POST", "/v1/risk", { individual });
  }

  explain(individual: IndividualIn, disease: string): Promise<ExplainResponse> {
    return this.request("POST", "/v1/explain", { individual, disease });
  }

  simulate(req: SimulateRequest): Promise<TwinPayload> {
    return this.request("POST", "/v1/simulate", req);
  }

  plan(req: PlanRequest): Promise<PlanResponse> {
    return this.request("POST", "/v1/plan", req);
  }
}

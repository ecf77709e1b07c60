/** Stubbed API: a fetch-compatible function with route handlers, a call log,
 * and manually resolvable responses so tests can deliver answers out of
 * order. Also payload factories shaped exactly like the service responses. */

import { ApiClient, type FetchLike } from "../src/api.js";
import { Session } from "../src/session.js";
import { Store } from "../src/store.js";
import type {
  ComparisonRow,
  ExplainResponse,
  FeatureSpec,
  PlanResponse,
  PlanStep,
  RiskEntry,
  RiskResponse,
  SchemaResponse,
  TwinPayload,
} from "../src/types.js";

export interface LoggedCall {
  method: string;
  path: string;
  body: unknown;
}

/** Thrown by a responder to simulate an API error status. */
export class HttpFailure {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {}
}

export class Deferred<T> {
  readonly promise: Promise<T>;
  resolve!: (value: T) => void;
  reject!: (error: unknown) => void;
  constructor() {
    this.promise = new Promise((res, rej) => {
      this.resolve = res;
      this.reject = rej;
    });
  }
}

type Responder = (body: unknown, call: LoggedCall) => unknown;

export class StubApi {
  readonly calls: LoggedCall[] = [];
  private readonly routes = new Map<string, Responder>();

  on(method: string, path: string, responder: Responder): void {
    this.routes.set(`${method} ${path}`, responder);
  }

  countOf(method: string, path: string): number {
    return this.calls.filter((c) => c.method === method && c.path === path).length;
  }

  callsTo(method: string, path: string): LoggedCall[] {
    return this.calls.filter((c) => c.method === method && c.path === path);
  }

  readonly fetch: FetchLike = async (input, init) => {
    const method = init?.method ?? "GET";
    const body = typeof init?.body === "string" ? JSON.parse(init.body) : undefined;
    const call: LoggedCall = { method, path: input, body };
    this.calls.push(call);
    const responder = this.routes.get(`${method} ${input}`);
    if (!responder) {
      return jsonResponse(404, { detail: `no stub route for ${method} ${input}` });
    }
    try {
      const payload = await responder(body, call);
      return jsonResponse(200, payload);
    } catch (error) {
      if (error instanceof HttpFailure) {
        return jsonResponse(error.status, { detail: error.detail });
      }
      throw error;
    }
  };
}

function jsonResponse(status: number, payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

// ---------------------------------------------------------------------------
// Payload factories (shapes mirror the service responses).

export function feature(
  name: string,
  domain: FeatureSpec["domain"],
  group: string,
  mutability: FeatureSpec["mutability"],
): FeatureSpec {
  return { name, group, domain, mutability };
}

export function schemaPayload(): SchemaResponse {
  return {
    digest: "digest-1",
    features: [
      feature("age", { type: "continuous", min: 20, max: 80, units: "years" }, "demographic", "fixed"),
      feature("smoking", { type: "binary" }, "lifestyle", "intervenable"),
      feature(
        "activity",
        { type: "ordinal", levels: 5, level_names: ["none", "rare", "weekly", "often", "daily"] },
        "lifestyle",
        "intervenable",
      ),
      feature("marker", { type: "continuous", min: 0, max: 200, units: "U/L" }, "lab", "simulated"),
    ],
  };
}

export function diseasesPayload(): { diseases: { code: string; name: string }[] } {
  return {
    diseases: [
      { code: "E11", name: "Type 2 diabetes mellitus" },
      { code: "I10", name: "Essential hypertension" },
    ],
  };
}

export function riskEntry(disease: string, name: string, risk: number): RiskEntry {
  return {
    disease,
    name,
    risk,
    nearest_diseased: 1,
    nearest_healthy: 0,
    neighborhood: {
      radius: 2.5,
      members: [
        { index: 0, distance: 1.0, diseased: false },
        { index: 1, distance: 2.0, diseased: true },
      ],
    },
  };
}

export function riskPayload(entries: RiskEntry[], warnings: string[] = []): RiskResponse {
  return { id: "explorer", risks: entries, warnings };
}

export function twinPayload(overrides: Partial<TwinPayload> = {}): TwinPayload {
  return {
    base_id: "explorer",
    prototype_index: 0,
    prototype_class: "healthy",
    assignments: {},
    values: { age: 50, smoking: 0, activity: 3, marker: 88.25 },
    risk_before: 0.6,
    risk_after: 0.35,
    ...overrides,
  };
}

export function comparisonRows(): ComparisonRow[] {
  return [
    { feature: "age", group: "demographic", mutability: "fixed", individual: 50, healthy_twin: 50, diseased_twin: 50 },
    { feature: "smoking", group: "lifestyle", mutability: "intervenable", individual: 1, healthy_twin: 0, diseased_twin: 1 },
    { feature: "activity", group: "lifestyle", mutability: "intervenable", individual: 1, healthy_twin: 4, diseased_twin: 0 },
    { feature: "marker", group: "lab", mutability: "simulated", individual: 120.5, healthy_twin: 84.75, diseased_twin: 141.125 },
  ];
}

export function explainPayload(overrides: Partial<ExplainResponse> = {}): ExplainResponse {
  return {
    disease: "E11",
    name: "Type 2 diabetes mellitus",
    risk: 0.61,
    nearest_healthy: 0,
    nearest_diseased: 1,
    healthy_profile: { age: 48, smoking: 0, activity: 4, marker: 80 },
    diseased_profile: { age: 63, smoking: 1, activity: 1, marker: 150 },
    healthy_twin: twinPayload({ prototype_class: "healthy" }),
    diseased_twin: twinPayload({ prototype_class: "diseased", prototype_index: 1, risk_after: 0.8 }),
    comparison: comparisonRows(),
    ...overrides,
  };
}

export function planStep(
  feature_: string,
  from: number,
  to: number,
  riskBefore: number,
  riskAfter: number,
): PlanStep {
  return {
    feature: feature_,
    from_value: from,
    to_value: to,
    risk_before: riskBefore,
    risk_after: riskAfter,
    values: { age: 50, smoking: 0, activity: to, marker: 90.5 },
  };
}

export function planPayload(overrides: Partial<PlanResponse> = {}): PlanResponse {
  return {
    disease: "E11",
    target_prototype: 0,
    target_lifestyle: { smoking: 0, activity: 4 },
    initial_risk: 0.9,
    final_risk: 0.4,
    stop_reason: "no-improvement",
    steps: [
      planStep("smoking", 1, 0, 0.9, 0.7),
      planStep("activity", 1, 2, 0.7, 0.55),
      planStep("activity", 2, 3, 0.55, 0.4),
    ],
    ...overrides,
  };
}

// ---------------------------------------------------------------------------
// A ready-to-use session over the stub with sensible default routes.

export interface Rig {
  stub: StubApi;
  session: Session;
  store: Store;
}

export function makeRig(): Rig {
  const stub = new StubApi();
  stub.on("GET", "/v1/schema", () => schemaPayload());
  stub.on("GET", "/v1/diseases", () => diseasesPayload());
  stub.on("POST", "/v1/risk", () =>
    riskPayload([riskEntry("E11", "Type 2 diabetes mellitus", 0.61), riskEntry("I10", "Essential hypertension", 0.34)]),
  );
  stub.on("POST", "/v1/explain", () => explainPayload());
  stub.on("POST", "/v1/simulate", (body) => {
    const assignments = (body as { assignments: Record<string, number> }).assignments;
    return twinPayload({ assignments });
  });
  stub.on("POST", "/v1/plan", () => planPayload());
  const store = new Store();
  const session = new Session(new ApiClient("", stub.fetch), store);
  return { stub, session, store };
}

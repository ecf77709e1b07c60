/** Single-session state container with change notification. */

import type {
  DiseaseInfo,
  ExplainResponse,
  PlanResponse,
  RiskResponse,
  SchemaResponse,
  TwinPayload,
} from "./types.js";

export interface SessionState {
  schema: SchemaResponse | null;
  diseases: DiseaseInfo[];
  /** Current individual form values, keyed by feature name. */
  form: Record<string, number>;
  individualId: string;
  selectedDisease: string | null;
  /** Latest applied responses; stale ones never land here. */
  report: RiskResponse | null;
  explain: ExplainResponse | null;
  plan: PlanResponse | null;
  /** Pending what-if assignments (feature -> value). */
  whatIf: Record<string, number>;
  /** Latest applied what-if simulation result. */
  whatIfTwin: TwinPayload | null;
  /** Stepper cursor: -1 = overview, 0..steps.length-1 = that step. */
  planCursor: number;
  /** Inline error message, if the last request failed. */
  error: string | null;
  busy: boolean;
}

export function initialState(): SessionState {
  return {
    schema: null,
    diseases: [],
    form: {},
    individualId: "explorer",
    selectedDisease: null,
    report: null,
    explain: null,
    plan: null,
    whatIf: {},
    whatIfTwin: null,
    planCursor: -1,
    error: null,
    busy: false,
  };
}

export type Listener = (state: SessionState) => void;

export class Store {
  private current: SessionState = initialState();
  private listeners: Listener[] = [];

  get state(): SessionState {
    return this.current;
  }

  update(partial: Partial<SessionState>): void {
    this.current = { ...this.current, ...partial };
    for (const listener of this.listeners) {
      listener(this.current);
    }
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }
}

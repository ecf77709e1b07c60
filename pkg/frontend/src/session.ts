/** Session controller: wires the API client to the store.
 *
 * Contracts the views rely on (and the tests pin down):
 * - one submit = one POST /v1/risk; one what-if change = one POST /v1/simulate;
 * - responses are applied through per-endpoint sequence gates, so an answer
 *   that arrives after a newer one has been applied is discarded, never shown;
 * - stepping through a plan is pure cursor movement over the single plan
 *   response — it never re-calls the API;
 * - failures surface as an inline message and leave form values and the
 *   last good responses untouched.
 */

import { ApiClient, ApiError } from "./api.js";
import { defaultForm, validateForm } from "./form.js";
import { LatestGate } from "./seq.js";
import { Store } from "./store.js";
import type { IndividualIn } from "./types.js";

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return error.message;
  }
  return error instanceof Error ? error.message : String(error);
}

export class Session {
  readonly gates = {
    risk: new LatestGate(),
    explain: new LatestGate(),
    simulate: new LatestGate(),
    plan: new LatestGate(),
  };

  private inFlight = 0;

  constructor(
    readonly api: ApiClient,
    readonly store: Store,
  ) {}

  private individual(): IndividualIn {
    const state = this.store.state;
    return { id: state.individualId, values: { ...state.form } };
  }

  private began(): void {
    this.inFlight += 1;
    this.store.update({ busy: true });
  }

  private ended(): void {
    this.inFlight -= 1;
    if (this.inFlight === 0) {
      this.store.update({ busy: false });
    }
  }

  /** Load schema + disease list and populate form defaults. */
  async init(): Promise<void> {
    this.began();
    try {
      const [schema, diseases] = await Promise.all([
        this.api.getSchema(),
        this.api.getDiseases(),
      ]);
      this.store.update({
        schema,
        diseases: diseases.diseases,
        form: defaultForm(schema),
        error: null,
      });
    } catch (error) {
      this.store.update({ error: describe(error) });
    } finally {
      this.ended();
    }
  }

  setFormValue(feature: string, value: number): void {
    this.store.update({ form: { ...this.store.state.form, [feature]: value } });
  }

  /** Submit the form: validates locally (mirror of the served schema),
   * then issues exactly one risk request. */
  async submitRisk(): Promise<void> {
    const { schema, form } = this.store.state;
    if (!schema) {
      this.store.update({ error: "schema not loaded yet" });
      return;
    }
    const problem = validateForm(schema, form);
    if (problem !== null) {
      this.store.update({ error: problem });
      return;
    }
    const seq = this.gates.risk.issue();
    this.began();
    try {
      const report = await this.api.risk(this.individual());
      if (this.gates.risk.accept(seq)) {
        this.store.update({ report, error: null });
      }
    } catch (error) {
      if (this.gates.risk.accept(seq)) {
        this.store.update({ error: describe(error) });
      }
    } finally {
      this.ended();
    }
  }

  /** Open the per-disease explainer; resets what-ifs and any previous plan. */
  async openExplainer(disease: string): Promise<void> {
    const seq = this.gates.explain.issue();
    this.began();
    this.store.update({
      selectedDisease: disease,
      whatIf: {},
      whatIfTwin: null,
      plan: null,
      planCursor: -1,
    });
    try {
      const explain = await this.api.explain(this.individual(), disease);
      if (this.gates.explain.accept(seq)) {
        this.store.update({ explain, error: null });
      }
    } catch (error) {
      if (this.gates.explain.accept(seq)) {
        this.store.update({ error: describe(error) });
      }
    } finally {
      this.ended();
    }
  }

  /** Record one what-if assignment and issue exactly one simulation for it.
   * Rapid toggles may overlap on the wire; the sequence gate guarantees the
   * rendered twin is always from the newest request. */
  async setWhatIf(feature: string, value: number): Promise<void> {
    const state = this.store.state;
    if (!state.selectedDisease) {
      this.store.update({ error: "select a disease before running what-ifs" });
      return;
    }
    const whatIf = { ...state.whatIf, [feature]: value };
    this.store.update({ whatIf });
    const seq = this.gates.simulate.issue();
    this.began();
    try {
      const twin = await this.api.simulate({
        individual: this.individual(),
        disease: state.selectedDisease,
        assignments: whatIf,
      });
      if (this.gates.simulate.accept(seq)) {
        this.store.update({ whatIfTwin: twin, error: null });
      }
    } catch (error) {
      if (this.gates.simulate.accept(seq)) {
        this.store.update({ error: describe(error) });
      }
    } finally {
      this.ended();
    }
  }

  /** Request a stepwise plan for the selected disease (one call; the stepper
   * then only walks the returned payload). */
  async requestPlan(maxSteps = 20): Promise<void> {
    const state = this.store.state;
    if (!state.selectedDisease) {
      this.store.update({ error: "select a disease before planning" });
      return;
    }
    const seq = this.gates.plan.issue();
    this.began();
    try {
      const plan = await this.api.plan({
        individual: this.individual(),
        disease: state.selectedDisease,
        max_steps: maxSteps,
      });
      if (this.gates.plan.accept(seq)) {
        this.store.update({ plan, planCursor: -1, error: null });
      }
    } catch (error) {
      if (this.gates.plan.accept(seq)) {
        this.store.update({ error: describe(error) });
      }
    } finally {
      this.ended();
    }
  }

  /** Pure cursor movement over the already-fetched plan. No API calls. */
  stepForward(): void {
    const { plan, planCursor } = this.store.state;
    if (!plan || plan.steps.length === 0) {
      return;
    }
    this.store.update({ planCursor: Math.min(planCursor + 1, plan.steps.length - 1) });
  }

  stepBack(): void {
    const { plan, planCursor } = this.store.state;
    if (!plan) {
      return;
    }
    this.store.update({ planCursor: Math.max(planCursor - 1, -1) });
  }
}

/** Browser entry point: wires the session controller to the page. */

import { ApiClient } from "./api.js";
import { renderDashboard } from "./dashboard.js";
import { renderExplainer } from "./explainer.js";
import { renderForm } from "./form.js";
import { Session } from "./session.js";
import { Store } from "./store.js";
import { renderStepper } from "./stepper.js";

function apiBase(): string {
  const meta = document.querySelector<HTMLMetaElement>('meta[name="api-base"]');
  return meta?.content ?? "";
}

export function mount(root: HTMLElement, session: Session): void {
  const render = (): void => {
    const state = session.store.state;
    root.replaceChildren();

    const banner = document.createElement("div");
    banner.className = "status-banner";
    if (state.error) {
      banner.classList.add("error");
      banner.textContent = state.error;
    } else if (state.busy) {
      banner.classList.add("busy");
      banner.textContent = "working…";
    }
    root.appendChild(banner);

    const layout = document.createElement("div");
    layout.className = "layout";

    const left = document.createElement("div");
    left.className = "pane pane-form";
    if (state.schema) {
      left.appendChild(
        renderForm(state.schema, state.form, {
          onChange: (feature, value) => session.setFormValue(feature, value),
          onSubmit: () => void session.submitRisk(),
        }),
      );
    } else {
      const loading = document.createElement("p");
      loading.className = "empty-state";
      loading.textContent = "Loading feature schema…";
      left.appendChild(loading);
    }

    const middle = document.createElement("div");
    middle.className = "pane pane-dashboard";
    middle.appendChild(
      renderDashboard(state.report, {
        onSelect: (disease) => void session.openExplainer(disease),
      }),
    );

    const right = document.createElement("div");
    right.className = "pane pane-detail";
    right.appendChild(
      renderExplainer(state.explain, state.whatIfTwin, state.schema, state.form, state.whatIf, {
        onWhatIf: (feature, value) => void session.setWhatIf(feature, value),
        onPlan: () => void session.requestPlan(),
      }),
    );
    right.appendChild(
      renderStepper(state.plan, state.planCursor, {
        onNext: () => session.stepForward(),
        onPrev: () => session.stepBack(),
      }),
    );

    layout.appendChild(left);
    layout.appendChild(middle);
    layout.appendChild(right);
    root.appendChild(layout);
  };

  session.store.subscribe(render);
  render();
}

function start(): void {
  const root = document.getElementById("app");
  if (!root) {
    return;
  }
  const session = new Session(new ApiClient(apiBase()), new Store());
  mount(root, session);
  void session.init();
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  start();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", start);
}

/** Health-plan stepper: walks the steps of one plan response.
 *
 * The plan is a single payload; stepping is pure cursor movement and the
 * trajectory chart plots the payload's risk numbers verbatim (initial risk,
 * then each step's risk-after) — nothing is recomputed client-side.
 */

import type { PlanResponse } from "./types.js";

export interface StepperHandlers {
  onNext: () => void;
  onPrev: () => void;
}

const SVG_NS = "http://www.w3.org/2000/svg";

/** The numbers the chart plots, in order: r0 then each step's risk-after. */
export function trajectory(plan: PlanResponse): number[] {
  return [plan.initial_risk, ...plan.steps.map((step) => step.risk_after)];
}

function trajectoryChart(plan: PlanResponse, cursor: number): SVGSVGElement {
  const points = trajectory(plan);
  const width = 320;
  const height = 96;
  const pad = 8;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("class", "trajectory-chart");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("role", "img");

  const xs = (i: number): number =>
    points.length === 1 ? width / 2 : pad + (i * (width - 2 * pad)) / (points.length - 1);
  const lo = Math.min(...points);
  const hi = Math.max(...points);
  const ys = (r: number): number =>
    hi === lo ? height / 2 : height - pad - ((r - lo) * (height - 2 * pad)) / (hi - lo);

  const line = document.createElementNS(SVG_NS, "polyline");
  line.setAttribute("class", "trajectory-line");
  line.setAttribute("fill", "none");
  line.setAttribute("points", points.map((r, i) => `${xs(i)},${ys(r)}`).join(" "));
  svg.appendChild(line);

  points.forEach((r, i) => {
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("class", i === cursor + 1 ? "trajectory-point current" : "trajectory-point");
    dot.setAttribute("cx", String(xs(i)));
    dot.setAttribute("cy", String(ys(r)));
    dot.setAttribute("r", "3");
    dot.setAttribute("data-risk", String(r));
    dot.setAttribute("data-index", String(i));
    svg.appendChild(dot);
  });
  return svg;
}

function valuesGrid(values: Record<string, number>): HTMLElement {
  const grid = document.createElement("dl");
  grid.className = "twin-values";
  for (const [name, value] of Object.entries(values)) {
    const term = document.createElement("dt");
    term.textContent = name;
    const detail = document.createElement("dd");
    detail.textContent = String(value);
    detail.setAttribute("data-feature", name);
    detail.setAttribute("data-value", String(value));
    grid.appendChild(term);
    grid.appendChild(detail);
  }
  return grid;
}

export function renderStepper(
  plan: PlanResponse | null,
  cursor: number,
  handlers: StepperHandlers,
): HTMLElement {
  const root = document.createElement("section");
  root.className = "stepper";

  const heading = document.createElement("h2");
  heading.textContent = "Health plan";
  root.appendChild(heading);

  if (!plan) {
    const hint = document.createElement("p");
    hint.className = "empty-state";
    hint.textContent = "Request a plan from the explainer to step through it.";
    root.appendChild(hint);
    return root;
  }

  const summary = document.createElement("p");
  summary.className = "plan-summary";
  summary.textContent =
    `${plan.disease}: risk ${plan.initial_risk} → ${plan.final_risk} ` +
    `over ${plan.steps.length} step(s), stopped: ${plan.stop_reason}`;
  summary.setAttribute("data-initial-risk", String(plan.initial_risk));
  summary.setAttribute("data-final-risk", String(plan.final_risk));
  summary.setAttribute("data-stop-reason", plan.stop_reason);
  root.appendChild(summary);

  if (plan.steps.length === 0) {
    const done = document.createElement("p");
    done.className = "target-reached";
    done.textContent = "Already at the target lifestyle — nothing to change.";
    root.appendChild(done);
    return root;
  }

  root.appendChild(trajectoryChart(plan, cursor));

  const controls = document.createElement("div");
  controls.className = "stepper-controls";
  const prev = document.createElement("button");
  prev.type = "button";
  prev.className = "step-prev";
  prev.textContent = "← back";
  prev.disabled = cursor < 0;
  prev.addEventListener("click", () => handlers.onPrev());
  const position = document.createElement("span");
  position.className = "step-position";
  position.textContent = cursor < 0 ? "overview" : `step ${cursor + 1} of ${plan.steps.length}`;
  const next = document.createElement("button");
  next.type = "button";
  next.className = "step-next";
  next.textContent = "next →";
  next.disabled = cursor >= plan.steps.length - 1;
  next.addEventListener("click", () => handlers.onNext());
  controls.appendChild(prev);
  controls.appendChild(position);
  controls.appendChild(next);
  root.appendChild(controls);

  if (cursor >= 0) {
    const step = plan.steps[cursor];
    if (step) {
      const detail = document.createElement("div");
      detail.className = "step-detail";
      const move = document.createElement("p");
      move.className = "step-move";
      move.textContent = `${step.feature}: ${step.from_value} → ${step.to_value}`;
      move.setAttribute("data-feature", step.feature);
      move.setAttribute("data-from", String(step.from_value));
      move.setAttribute("data-to", String(step.to_value));
      const risk = document.createElement("p");
      risk.className = "step-risk";
      risk.textContent = `risk ${step.risk_before} → ${step.risk_after}`;
      risk.setAttribute("data-risk-before", String(step.risk_before));
      risk.setAttribute("data-risk-after", String(step.risk_after));
      detail.appendChild(move);
      detail.appendChild(risk);
      detail.appendChild(valuesGrid(step.values));
      root.appendChild(detail);
    }
  } else {
    const target = document.createElement("p");
    target.className = "plan-target";
    const lifestyle = Object.entries(plan.target_lifestyle)
      .map(([name, value]) => `${name}=${value}`)
      .join(", ");
    target.textContent = `target lifestyle: ${lifestyle || "(unchanged)"}`;
    root.appendChild(target);
  }
  return root;
}

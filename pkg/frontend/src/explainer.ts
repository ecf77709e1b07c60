/** Per-disease explainer: the individual against their healthy and diseased
 * digital twins, plus live what-if controls.
 *
 * Every displayed number is a verbatim payload value (each cell carries the
 * exact value in a data attribute); the view does no risk arithmetic. A
 * missing twin degrades to the columns that are present, with a notice.
 */

import type {
  ComparisonRow,
  ExplainResponse,
  FeatureSpec,
  SchemaResponse,
  TwinPayload,
} from "./types.js";
import { buildControl } from "./form.js";

export interface ExplainerHandlers {
  onWhatIf: (feature: string, value: number) => void;
  onPlan: () => void;
}

function cell(tag: string, className: string, value: number | string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  node.textContent = typeof value === "number" ? String(value) : value;
  if (typeof value === "number") {
    node.setAttribute("data-value", String(value));
  }
  return node;
}

function riskFigure(twin: TwinPayload): HTMLElement {
  const figure = document.createElement("p");
  figure.className = "whatif-risk";
  const before = document.createElement("span");
  before.className = "risk-before";
  before.textContent = String(twin.risk_before);
  before.setAttribute("data-value", String(twin.risk_before));
  const after = document.createElement("span");
  after.className = "risk-after";
  after.textContent = String(twin.risk_after);
  after.setAttribute("data-value", String(twin.risk_after));
  figure.appendChild(document.createTextNode("risk "));
  figure.appendChild(before);
  figure.appendChild(document.createTextNode(" → "));
  figure.appendChild(after);
  return figure;
}

function comparisonTable(rows: ComparisonRow[], columns: Array<"healthy" | "diseased">): HTMLElement {
  const table = document.createElement("table");
  table.className = "comparison-table";
  const head = document.createElement("tr");
  head.appendChild(cell("th", "col-feature", "feature"));
  head.appendChild(cell("th", "col-individual", "you"));
  if (columns.includes("healthy")) {
    head.appendChild(cell("th", "col-healthy", "healthy twin"));
  }
  if (columns.includes("diseased")) {
    head.appendChild(cell("th", "col-diseased", "diseased twin"));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = document.createElement("tr");
    tr.className = `comparison-row mutability-${row.mutability}`;
    tr.setAttribute("data-feature", row.feature);
    tr.appendChild(cell("td", "col-feature", row.feature));
    tr.appendChild(cell("td", "col-individual", row.individual));
    if (columns.includes("healthy")) {
      tr.appendChild(cell("td", "col-healthy", row.healthy_twin));
    }
    if (columns.includes("diseased")) {
      tr.appendChild(cell("td", "col-diseased", row.diseased_twin));
    }
    table.appendChild(tr);
  }
  return table;
}

function whatIfControls(
  schema: SchemaResponse,
  form: Record<string, number>,
  whatIf: Record<string, number>,
  handlers: ExplainerHandlers,
): HTMLElement {
  const panel = document.createElement("div");
  panel.className = "whatif-controls";
  const heading = document.createElement("h3");
  heading.textContent = "What if…";
  panel.appendChild(heading);
  const intervenable: FeatureSpec[] = schema.features.filter(
    (spec) => spec.mutability === "intervenable",
  );
  for (const spec of intervenable) {
    const row = document.createElement("label");
    row.className = "whatif-row";
    const caption = document.createElement("span");
    caption.textContent = spec.name;
    row.appendChild(caption);
    const current = whatIf[spec.name] ?? form[spec.name] ?? 0;
    row.appendChild(buildControl(spec, current, handlers.onWhatIf));
    panel.appendChild(row);
  }
  return panel;
}

export function renderExplainer(
  explain: ExplainResponse | null,
  whatIfTwin: TwinPayload | null,
  schema: SchemaResponse | null,
  form: Record<string, number>,
  whatIf: Record<string, number>,
  handlers: ExplainerHandlers,
): HTMLElement {
  const root = document.createElement("section");
  root.className = "explainer";

  if (!explain) {
    const hint = document.createElement("p");
    hint.className = "empty-state";
    hint.textContent = "Pick a disease from the dashboard to see its explanation.";
    root.appendChild(hint);
    return root;
  }

  const heading = document.createElement("h2");
  heading.textContent = `${explain.disease} · ${explain.name}`;
  root.appendChild(heading);

  const risk = document.createElement("p");
  risk.className = "explain-risk";
  risk.textContent = `current risk ${explain.risk}`;
  risk.setAttribute("data-value", String(explain.risk));
  root.appendChild(risk);

  const columns: Array<"healthy" | "diseased"> = [];
  if (explain.healthy_twin) {
    columns.push("healthy");
  }
  if (explain.diseased_twin) {
    columns.push("diseased");
  }
  if (columns.length < 2) {
    const notice = document.createElement("p");
    notice.className = "degraded-notice";
    notice.textContent =
      columns.length === 0
        ? "No twin simulations available; showing your values only."
        : `Only the ${columns[0]} twin is available; showing a reduced comparison.`;
    root.appendChild(notice);
  }
  root.appendChild(comparisonTable(explain.comparison, columns));

  if (schema) {
    root.appendChild(whatIfControls(schema, form, whatIf, handlers));
  }

  const simulated = whatIfTwin ?? explain.healthy_twin;
  if (simulated) {
    root.appendChild(riskFigure(simulated));
  }

  const planButton = document.createElement("button");
  planButton.type = "button";
  planButton.className = "request-plan";
  planButton.textContent = "Build a health plan";
  planButton.addEventListener("click", () => handlers.onPlan());
  root.appendChild(planButton);
  return root;
}

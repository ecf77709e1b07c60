/** Risk dashboard: one row per disease, rendered in the exact order the
 * server returned them (the service already ranks by descending risk; the
 * view never re-sorts or recomputes anything). */

import type { RiskResponse } from "./types.js";

export interface DashboardHandlers {
  onSelect: (disease: string) => void;
}

function riskBar(risk: number): HTMLElement {
  const bar = document.createElement("div");
  bar.className = "risk-bar";
  const fill = document.createElement("div");
  fill.className = "risk-bar-fill";
  fill.style.width = `${Math.max(0, Math.min(1, risk)) * 100}%`;
  bar.appendChild(fill);
  return bar;
}

export function renderDashboard(
  report: RiskResponse | null,
  handlers: DashboardHandlers,
): HTMLElement {
  const root = document.createElement("section");
  root.className = "dashboard";

  const heading = document.createElement("h2");
  heading.textContent = "Disease risks";
  root.appendChild(heading);

  if (!report || report.risks.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = report
      ? "No disease models answered for this individual."
      : "Enter an individual and compute risks to see the dashboard.";
    root.appendChild(empty);
    return root;
  }

  const list = document.createElement("ol");
  list.className = "risk-list";
  report.risks.forEach((entry, position) => {
    const row = document.createElement("li");
    row.className = "risk-row";
    row.setAttribute("data-disease", entry.disease);
    row.setAttribute("data-risk", String(entry.risk));
    row.setAttribute("data-position", String(position));
    row.tabIndex = 0;

    const code = document.createElement("span");
    code.className = "disease-code";
    code.textContent = entry.disease;

    const name = document.createElement("span");
    name.className = "disease-name";
    name.textContent = entry.name;

    const value = document.createElement("span");
    value.className = "risk-value";
    value.textContent = entry.risk.toFixed(3);

    row.appendChild(code);
    row.appendChild(name);
    row.appendChild(riskBar(entry.risk));
    row.appendChild(value);
    row.addEventListener("click", () => handlers.onSelect(entry.disease));
    list.appendChild(row);
  });
  root.appendChild(list);

  if (report.warnings.length > 0) {
    const warnings = document.createElement("ul");
    warnings.className = "report-warnings";
    for (const text of report.warnings) {
      const item = document.createElement("li");
      item.textContent = text;
      warnings.appendChild(item);
    }
    root.appendChild(warnings);
  }
  return root;
}

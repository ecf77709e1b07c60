/** Schema-driven form: controls, defaults, and validation are generated
 * from GET /v1/schema — no feature names are hardcoded anywhere.
 *
 * Validation mirrors the service's domain checks so any value the form
 * accepts is accepted by the API.
 */

import type { Domain, FeatureSpec, SchemaResponse } from "./types.js";

/** Error description if the value violates the feature's domain, else null. */
export function validateValue(spec: FeatureSpec, v: number): string | null {
  if (!Number.isFinite(v)) {
    return `non-finite value ${v}`;
  }
  const d = spec.domain;
  if (d.type === "continuous") {
    if (v < d.min || v > d.max) {
      return `value ${v} outside [${d.min}, ${d.max}]`;
    }
  } else if (d.type === "ordinal") {
    if (!Number.isInteger(v)) {
      return `ordinal value ${v} is not an integer level index`;
    }
    if (v < 0 || v >= d.levels) {
      return `ordinal level ${v} outside [0, ${d.levels - 1}]`;
    }
  } else {
    if (v !== 0 && v !== 1) {
      return `binary value ${v} not in {0, 1}`;
    }
  }
  return null;
}

/** A valid starting value for a feature: domain midpoint / first level. */
export function defaultValue(spec: FeatureSpec): number {
  const d = spec.domain;
  if (d.type === "continuous") {
    return (d.min + d.max) / 2;
  }
  return 0;
}

export function defaultForm(schema: SchemaResponse): Record<string, number> {
  const values: Record<string, number> = {};
  for (const spec of schema.features) {
    values[spec.name] = defaultValue(spec);
  }
  return values;
}

/** First domain violation across the whole form, else null. */
export function validateForm(
  schema: SchemaResponse,
  values: Record<string, number>,
): string | null {
  for (const spec of schema.features) {
    const v = values[spec.name];
    if (v === undefined) {
      return `${spec.name}: missing feature value`;
    }
    const problem = validateValue(spec, v);
    if (problem !== null) {
      return `${spec.name}: ${problem}`;
    }
  }
  return null;
}

function domainHint(d: Domain): string {
  if (d.type === "continuous") {
    return d.units ? `${d.min}–${d.max} ${d.units}` : `${d.min}–${d.max}`;
  }
  if (d.type === "ordinal") {
    return d.level_names ? d.level_names.join(" / ") : `levels 0–${d.levels - 1}`;
  }
  return "no / yes";
}

export interface FormHandlers {
  onChange: (feature: string, value: number) => void;
  onSubmit: () => void;
}

/** One labeled control per feature, matching the feature's domain. */
export function buildControl(
  spec: FeatureSpec,
  value: number,
  onChange: (feature: string, value: number) => void,
): HTMLElement {
  const d = spec.domain;
  let control: HTMLElement;
  if (d.type === "continuous") {
    const input = document.createElement("input");
    input.type = "number";
    input.min = String(d.min);
    input.max = String(d.max);
    input.step = "any";
    input.value = String(value);
    input.addEventListener("change", () => onChange(spec.name, Number(input.value)));
    control = input;
  } else if (d.type === "ordinal") {
    const select = document.createElement("select");
    for (let level = 0; level < d.levels; level += 1) {
      const option = document.createElement("option");
      option.value = String(level);
      option.textContent = d.level_names?.[level] ?? String(level);
      if (level === value) {
        option.selected = true;
      }
      select.appendChild(option);
    }
    select.addEventListener("change", () => onChange(spec.name, Number(select.value)));
    control = select;
  } else {
    const input = document.createElement("input");
    input.type = "checkbox";
    input.checked = value === 1;
    input.addEventListener("change", () => onChange(spec.name, input.checked ? 1 : 0));
    control = input;
  }
  control.setAttribute("data-feature", spec.name);
  return control;
}

export function renderForm(
  schema: SchemaResponse,
  values: Record<string, number>,
  handlers: FormHandlers,
): HTMLElement {
  const root = document.createElement("form");
  root.className = "individual-form";
  root.addEventListener("submit", (event) => {
    event.preventDefault();
    handlers.onSubmit();
  });

  const groups = new Map<string, HTMLElement>();
  for (const spec of schema.features) {
    let section = groups.get(spec.group);
    if (!section) {
      section = document.createElement("fieldset");
      section.className = `form-group group-${spec.group}`;
      const legend = document.createElement("legend");
      legend.textContent = spec.group;
      section.appendChild(legend);
      groups.set(spec.group, section);
      root.appendChild(section);
    }
    const row = document.createElement("label");
    row.className = `form-row mutability-${spec.mutability}`;
    const caption = document.createElement("span");
    caption.className = "feature-name";
    caption.textContent = spec.name;
    const hint = document.createElement("span");
    hint.className = "feature-hint";
    hint.textContent = domainHint(spec.domain);
    row.appendChild(caption);
    row.appendChild(buildControl(spec, values[spec.name] ?? defaultValue(spec), handlers.onChange));
    row.appendChild(hint);
    section.appendChild(row);
  }

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.className = "submit-risk";
  submit.textContent = "Compute risks";
  root.appendChild(submit);
  return root;
}

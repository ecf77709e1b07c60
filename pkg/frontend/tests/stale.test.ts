import { describe, expect, it } from "vitest";

import { renderDashboard } from "../src/dashboard.js";
import { renderExplainer } from "../src/explainer.js";
import { Deferred, flush, makeRig, riskEntry, riskPayload, twinPayload } from "./stub.js";
import type { RiskResponse, TwinPayload } from "../src/types.js";

describe("stale responses are never rendered", () => {
  it("discards an older simulate answer that arrives after a newer one", async () => {
    const { stub, session, store } = makeRig();
    await session.init();
    await session.submitRisk();
    await session.openExplainer("E11");

    const first = new Deferred<TwinPayload>();
    const second = new Deferred<TwinPayload>();
    const pending = [first, second];
    stub.on("POST", "/v1/simulate", () => pending.shift()!.promise);

    const call1 = session.setWhatIf("smoking", 0);
    const call2 = session.setWhatIf("activity", 4);
    expect(stub.countOf("POST", "/v1/simulate")).toBe(2);

    // Newer request answers first…
    second.resolve(twinPayload({ risk_after: 0.2, assignments: { smoking: 0, activity: 4 } }));
    await flush();
    expect(store.state.whatIfTwin?.risk_after).toBe(0.2);

    // …then the older answer lands and must be dropped.
    first.resolve(twinPayload({ risk_after: 0.9, assignments: { smoking: 0 } }));
    await Promise.all([call1, call2]);

    expect(store.state.whatIfTwin?.risk_after).toBe(0.2);
    expect(store.state.whatIfTwin?.assignments).toEqual({ smoking: 0, activity: 4 });

    const view = renderExplainer(
      store.state.explain,
      store.state.whatIfTwin,
      store.state.schema,
      store.state.form,
      store.state.whatIf,
      { onWhatIf: () => undefined, onPlan: () => undefined },
    );
    expect(view.querySelector(".risk-after")?.getAttribute("data-value")).toBe("0.2");
  });

  it("keeps the newest risk report when an older response is delivered last", async () => {
    const { stub, session, store } = makeRig();
    await session.init();

    const older = new Deferred<RiskResponse>();
    const newer = new Deferred<RiskResponse>();
    const pending = [older, newer];
    stub.on("POST", "/v1/risk", () => pending.shift()!.promise);

    const submit1 = session.submitRisk();
    session.setFormValue("age", 75);
    const submit2 = session.submitRisk();
    expect(stub.countOf("POST", "/v1/risk")).toBe(2);

    newer.resolve(riskPayload([riskEntry("I10", "Essential hypertension", 0.8)]));
    await flush();
    older.resolve(riskPayload([riskEntry("E11", "Type 2 diabetes mellitus", 0.3)]));
    await Promise.all([submit1, submit2]);

    expect(store.state.report?.risks.map((entry) => entry.disease)).toEqual(["I10"]);

    const rows = [...renderDashboard(store.state.report, { onSelect: () => undefined })
      .querySelectorAll(".risk-row")];
    expect(rows.map((row) => row.getAttribute("data-disease"))).toEqual(["I10"]);
  });

  it("applies responses normally when they arrive in order", async () => {
    const { session, store } = makeRig();
    await session.init();
    await session.submitRisk();
    await session.openExplainer("E11");

    await session.setWhatIf("smoking", 0);
    expect(store.state.whatIfTwin?.assignments).toEqual({ smoking: 0 });
    await session.setWhatIf("activity", 2);
    expect(store.state.whatIfTwin?.assignments).toEqual({ smoking: 0, activity: 2 });
  });
});

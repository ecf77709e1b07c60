import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from protopal.api import create_app
from protopal.bundle import bundle_from_models, save_bundle
from protopal.planner import PlanConfig, plan
from protopal.risk import risk_report
from protopal.twins import make_full_twins, simulate


@pytest.fixture(scope="module")
def served(tmp_path_factory, demo_cohort, e11_model):
    bundle = bundle_from_models(demo_cohort.schema, [e11_model])
    path = tmp_path_factory.mktemp("bundles") / "serve.bundle.json"
    save_bundle(bundle, path)
    app = create_app(str(path))
    with TestClient(app) as client:
        yield client, bundle, str(path)


def _raw_values(individual, schema) -> dict[str, float]:
    return {name: float(v) for name, v in zip(schema.names, individual.values)}


class TestSchemaAndDiseases:
    def test_schema_endpoint(self, served, demo_cohort):
        client, bundle, _ = served
        resp = client.get("/v1/schema")
        assert resp.status_code == 200
        body = resp.json()
        assert body["digest"] == demo_cohort.schema.digest()
        names = [f["name"] for f in body["features"]]
        assert names == list(demo_cohort.schema.names)
        for f in body["features"]:
            assert set(f) == {"name", "group", "domain", "mutability"}

    def test_diseases_endpoint(self, served):
        client, _, _ = served
        body = client.get("/v1/diseases").json()
        assert body == {"diseases": [{"code": "E11", "name": "E11"}]}


class TestRisk:
    def test_parity_with_in_process_report(self, served, demo_cohort, e11_model):
        client, _, _ = served
        schema = demo_cohort.schema
        for ind in demo_cohort.individuals[:20]:
            resp = client.post("/v1/risk", json={
                "individual": {"id": ind.id, "values": _raw_values(ind, schema)}})
            assert resp.status_code == 200
            body = resp.json()
            want = risk_report(ind, schema, [e11_model])
            assert body["id"] == ind.id
            assert len(body["risks"]) == len(want.entries)
            for got, entry in zip(body["risks"], want.entries):
                assert got["disease"] == entry.disease
                assert got["risk"] == pytest.approx(entry.risk, abs=1e-15)
                assert got["nearest_diseased"] == entry.nearest_diseased
                assert got["nearest_healthy"] == entry.nearest_healthy
                assert got["neighborhood"]["radius"] == pytest.approx(
                    entry.neighborhood.radius, abs=1e-15)
                member_idx = [m["index"] for m in got["neighborhood"]["members"]]
                assert member_idx == list(entry.neighborhood.indices)

    def test_missing_and_unknown_fields_are_reported_per_field(self, served, demo_cohort):
        client, _, _ = served
        schema = demo_cohort.schema
        values = _raw_values(demo_cohort.individuals[0], schema)
        del values["age"]
        values["shoe_size"] = 42.0
        resp = client.post("/v1/risk", json={"individual": {"values": values}})
        assert resp.status_code == 400
        detail = resp.json()["detail"]
        problems = {(d["field"], d["message"]) for d in detail}
        assert ("age", "missing feature value") in problems
        assert ("shoe_size", "unknown feature") in problems

    def test_out_of_domain_value_rejected_with_field(self, served, demo_cohort):
        client, _, _ = served
        schema = demo_cohort.schema
        values = _raw_values(demo_cohort.individuals[0], schema)
        values["activity"] = 17.0  # ordinal with 5 levels
        resp = client.post("/v1/risk", json={"individual": {"values": values}})
        assert resp.status_code == 400
        assert any(d["field"] == "activity" for d in resp.json()["detail"])

    def test_malformed_body_is_400_not_422(self, served):
        client, _, _ = served
        resp = client.post("/v1/risk", json={"individual": {"values": "nope"}})
        assert resp.status_code == 400
        resp = client.post("/v1/risk", json={})
        assert resp.status_code == 400


class TestExplain:
    def test_parity_with_in_process_twins(self, served, demo_cohort, e11_model):
        client, _, _ = served
        schema = demo_cohort.schema
        ind = demo_cohort.individuals[4]
        resp = client.post("/v1/explain", json={
            "individual": {"id": ind.id, "values": _raw_values(ind, schema)},
            "disease": "E11"})
        assert resp.status_code == 200
        body = resp.json()
        healthy, diseased = make_full_twins(ind, e11_model, schema)
        assert body["nearest_healthy"] == healthy.prototype_index
        assert body["nearest_diseased"] == diseased.prototype_index
        assert body["healthy_twin"]["risk_after"] == pytest.approx(
            healthy.risk_after, abs=1e-15)
        assert body["diseased_twin"]["risk_after"] == pytest.approx(
            diseased.risk_after, abs=1e-15)
        got_vals = body["healthy_twin"]["values"]
        for j, name in enumerate(schema.names):
            assert got_vals[name] == pytest.approx(float(healthy.values[j]), abs=1e-15)
        assert len(body["comparison"]) == len(schema)
        row = body["comparison"][0]
        assert set(row) == {"feature", "group", "mutability", "individual",
                            "healthy_twin", "diseased_twin"}

    def test_unknown_disease_404(self, served, demo_cohort):
        client, _, _ = served
        values = _raw_values(demo_cohort.individuals[0], demo_cohort.schema)
        resp = client.post("/v1/explain", json={
            "individual": {"values": values}, "disease": "Z99"})
        assert resp.status_code == 404


class TestSimulate:
    def test_parity_and_explicit_prototype(self, served, demo_cohort, e11_model):
        client, _, _ = served
        schema = demo_cohort.schema
        ind = demo_cohort.individuals[7]
        resp = client.post("/v1/simulate", json={
            "individual": {"id": ind.id, "values": _raw_values(ind, schema)},
            "disease": "E11", "assignments": {"activity": 4.0},
            "prototype_index": 1})
        assert resp.status_code == 200
        body = resp.json()
        want = simulate(ind, {"activity": 4.0}, 1, e11_model, schema)
        assert body["prototype_index"] == 1
        assert body["risk_after"] == pytest.approx(want.risk_after, abs=1e-15)
        for j, name in enumerate(schema.names):
            assert body["values"][name] == pytest.approx(float(want.values[j]), abs=1e-15)

    def test_default_prototype_is_nearest_healthy(self, served, demo_cohort, e11_model):
        client, _, _ = served
        schema = demo_cohort.schema
        ind = demo_cohort.individuals[9]
        resp = client.post("/v1/simulate", json={
            "individual": {"values": _raw_values(ind, schema)},
            "disease": "E11"})
        assert resp.status_code == 200
        z = e11_model.standardizer.apply(ind.values)
        want_idx = e11_model.prototype_set.nearest_of_class(z, "healthy")
        assert resp.json()["prototype_index"] == want_idx

    def test_bad_assignment_400(self, served, demo_cohort):
        client, _, _ = served
        values = _raw_values(demo_cohort.individuals[0], demo_cohort.schema)
        resp = client.post("/v1/simulate", json={
            "individual": {"values": values}, "disease": "E11",
            "assignments": {"age": 30.0}})
        assert resp.status_code == 400
        assert "age" in resp.json()["detail"]


class TestPlan:
    def test_parity_with_in_process_plan(self, served, demo_cohort, e11_model):
        client, _, _ = served
        schema = demo_cohort.schema
        ind = demo_cohort.individuals[11]
        resp = client.post("/v1/plan", json={
            "individual": {"values": _raw_values(ind, schema)},
            "disease": "E11", "stop_policy": "exhaust-all", "max_steps": 5})
        assert resp.status_code == 200
        body = resp.json()
        want = plan(ind, e11_model, schema,
                    PlanConfig(stop_policy="exhaust-all", max_steps=5))
        assert body["stop_reason"] == want.stop_reason
        assert body["target_prototype"] == want.target_prototype
        assert body["initial_risk"] == pytest.approx(want.initial_risk, abs=1e-15)
        assert body["final_risk"] == pytest.approx(want.final_risk, abs=1e-15)
        assert len(body["steps"]) == len(want.steps)
        for got, step in zip(body["steps"], want.steps):
            assert got["feature"] == step.move.feature
            assert got["to_value"] == step.move.to_value
            assert got["risk_after"] == pytest.approx(step.risk_after, abs=1e-15)

    def test_bad_policy_400(self, served, demo_cohort):
        client, _, _ = served
        values = _raw_values(demo_cohort.individuals[0], demo_cohort.schema)
        resp = client.post("/v1/plan", json={
            "individual": {"values": values}, "disease": "E11",
            "stop_policy": "whenever"})
        assert resp.status_code == 400


class TestPrototypes:
    def test_rows_match_export(self, served, demo_cohort, e11_model):
        client, _, _ = served
        resp = client.get("/v1/prototypes/E11", params={"features": "bmi,glucose"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["features"] == ["bmi", "glucose"]
        from protopal.evaluation import export_prototype_trends
        want = export_prototype_trends(e11_model, ["bmi", "glucose"],
                                       demo_cohort.schema)
        assert len(body["rows"]) == len(want.rows)
        for got, row in zip(body["rows"], want.rows):
            assert got["class"] == row["class"]
            assert got["bmi"] == pytest.approx(row["bmi"], abs=1e-15)

    def test_defaults_to_all_features(self, served, demo_cohort):
        client, _, _ = served
        body = client.get("/v1/prototypes/E11").json()
        assert body["features"] == list(demo_cohort.schema.names)

    def test_unknown_feature_400_unknown_disease_404(self, served):
        client, _, _ = served
        assert client.get("/v1/prototypes/E11",
                          params={"features": "nope"}).status_code == 400
        assert client.get("/v1/prototypes/Z99").status_code == 404


class TestReload:
    def test_reload_swaps_to_new_bundle(self, tmp_path, demo_cohort, e11_model):
        bundle = bundle_from_models(demo_cohort.schema, [e11_model])
        path = tmp_path / "live.bundle.json"
        save_bundle(bundle, path)
        app = create_app(str(path))
        with TestClient(app) as client:
            before = client.get("/v1/diseases").json()["diseases"]
            assert [d["code"] for d in before] == ["E11"]

            # write a renamed model to the same path, then reload in place
            import dataclasses
            renamed = dataclasses.replace(e11_model, name="type 2 diabetes")
            save_bundle(bundle_from_models(demo_cohort.schema, [renamed]), path)
            resp = client.post("/v1/reload", json={})
            assert resp.status_code == 200
            assert resp.json()["ok"] is True
            after = client.get("/v1/diseases").json()["diseases"]
            assert after == [{"code": "E11", "name": "type 2 diabetes"}]

    def test_reload_from_explicit_path(self, tmp_path, demo_cohort, e11_model):
        bundle = bundle_from_models(demo_cohort.schema, [e11_model])
        p1 = tmp_path / "one.bundle.json"
        p2 = tmp_path / "two.bundle.json"
        save_bundle(bundle, p1)
        import dataclasses
        other = dataclasses.replace(e11_model, disease="E11X")
        save_bundle(bundle_from_models(demo_cohort.schema, [other]), p2)
        app = create_app(str(p1))
        with TestClient(app) as client:
            resp = client.post("/v1/reload", json={"bundle_path": str(p2)})
            assert resp.status_code == 200
            assert resp.json()["diseases"] == ["E11X"]
            # the remembered path moves with the reload
            resp = client.post("/v1/reload", json={})
            assert resp.json()["bundle_path"] == str(p2)

    def test_reload_failure_keeps_old_snapshot(self, tmp_path, demo_cohort, e11_model):
        bundle = bundle_from_models(demo_cohort.schema, [e11_model])
        path = tmp_path / "live.bundle.json"
        save_bundle(bundle, path)
        app = create_app(str(path))
        with TestClient(app) as client:
            path.write_text("{broken", encoding="utf-8")
            resp = client.post("/v1/reload", json={})
            assert resp.status_code == 400
            # service still answers from the old snapshot
            assert client.get("/v1/diseases").status_code == 200

    def test_reload_without_any_path_400(self, demo_cohort, e11_model):
        bundle = bundle_from_models(demo_cohort.schema, [e11_model])
        app = create_app(bundle)  # constructed from an in-memory bundle, no path
        with TestClient(app) as client:
            resp = client.post("/v1/reload", json={})
            assert resp.status_code == 400

"""HTTP/JSON service over a trained model bundle.

All handlers read one immutable snapshot reference at entry, so concurrent
requests always see a consistent bundle; POST /v1/reload builds a complete
new snapshot first and then swaps it in with a single attribute assignment.
Individuals arrive in raw clinical units and are standardized internally.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..bundle import ModelBundle, load_bundle
from ..errors import BundleError, InterventionError, ProtoPalError, SchemaError
from ..evaluation import export_prototype_trends
from ..lvq import TrainedDiseaseModel
from ..planner import HealthPlan, PlanConfig, plan
from ..risk import RiskEntry, risk_report, risk_score
from ..schema import HEALTHY, FeatureSchema, Individual
from ..twins import DigitalTwin, make_full_twins, simulate


class IndividualIn(BaseModel):
    id: str = "anonymous"
    values: dict[str, float]


class RiskRequest(BaseModel):
    individual: IndividualIn


class ExplainRequest(BaseModel):
    individual: IndividualIn
    disease: str


class SimulateRequest(BaseModel):
    individual: IndividualIn
    disease: str
    assignments: dict[str, float] = Field(default_factory=dict)
    prototype_index: int | None = None


class PlanRequest(BaseModel):
    individual: IndividualIn
    disease: str
    stop_policy: str = "no-improvement"
    max_steps: int = 20


class ReloadRequest(BaseModel):
    bundle_path: str | None = None


class Snapshot:
    """One immutable serving state: bundle plus lookups derived from it."""

    def __init__(self, bundle: ModelBundle, path: str | None):
        self.bundle = bundle
        self.path = path
        self.schema = bundle.schema
        self.digest = bundle.schema.digest()
        self.models = {m.disease: m for m in bundle.models}


def _individual_from(body: IndividualIn, schema: FeatureSchema) -> Individual:
    detail = []
    for name in schema.names:
        if name not in body.values:
            detail.append({"field": name, "message": "missing feature value"})
    for name in body.values:
        if name not in schema.names:
            detail.append({"field": name, "message": "unknown feature"})
    if detail:
        raise HTTPException(status_code=400, detail=detail)
    values = np.empty(len(schema))
    for j, spec in enumerate(schema.specs):
        v = float(body.values[spec.name])
        problem = spec.check_value(v)
        if problem is not None:
            detail.append({"field": spec.name, "message": problem})
        values[j] = v
    if detail:
        raise HTTPException(status_code=400, detail=detail)
    return Individual(id=body.id, values=values)


def _values_obj(values: np.ndarray, schema: FeatureSchema) -> dict[str, float]:
    return {name: float(v) for name, v in zip(schema.names, values)}


def _entry_obj(e: RiskEntry) -> dict:
    return {
        "disease": e.disease,
        "name": e.name,
        "risk": e.risk,
        "nearest_diseased": e.nearest_diseased,
        "nearest_healthy": e.nearest_healthy,
        "neighborhood": {
            "radius": e.neighborhood.radius,
            "members": [
                {"index": i, "distance": d, "diseased": flag}
                for i, d, flag in zip(e.neighborhood.indices, e.neighborhood.distances,
                                      e.neighborhood.diseased)
            ],
        },
    }


def _twin_obj(twin: DigitalTwin, schema: FeatureSchema) -> dict:
    return {
        "base_id": twin.base_id,
        "prototype_index": twin.prototype_index,
        "prototype_class": twin.prototype_class,
        "assignments": dict(twin.assignments),
        "values": _values_obj(twin.values, schema),
        "risk_before": twin.risk_before,
        "risk_after": twin.risk_after,
    }


def _plan_obj(p: HealthPlan, schema: FeatureSchema) -> dict:
    return {
        "disease": p.disease,
        "target_prototype": p.target_prototype,
        "target_lifestyle": dict(p.target_lifestyle),
        "initial_risk": p.initial_risk,
        "final_risk": p.final_risk,
        "stop_reason": p.stop_reason,
        "steps": [
            {
                "feature": s.move.feature,
                "from_value": s.move.from_value,
                "to_value": s.move.to_value,
                "risk_before": s.risk_before,
                "risk_after": s.risk_after,
                "values": _values_obj(s.twin.values, schema),
            }
            for s in p.steps
        ],
    }


def _model_or_404(snap: Snapshot, disease: str) -> TrainedDiseaseModel:
    model = snap.models.get(disease)
    if model is None:
        raise HTTPException(status_code=404, detail=f"unknown disease {disease!r}")
    return model


def create_app(bundle, bundle_path: str | None = None) -> FastAPI:
    """Build the service over a ModelBundle instance or a bundle file path."""
    if isinstance(bundle, (str, Path)):
        bundle_path = str(bundle)
        bundle = load_bundle(bundle)
    app = FastAPI(title="protopal", version="1.0")
    app.state.snapshot = Snapshot(bundle, bundle_path)

    @app.exception_handler(RequestValidationError)
    def _on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"detail": jsonable_encoder(exc.errors())})

    @app.get("/v1/schema")
    def get_schema(request: Request):
        snap: Snapshot = request.app.state.snapshot
        return {"features": snap.schema.to_obj(), "digest": snap.digest}

    @app.get("/v1/diseases")
    def get_diseases(request: Request):
        snap: Snapshot = request.app.state.snapshot
        return {"diseases": [{"code": m.disease, "name": m.name}
                             for m in snap.bundle.models]}

    @app.post("/v1/risk")
    def post_risk(body: RiskRequest, request: Request):
        snap: Snapshot = request.app.state.snapshot
        individual = _individual_from(body.individual, snap.schema)
        report = risk_report(individual, snap.schema, snap.bundle.models)
        return {"id": individual.id,
                "risks": [_entry_obj(e) for e in report.entries],
                "warnings": list(report.warnings)}

    @app.post("/v1/explain")
    def post_explain(body: ExplainRequest, request: Request):
        snap: Snapshot = request.app.state.snapshot
        model = _model_or_404(snap, body.disease)
        individual = _individual_from(body.individual, snap.schema)
        z = model.standardizer.apply(individual.values)
        W = model.prototype_set
        healthy_twin, diseased_twin = make_full_twins(individual, model, snap.schema)
        healthy_raw = model.standardizer.invert(W.prototypes[healthy_twin.prototype_index].w)
        diseased_raw = model.standardizer.invert(W.prototypes[diseased_twin.prototype_index].w)
        comparison = [
            {"feature": spec.name, "group": spec.group, "mutability": spec.mutability,
             "individual": float(individual.values[j]),
             "healthy_twin": float(healthy_twin.values[j]),
             "diseased_twin": float(diseased_twin.values[j])}
            for j, spec in enumerate(snap.schema.specs)
        ]
        return {
            "disease": model.disease,
            "name": model.name,
            "risk": risk_score(z, W),
            "nearest_healthy": healthy_twin.prototype_index,
            "nearest_diseased": diseased_twin.prototype_index,
            "healthy_profile": _values_obj(healthy_raw, snap.schema),
            "diseased_profile": _values_obj(diseased_raw, snap.schema),
            "healthy_twin": _twin_obj(healthy_twin, snap.schema),
            "diseased_twin": _twin_obj(diseased_twin, snap.schema),
            "comparison": comparison,
        }

    @app.post("/v1/simulate")
    def post_simulate(body: SimulateRequest, request: Request):
        snap: Snapshot = request.app.state.snapshot
        model = _model_or_404(snap, body.disease)
        individual = _individual_from(body.individual, snap.schema)
        idx = body.prototype_index
        if idx is None:
            z = model.standardizer.apply(individual.values)
            idx = model.prototype_set.nearest_of_class(z, HEALTHY)
        try:
            twin = simulate(individual, body.assignments, idx, model, snap.schema)
        except InterventionError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return _twin_obj(twin, snap.schema)

    @app.post("/v1/plan")
    def post_plan(body: PlanRequest, request: Request):
        snap: Snapshot = request.app.state.snapshot
        model = _model_or_404(snap, body.disease)
        individual = _individual_from(body.individual, snap.schema)
        try:
            config = PlanConfig(stop_policy=body.stop_policy, max_steps=body.max_steps)
            result = plan(individual, model, snap.schema, config)
        except InterventionError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return _plan_obj(result, snap.schema)

    @app.get("/v1/prototypes/{disease}")
    def get_prototypes(disease: str, request: Request,
                       features: str | None = Query(default=None)):
        snap: Snapshot = request.app.state.snapshot
        model = _model_or_404(snap, disease)
        names = (list(snap.schema.names) if features is None
                 else [f for f in features.split(",") if f])
        try:
            export = export_prototype_trends(model, names, snap.schema)
        except SchemaError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return {"disease": export.disease, "features": list(export.features),
                "rows": [dict(row) for row in export.rows]}

    @app.post("/v1/reload")
    def post_reload(body: ReloadRequest, request: Request):
        snap: Snapshot = request.app.state.snapshot
        path = body.bundle_path or snap.path
        if path is None:
            raise HTTPException(status_code=400,
                                detail="no bundle path given and none remembered")
        try:
            new_bundle = load_bundle(path)
        except (BundleError, ProtoPalError, OSError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        new_snap = Snapshot(new_bundle, str(path))
        request.app.state.snapshot = new_snap  # the swap is a single reference write
        return {"ok": True, "bundle_path": new_snap.path,
                "diseases": [m.disease for m in new_bundle.models],
                "digest": new_snap.digest,
                "warnings": list(new_bundle.warnings)}

    return app

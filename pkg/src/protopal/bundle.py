"""Single-file JSON persistence for trained models.

Numeric arrays are embedded as base64-encoded little-endian float64 in
row-major order with explicit shapes, so every array survives a save/load
round trip bit for bit. The top-level ``format_version`` is checked before
anything else is parsed.
"""

from __future__ import annotations

import base64
import binascii
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .autoencoder import DenoisingAutoencoder
from .distances import TangentBasis
from .errors import BundleError
from .lvq import Prototype, PrototypeSet, TrainedDiseaseModel, TrainingConfig
from .schema import FeatureSchema, Standardizer

BUNDLE_FORMAT_VERSION = 1


def _enc(arr: np.ndarray) -> dict:
    a = np.ascontiguousarray(np.asarray(arr), dtype="<f8")
    return {"shape": list(a.shape),
            "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _dec(obj, what: str) -> np.ndarray:
    if not isinstance(obj, Mapping) or "shape" not in obj or "data" not in obj:
        raise BundleError(f"{what}: expected an encoded array with shape and data")
    try:
        raw = base64.b64decode(obj["data"], validate=True)
    except (binascii.Error, TypeError) as exc:
        raise BundleError(f"{what}: invalid base64 payload ({exc})") from None
    shape = tuple(int(s) for s in obj["shape"])
    arr = np.frombuffer(raw, dtype="<f8")
    expected = int(np.prod(shape)) if shape else 1
    if arr.size != expected:
        raise BundleError(
            f"{what}: payload holds {arr.size} values, shape {shape} needs {expected}")
    return arr.reshape(shape).astype(np.float64, copy=True)


@dataclass(frozen=True)
class ModelBundle:
    """A schema, one shared standardizer, and the trained per-disease models."""

    schema: FeatureSchema
    standardizer: Standardizer
    models: tuple[TrainedDiseaseModel, ...]
    warnings: tuple[str, ...] = ()

    def disease_codes(self) -> tuple[str, ...]:
        return tuple(m.disease for m in self.models)

    def get(self, disease: str) -> TrainedDiseaseModel | None:
        for m in self.models:
            if m.disease == disease:
                return m
        return None


def bundle_from_models(schema: FeatureSchema, models: Sequence[TrainedDiseaseModel],
                       standardizer: Standardizer | None = None) -> ModelBundle:
    """Assemble a bundle, requiring every model to share one standardizer.

    An explicit ``standardizer`` is only needed for a bundle with no models.
    """
    if not models:
        if standardizer is None:
            raise BundleError("a bundle with no models needs an explicit standardizer")
        return ModelBundle(schema=schema, standardizer=standardizer, models=())
    std = models[0].standardizer
    for m in models[1:]:
        if not (np.array_equal(m.standardizer.mean, std.mean)
                and np.array_equal(m.standardizer.scale, std.scale)):
            raise BundleError(
                f"model {m.disease} was fit with a different standardizer; "
                "bundle models must share preprocessing")
    warnings = tuple(
        f"{m.disease}: schema digest mismatch (model was trained on a different schema)"
        for m in models if m.schema_digest != schema.digest())
    return ModelBundle(schema=schema, standardizer=std, models=tuple(models),
                       warnings=warnings)


def _ae_to_obj(ae: DenoisingAutoencoder) -> dict:
    return {"W1": _enc(ae.W1), "b1": _enc(ae.b1), "W2": _enc(ae.W2), "b2": _enc(ae.b2),
            "hidden": ae.hidden, "noise_sigma": ae.noise_sigma, "epochs": ae.epochs,
            "learning_rate": ae.learning_rate, "seed": ae.seed}


def _ae_from_obj(obj: Mapping, what: str) -> DenoisingAutoencoder:
    try:
        return DenoisingAutoencoder(
            W1=_dec(obj["W1"], f"{what}.W1"), b1=_dec(obj["b1"], f"{what}.b1"),
            W2=_dec(obj["W2"], f"{what}.W2"), b2=_dec(obj["b2"], f"{what}.b2"),
            hidden=int(obj["hidden"]), noise_sigma=float(obj["noise_sigma"]),
            epochs=int(obj["epochs"]), learning_rate=float(obj["learning_rate"]),
            seed=int(obj["seed"]))
    except KeyError as exc:
        raise BundleError(f"{what}: missing field {exc}") from None


def _model_to_obj(model: TrainedDiseaseModel) -> dict:
    W = model.prototype_set
    cfg = model.config
    return {
        "disease": model.disease,
        "name": model.name,
        "schema_digest": model.schema_digest,
        "measure": W.measure,
        "prototypes": [{"class": p.cls, "w": _enc(p.w), "basis": _enc(p.basis.matrix)}
                       for p in W.prototypes],
        "omega": None if W.omega is None else _enc(W.omega),
        "autoencoders": (None if model.autoencoders is None
                         else [_ae_to_obj(ae) for ae in model.autoencoders]),
        "config": {"prototypes_per_class": cfg.prototypes_per_class,
                   "tangent_dim": cfg.tangent_dim,
                   "learning_rate_w": cfg.learning_rate_w,
                   "learning_rate_v": cfg.learning_rate_v,
                   "epochs": cfg.epochs, "seed": cfg.seed, "measure": cfg.measure},
        "final_cost": model.final_cost,
        "cost_history": list(model.cost_history),
    }


def _model_from_obj(obj: Mapping, standardizer: Standardizer) -> TrainedDiseaseModel:
    try:
        code = str(obj["disease"])
        protos = []
        for i, rec in enumerate(obj["prototypes"]):
            w = _dec(rec["w"], f"{code}.prototypes[{i}].w")
            basis_m = _dec(rec["basis"], f"{code}.prototypes[{i}].basis")
            basis = (TangentBasis(basis_m) if basis_m.shape[1] > 0
                     else TangentBasis.empty(w.shape[0]))
            protos.append(Prototype(w=w, cls=str(rec["class"]), basis=basis))
        omega = None if obj.get("omega") is None else _dec(obj["omega"], f"{code}.omega")
        W = PrototypeSet(protos, measure=str(obj["measure"]), omega=omega)
        aes = obj.get("autoencoders")
        autoencoders = (None if aes is None
                        else tuple(_ae_from_obj(a, f"{code}.autoencoders[{i}]")
                                   for i, a in enumerate(aes)))
        config = TrainingConfig(**obj["config"])
        return TrainedDiseaseModel(
            disease=code, name=str(obj["name"]), schema_digest=str(obj["schema_digest"]),
            standardizer=standardizer, prototype_set=W, autoencoders=autoencoders,
            config=config, final_cost=float(obj["final_cost"]),
            cost_history=tuple(float(c) for c in obj.get("cost_history", ())))
    except KeyError as exc:
        raise BundleError(f"model record missing field {exc}") from None


def bundle_to_json(bundle: ModelBundle) -> str:
    obj = {
        "format_version": BUNDLE_FORMAT_VERSION,
        "schema": bundle.schema.to_obj(),
        "standardizer": {"mean": _enc(bundle.standardizer.mean),
                         "scale": _enc(bundle.standardizer.scale)},
        "models": [_model_to_obj(m) for m in bundle.models],
    }
    return json.dumps(obj, indent=2)


def save_bundle(bundle: ModelBundle, sink) -> str:
    text = bundle_to_json(bundle)
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text, encoding="utf-8")
    else:
        sink.write(text)
    return text


def bundle_from_json(text: str | bytes) -> ModelBundle:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BundleError(f"bundle is not valid JSON: {exc}") from None
    if not isinstance(obj, Mapping):
        raise BundleError("bundle JSON must be an object")
    version = obj.get("format_version")
    if version != BUNDLE_FORMAT_VERSION:
        raise BundleError(
            f"unsupported bundle format version {version!r}; "
            f"this build reads version {BUNDLE_FORMAT_VERSION}")
    try:
        schema = FeatureSchema.from_obj(obj["schema"])
        std = Standardizer(mean=_dec(obj["standardizer"]["mean"], "standardizer.mean"),
                           scale=_dec(obj["standardizer"]["scale"], "standardizer.scale"))
        models = tuple(_model_from_obj(rec, std) for rec in obj["models"])
    except KeyError as exc:
        raise BundleError(f"bundle missing field {exc}") from None
    digest = schema.digest()
    warnings = tuple(
        f"{m.disease}: schema digest mismatch (model was trained on a different schema)"
        for m in models if m.schema_digest != digest)
    return ModelBundle(schema=schema, standardizer=std, models=models, warnings=warnings)


def load_bundle(source) -> ModelBundle:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    return bundle_from_json(text)

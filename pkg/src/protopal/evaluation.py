"""End-to-end training and evaluation: split, fit, score, compare.

The comparison pits the prototype model's inverse-distance risk against a Cox
proportional-hazards baseline on a held-out test split, reporting ROC AUC and
Harrell's C per disease.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .autoencoder import AutoencoderConfig
from .cox import CoxModel, fit_cox
from .errors import ConvergenceError, MetricError, SchemaError, TrainingError
from .lvq import TrainedDiseaseModel, TrainingConfig, train
from .metrics import auc, c_index
from .risk import risk_scores_batch
from .schema import (DISEASED, CohortDataset, FeatureSchema, Standardizer,
                     fit_standardizer)
from .twins import fit_autoencoders


def train_test_split(dataset: CohortDataset, test_fraction: float = 0.2,
                     seed: int = 0) -> tuple[CohortDataset, CohortDataset]:
    """Deterministic shuffled split; test gets round(n * test_fraction) rows."""
    if not 0.0 < test_fraction < 1.0:
        raise TrainingError("test_fraction must be strictly between 0 and 1")
    n = len(dataset)
    n_test = int(round(n * test_fraction))
    if n_test == 0 or n_test == n:
        raise TrainingError("split leaves an empty train or test set")
    perm = np.random.default_rng(seed).permutation(n)
    test_idx = set(perm[:n_test].tolist())
    train_rows = [ind for i, ind in enumerate(dataset.individuals) if i not in test_idx]
    test_rows = [ind for i, ind in enumerate(dataset.individuals) if i in test_idx]
    return (CohortDataset(dataset.schema, train_rows),
            CohortDataset(dataset.schema, test_rows))


def train_disease_models(dataset: CohortDataset, diseases: Sequence[str] | None = None,
                         config: TrainingConfig = TrainingConfig(),
                         ae_config: AutoencoderConfig = AutoencoderConfig(),
                         k_min: int = 30,
                         standardizer: Standardizer | None = None,
                         disease_names: Mapping[str, str] | None = None,
                         ) -> list[TrainedDiseaseModel]:
    """Fit one prototype model (plus its autoencoders) per disease code.

    The standardizer is shared across diseases and fit on the full cohort,
    including rows without labels for a given disease.
    """
    codes = list(diseases) if diseases is not None else list(dataset.disease_codes())
    if not codes:
        raise TrainingError("no disease codes to train on")
    std = standardizer or fit_standardizer(dataset)
    models = []
    for code in codes:
        name = (disease_names or {}).get(code, code)
        model = train(dataset, code, config, standardizer=std, display_name=name)
        model = fit_autoencoders(dataset, model, k_min=k_min, config=ae_config,
                                 seed=config.seed)
        models.append(model)
    return models


@dataclass(frozen=True)
class ComparisonRow:
    disease: str
    name: str
    n_test: int
    cox_auc: float | None
    lvq_auc: float | None
    cox_c_index: float | None
    lvq_c_index: float | None
    winner: str | None  # by AUC: "cox" | "lvq" | "tie"
    note: str = ""


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[ComparisonRow, ...]

    def wins(self) -> dict[str, int]:
        tally = {"cox": 0, "lvq": 0, "tie": 0}
        for row in self.rows:
            if row.winner is not None:
                tally[row.winner] += 1
        return tally


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def comparison_to_csv(table: ComparisonTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["disease", "name", "n_test", "cox_auc", "lvq_auc",
                     "cox_c_index", "lvq_c_index", "winner", "note"])
    for r in table.rows:
        writer.writerow([r.disease, r.name, str(r.n_test), _fmt(r.cox_auc),
                         _fmt(r.lvq_auc), _fmt(r.cox_c_index), _fmt(r.lvq_c_index),
                         r.winner or "", r.note])
    return buf.getvalue()


def _safe(fn, *args):
    try:
        return float(fn(*args)), ""
    except MetricError as exc:
        return None, str(exc)


def fit_cox_for_disease(dataset: CohortDataset, disease: str,
                        standardizer: Standardizer,
                        features: Sequence[str] | None = None) -> CoxModel:
    """Cox baseline on the rows carrying survival data for this disease.

    ``features`` restricts the regression to a column subset (applied after
    standardization, which is per-feature).
    """
    X, times, cens = dataset.survival_arrays(disease)
    Z = standardizer.apply(X)
    if features is not None:
        Z = Z[:, [dataset.schema.index(f) for f in features]]
    return fit_cox(Z, times, cens)


def compare(models: Sequence[TrainedDiseaseModel], cox_models: Mapping[str, CoxModel],
            test: CohortDataset) -> ComparisonTable:
    """Score both methods on the test split, one row per disease.

    AUC counts individuals labeled diseased as positives and everyone else
    (healthy-labeled or unlabeled) as negatives.
    """
    rows = []
    for model in models:
        code = model.disease
        notes = []
        y = np.array([ind.labels.get(code) == DISEASED for ind in test.individuals],
                     dtype=bool)
        cox = cox_models.get(code)
        cox_auc_v = lvq_auc_v = None
        if len(test) > 0:
            Z = model.standardizer.apply(test.matrix)
            lvq_auc_v, note = _safe(auc, risk_scores_batch(Z, model.prototype_set), y)
            if note:
                notes.append(f"lvq auc: {note}")
            if cox is not None:
                cox_auc_v, note = _safe(auc, cox.scores(Z), y)
                if note:
                    notes.append(f"cox auc: {note}")
        else:
            notes.append("empty test split")
        if cox is None:
            notes.append("no cox baseline")

        cox_ci = lvq_ci = None
        Xs, times, cens = test.survival_arrays(code)
        if Xs.shape[0] > 0:
            Zs = model.standardizer.apply(Xs)
            lvq_ci, note = _safe(c_index, risk_scores_batch(Zs, model.prototype_set),
                                 times, cens)
            if note:
                notes.append(f"lvq c-index: {note}")
            if cox is not None:
                cox_ci, note = _safe(c_index, cox.scores(Zs), times, cens)
                if note:
                    notes.append(f"cox c-index: {note}")

        winner = None
        if cox_auc_v is not None and lvq_auc_v is not None:
            if lvq_auc_v > cox_auc_v:
                winner = "lvq"
            elif lvq_auc_v < cox_auc_v:
                winner = "cox"
            else:
                winner = "tie"
        rows.append(ComparisonRow(disease=code, name=model.name, n_test=len(test),
                                  cox_auc=cox_auc_v, lvq_auc=lvq_auc_v,
                                  cox_c_index=cox_ci, lvq_c_index=lvq_ci,
                                  winner=winner, note="; ".join(notes)))
    return ComparisonTable(rows=tuple(rows))


@dataclass(frozen=True)
class EvaluationResult:
    models: tuple[TrainedDiseaseModel, ...]
    cox_models: dict[str, CoxModel]
    table: ComparisonTable
    n_train: int
    n_test: int


def evaluate_cohort(dataset: CohortDataset, diseases: Sequence[str] | None = None,
                    config: TrainingConfig = TrainingConfig(),
                    test_fraction: float = 0.2, seed: int = 0,
                    disease_names: Mapping[str, str] | None = None) -> EvaluationResult:
    """Split, fit both methods on train, compare them on test.

    Autoencoders are not fitted here; they play no role in the comparison.
    """
    train_ds, test_ds = train_test_split(dataset, test_fraction=test_fraction, seed=seed)
    std = fit_standardizer(train_ds)
    codes = list(diseases) if diseases is not None else list(train_ds.disease_codes())
    names = disease_names or {}
    models = [train(train_ds, code, config, standardizer=std,
                    display_name=names.get(code, code)) for code in codes]
    cox_models: dict[str, CoxModel] = {}
    for code in codes:
        try:
            cox_models[code] = fit_cox_for_disease(train_ds, code, std)
        except (MetricError, ConvergenceError):
            continue  # reported as "no cox baseline" in the table
    table = compare(models, cox_models, test_ds)
    return EvaluationResult(models=tuple(models), cox_models=cox_models, table=table,
                            n_train=len(train_ds), n_test=len(test_ds))


@dataclass(frozen=True)
class TrendExport:
    disease: str
    features: tuple[str, ...]
    rows: tuple[dict, ...]


def export_prototype_trends(model: TrainedDiseaseModel, features: Sequence[str],
                            schema: FeatureSchema,
                            dataset: CohortDataset | None = None) -> TrendExport:
    """Prototype positions (and optional cohort rows) in raw units for plotting.

    Each row carries id, class, predicted class and correctness where known,
    then the requested feature values.
    """
    for name in features:
        if name not in schema.names:
            raise SchemaError(f"unknown feature {name!r} in trend export")
    cols = [schema.index(name) for name in features]
    rows: list[dict] = []
    for j, proto in enumerate(model.prototype_set.prototypes):
        raw = model.standardizer.invert(proto.w)
        row = {"kind": "prototype", "id": str(j), "class": proto.cls,
               "predicted": "", "correct": ""}
        for name, c in zip(features, cols):
            row[name] = float(raw[c])
        rows.append(row)
    if dataset is not None:
        W = model.prototype_set
        Z = model.standardizer.apply(dataset.matrix)
        for i, ind in enumerate(dataset.individuals):
            predicted = W.prototypes[W.nearest(Z[i])].cls
            label = ind.labels.get(model.disease)
            correct = "" if label is None else str(predicted == label).lower()
            row = {"kind": "individual", "id": ind.id, "class": label or "",
                   "predicted": predicted, "correct": correct}
            for name, c in zip(features, cols):
                row[name] = float(ind.values[c])
            rows.append(row)
    return TrendExport(disease=model.disease, features=tuple(features), rows=tuple(rows))


def trends_to_csv(export: TrendExport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "id", "class", "predicted", "correct", *export.features])
    for row in export.rows:
        writer.writerow([row["kind"], row["id"], row["class"], row["predicted"],
                         row["correct"], *[repr(row[f]) for f in export.features]])
    return buf.getvalue()

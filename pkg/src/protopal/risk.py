"""Continuous disease risk from the prototype neighborhood around a query.

The neighborhood is the smallest hypersphere (in the model's squared-distance
measure) around the query that contains at least one prototype of each class;
its radius is therefore the larger of the two per-class minimum distances,
and prototypes sitting exactly on the radius are members. Risk is the
share of inverse-distance mass held by diseased members, with distances
floored at a tiny epsilon so a query sitting on a lone diseased prototype
scores ~1 instead of dividing by zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .lvq import PrototypeSet, TrainedDiseaseModel
from .schema import DISEASED, HEALTHY, FeatureSchema, Individual

DISTANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class Neighborhood:
    """Prototypes inside the smallest both-class hypersphere around a query."""

    radius: float
    indices: tuple[int, ...]
    distances: tuple[float, ...]
    diseased: tuple[bool, ...]

    @property
    def diseased_count(self) -> int:
        return sum(self.diseased)

    @property
    def healthy_count(self) -> int:
        return len(self.diseased) - self.diseased_count


def neighborhood(x: np.ndarray, W: PrototypeSet) -> Neighborhood:
    """Members and radius of the smallest hypersphere covering both classes."""
    dist = W.distances(x)
    mask = W.diseased_mask
    radius = max(float(dist[mask].min()), float(dist[~mask].min()))
    member = dist <= radius
    idx = np.flatnonzero(member)
    return Neighborhood(radius=radius,
                        indices=tuple(int(i) for i in idx),
                        distances=tuple(float(dist[i]) for i in idx),
                        diseased=tuple(bool(mask[i]) for i in idx))


def risk_from_distances(dist: np.ndarray, diseased_mask: np.ndarray) -> np.ndarray:
    """Vectorized risk for an (n, N) matrix of squared distances."""
    dist = np.atleast_2d(dist)
    d_dis = np.where(diseased_mask[None, :], dist, np.inf).min(axis=1)
    d_heal = np.where(diseased_mask[None, :], np.inf, dist).min(axis=1)
    radius = np.maximum(d_dis, d_heal)
    member = dist <= radius[:, None]
    weights = np.where(member, 1.0 / np.maximum(dist, DISTANCE_FLOOR), 0.0)
    total = weights.sum(axis=1)
    diseased_mass = (weights * diseased_mask[None, :]).sum(axis=1)
    return diseased_mass / total


def risk_score(x: np.ndarray, W: PrototypeSet) -> float:
    """Diseased share of inverse-distance mass inside the neighborhood, in [0, 1]."""
    return float(risk_from_distances(W.distances(x)[None, :], W.diseased_mask)[0])


def risk_scores_batch(Z: np.ndarray, W: PrototypeSet) -> np.ndarray:
    """Risk for each standardized row of Z."""
    return risk_from_distances(W.distance_matrix(Z), W.diseased_mask)


@dataclass(frozen=True)
class RiskEntry:
    disease: str
    name: str
    risk: float
    nearest_diseased: int
    nearest_healthy: int
    neighborhood: Neighborhood


@dataclass(frozen=True)
class RiskReport:
    """Per-disease risks sorted descending, plus warnings for skipped models."""

    entries: tuple[RiskEntry, ...]
    warnings: tuple[str, ...] = ()


def score_disease(x_raw: np.ndarray, model: TrainedDiseaseModel) -> RiskEntry:
    """Standardize with the model's preprocessing and score one disease."""
    z = model.standardizer.apply(x_raw)
    W = model.prototype_set
    return RiskEntry(
        disease=model.disease,
        name=model.name,
        risk=risk_score(z, W),
        nearest_diseased=W.nearest_of_class(z, DISEASED),
        nearest_healthy=W.nearest_of_class(z, HEALTHY),
        neighborhood=neighborhood(z, W),
    )


def risk_report(individual: Individual, schema: FeatureSchema,
                models: Iterable[TrainedDiseaseModel]) -> RiskReport:
    """Multi-disease report; models whose schema digest mismatches are skipped."""
    digest = schema.digest()
    entries: list[RiskEntry] = []
    warnings: list[str] = []
    for model in models:
        if model.schema_digest != digest:
            warnings.append(
                f"{model.disease}: schema mismatch (model trained on a different schema), skipped")
            continue
        entries.append(score_disease(individual.values, model))
    entries.sort(key=lambda e: -e.risk)
    return RiskReport(entries=tuple(entries), warnings=tuple(warnings))

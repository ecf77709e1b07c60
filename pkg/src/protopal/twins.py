"""Digital twins: counterfactual individuals simulated near a chosen prototype.

A twin keeps fixed features bit-exact, takes intervenable features from the
requested assignments, and fills simulated features with the output of the
prototype's denoising autoencoder, clamped back into the schema's domains.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .autoencoder import AutoencoderConfig, fit_autoencoder
from .errors import InterventionError, TrainingError
from .lvq import TrainedDiseaseModel
from .risk import risk_score
from .schema import DISEASED, HEALTHY, CohortDataset, FeatureSchema, Individual


@dataclass(frozen=True)
class DigitalTwin:
    """A simulated counterfactual of one individual near one prototype."""

    base_id: str
    prototype_index: int
    prototype_class: str
    assignments: dict[str, float]
    values: np.ndarray
    risk_before: float
    risk_after: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


def fit_autoencoders(dataset: CohortDataset, model: TrainedDiseaseModel,
                     k_min: int = 30,
                     config: AutoencoderConfig = AutoencoderConfig(),
                     seed: int = 0) -> TrainedDiseaseModel:
    """Train one autoencoder per prototype on that prototype's local cell.

    The cell is the set of cohort rows whose nearest prototype is this one;
    cells smaller than k_min are widened to the k_min rows nearest to the
    prototype so every network sees enough data.
    """
    if len(dataset) == 0:
        raise TrainingError("cannot fit autoencoders on an empty cohort")
    Z = model.standardizer.apply(dataset.matrix)
    W = model.prototype_set
    dist = W.distance_matrix(Z)  # (n, n_protos)
    nearest = np.argmin(dist, axis=1)
    k = min(k_min, Z.shape[0])
    autoencoders = []
    for j in range(len(W.prototypes)):
        rows = np.flatnonzero(nearest == j)
        if rows.size < k:
            rows = np.union1d(rows, np.argsort(dist[:, j], kind="stable")[:k])
        child_seed = int(np.random.SeedSequence((seed, j)).generate_state(1)[0])
        autoencoders.append(fit_autoencoder(Z[rows], config=config, seed=child_seed))
    return dataclasses.replace(model, autoencoders=tuple(autoencoders))


def _check_assignments(assignments: Mapping[str, float], schema: FeatureSchema) -> dict[str, float]:
    checked: dict[str, float] = {}
    for name, value in assignments.items():
        if name not in schema.names:
            raise InterventionError(f"unknown feature {name!r} in assignments")
        spec = schema.spec(name)
        if spec.mutability != "intervenable":
            raise InterventionError(
                f"feature {name!r} is {spec.mutability}, only intervenable features accept assignments")
        problem = spec.check_value(float(value))
        if problem is not None:
            raise InterventionError(f"assignment for {name!r}: {problem}")
        checked[name] = float(value)
    return checked


def simulate(individual: Individual, assignments: Mapping[str, float],
             prototype_index: int, model: TrainedDiseaseModel,
             schema: FeatureSchema) -> DigitalTwin:
    """Counterfactual simulation of one individual near one prototype."""
    daes = model.require_autoencoders()
    W = model.prototype_set
    if not 0 <= prototype_index < len(W.prototypes):
        raise InterventionError(f"prototype index {prototype_index} out of range")
    checked = _check_assignments(assignments, schema)

    x_prime = individual.values.copy()
    for name, value in checked.items():
        x_prime[schema.index(name)] = value

    z_prime = model.standardizer.apply(x_prime)
    recon_raw = model.standardizer.invert(daes[prototype_index].reconstruct(z_prime))

    twin_values = x_prime.copy()
    for j in schema.simulated_indices:
        twin_values[j] = schema.specs[j].clamp(recon_raw[j])
    # fixed and intervenable positions keep x_prime bit-exact by construction

    risk_before = risk_score(model.standardizer.apply(individual.values), W)
    risk_after = risk_score(model.standardizer.apply(twin_values), W)
    return DigitalTwin(base_id=individual.id, prototype_index=prototype_index,
                       prototype_class=W.prototypes[prototype_index].cls,
                       assignments=checked, values=twin_values,
                       risk_before=risk_before, risk_after=risk_after)


def prototype_lifestyle(model: TrainedDiseaseModel, prototype_index: int,
                        schema: FeatureSchema) -> dict[str, float]:
    """The prototype's intervenable profile in raw units, snapped into domain.

    Ordinal and binary features round to the nearest valid level; continuous
    features clamp to their range.
    """
    W = model.prototype_set
    if not 0 <= prototype_index < len(W.prototypes):
        raise InterventionError(f"prototype index {prototype_index} out of range")
    raw = model.standardizer.invert(W.prototypes[prototype_index].w)
    out: dict[str, float] = {}
    for j in schema.intervenable_indices:
        out[schema.specs[j].name] = schema.specs[j].clamp(raw[j])
    return out


def make_full_twins(individual: Individual, model: TrainedDiseaseModel,
                    schema: FeatureSchema) -> tuple[DigitalTwin, DigitalTwin]:
    """(healthy twin, diseased twin): full lifestyle adoption of the nearest
    healthy and nearest diseased prototype respectively."""
    z = model.standardizer.apply(individual.values)
    W = model.prototype_set
    p_h = W.nearest_of_class(z, HEALTHY)
    p_d = W.nearest_of_class(z, DISEASED)
    healthy = simulate(individual, prototype_lifestyle(model, p_h, schema), p_h, model, schema)
    diseased = simulate(individual, prototype_lifestyle(model, p_d, schema), p_d, model, schema)
    return healthy, diseased


def twin_deltas(individual: Individual, twin: DigitalTwin,
                schema: FeatureSchema) -> list[dict[str, float | str]]:
    """Per-feature comparison rows for explanation output."""
    rows: list[dict[str, float | str]] = []
    for j, spec in enumerate(schema.specs):
        before = float(individual.values[j])
        after = float(twin.values[j])
        rows.append({"feature": spec.name, "group": spec.group,
                     "mutability": spec.mutability,
                     "before": before, "after": after, "delta": after - before})
    return rows

"""Stepwise health plans: greedy single-feature moves toward a healthy prototype.

Each step tries every candidate move (one ordinal level, a binary flip, or a
continuous jump to target), simulates the twin for each, and keeps the move
with the largest risk reduction. Ties break in schema feature order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import InterventionError
from .lvq import TrainedDiseaseModel
from .risk import risk_score
from .schema import HEALTHY, FeatureSchema, Individual
from .twins import DigitalTwin, prototype_lifestyle, simulate

STOP_POLICIES = ("no-improvement", "exhaust-all")


@dataclass(frozen=True)
class Move:
    feature: str
    from_value: float
    to_value: float


@dataclass(frozen=True)
class PlanStep:
    move: Move
    risk_before: float
    risk_after: float
    twin: DigitalTwin


@dataclass(frozen=True)
class PlanConfig:
    stop_policy: str = "no-improvement"
    max_steps: int = 20

    def __post_init__(self):
        if self.stop_policy not in STOP_POLICIES:
            raise InterventionError(
                f"unknown stop policy {self.stop_policy!r}; choose one of {STOP_POLICIES}")
        if self.max_steps < 1:
            raise InterventionError("max_steps must be at least 1")


@dataclass(frozen=True)
class HealthPlan:
    disease: str
    target_prototype: int
    target_lifestyle: dict[str, float]
    initial_risk: float
    steps: tuple[PlanStep, ...] = field(default_factory=tuple)
    stop_reason: str = "target-reached"

    @property
    def final_risk(self) -> float:
        return self.steps[-1].risk_after if self.steps else self.initial_risk


def candidate_moves(values: np.ndarray, target: Mapping[str, float],
                    schema: FeatureSchema) -> list[Move]:
    """All single-feature moves toward the target lifestyle, in schema order.

    Ordinal features advance one level per move so plans read as gradual
    changes; binary and continuous features move straight to target.
    """
    moves: list[Move] = []
    for j in schema.intervenable_indices:
        spec = schema.specs[j]
        cur = float(values[j])
        tgt = float(target[spec.name])
        if cur == tgt:
            continue
        if spec.domain.kind == "ordinal":
            to = cur + (1.0 if tgt > cur else -1.0)
        else:
            to = tgt
        moves.append(Move(feature=spec.name, from_value=cur, to_value=to))
    return moves


def plan(individual: Individual, model: TrainedDiseaseModel, schema: FeatureSchema,
         config: PlanConfig = PlanConfig()) -> HealthPlan:
    """Greedy stepwise plan toward the nearest healthy prototype's lifestyle."""
    W = model.prototype_set
    z0 = model.standardizer.apply(individual.values)
    target_idx = W.nearest_of_class(z0, HEALTHY)
    target = prototype_lifestyle(model, target_idx, schema)

    current = individual
    current_risk = risk_score(z0, W)
    initial_risk = current_risk
    steps: list[PlanStep] = []
    stop_reason = "target-reached"
    while True:
        moves = candidate_moves(current.values, target, schema)
        if not moves:
            stop_reason = "target-reached"
            break
        if len(steps) >= config.max_steps:
            stop_reason = "max-steps"
            break
        best_move = None
        best_twin = None
        for move in moves:
            twin = simulate(current, {move.feature: move.to_value}, target_idx, model, schema)
            if best_twin is None or twin.risk_after < best_twin.risk_after:
                best_move, best_twin = move, twin
        reduction = current_risk - best_twin.risk_after
        if config.stop_policy == "no-improvement" and reduction <= 0:
            stop_reason = "no-improvement"
            break
        steps.append(PlanStep(move=best_move, risk_before=current_risk,
                              risk_after=best_twin.risk_after, twin=best_twin))
        current = current.with_values(best_twin.values)
        current_risk = best_twin.risk_after

    return HealthPlan(disease=model.disease, target_prototype=target_idx,
                      target_lifestyle=target, initial_risk=initial_risk,
                      steps=tuple(steps), stop_reason=stop_reason)

import numpy as np
import pytest

from protopal.errors import InterventionError
from protopal.planner import (HealthPlan, Move, PlanConfig, candidate_moves,
                              plan)
from protopal.twins import prototype_lifestyle, simulate

from conftest import tiny_schema


class TestCandidateMoves:
    def test_ordinal_moves_one_level_toward_target(self):
        schema = tiny_schema()
        values = np.array([50.0, 0.0, 1.0, 10.0])  # age, activity, smoking, marker
        target = {"activity": 4.0, "smoking": 0.0}
        moves = candidate_moves(values, target, schema)
        assert moves == [Move("activity", 0.0, 1.0), Move("smoking", 1.0, 0.0)]

    def test_ordinal_steps_down_as_well(self):
        schema = tiny_schema()
        values = np.array([50.0, 4.0, 0.0, 10.0])
        moves = candidate_moves(values, {"activity": 1.0, "smoking": 0.0}, schema)
        assert moves == [Move("activity", 4.0, 3.0)]

    def test_features_at_target_are_skipped(self):
        schema = tiny_schema()
        values = np.array([50.0, 2.0, 0.0, 10.0])
        moves = candidate_moves(values, {"activity": 2.0, "smoking": 0.0}, schema)
        assert moves == []

    def test_moves_follow_schema_order(self):
        schema = tiny_schema()
        values = np.array([50.0, 1.0, 1.0, 10.0])
        moves = candidate_moves(values, {"activity": 3.0, "smoking": 0.0}, schema)
        assert [m.feature for m in moves] == ["activity", "smoking"]


class TestPlanConfig:
    def test_rejects_unknown_policy(self):
        with pytest.raises(InterventionError):
            PlanConfig(stop_policy="whenever")

    def test_rejects_nonpositive_max_steps(self):
        with pytest.raises(InterventionError):
            PlanConfig(max_steps=0)


class TestPlan:
    def test_reaches_target_and_risk_decreases(self, demo_cohort, e11_model):
        schema = demo_cohort.schema
        # pick someone not already at the target lifestyle
        for ind in demo_cohort.individuals:
            p = plan(ind, e11_model, schema)
            if p.steps:
                break
        assert p.stop_reason in ("target-reached", "no-improvement", "max-steps")
        risks = [p.initial_risk] + [s.risk_after for s in p.steps]
        for before, after in zip(risks, risks[1:]):
            assert after <= before
        # step bookkeeping chains correctly
        for prev, step in zip(risks, p.steps):
            assert step.risk_before == pytest.approx(prev, abs=1e-15)
        assert p.final_risk == risks[-1]

    def test_each_step_is_the_best_single_move(self, demo_cohort, e11_model):
        """Greedy choice matches exhaustive one-step search at every step."""
        schema = demo_cohort.schema
        checked_steps = 0
        for ind in demo_cohort.individuals[:25]:
            p = plan(ind, e11_model, schema)
            target = prototype_lifestyle(e11_model, p.target_prototype, schema)
            current = ind
            for step in p.steps:
                moves = candidate_moves(current.values, target, schema)
                outcomes = [
                    simulate(current, {m.feature: m.to_value},
                             p.target_prototype, e11_model, schema).risk_after
                    for m in moves]
                best = min(outcomes)
                assert step.risk_after == pytest.approx(best, abs=1e-12)
                # ties break toward the earliest feature in schema order
                first_best = moves[int(np.argmin(outcomes))]
                assert step.move == first_best
                current = current.with_values(step.twin.values)
                checked_steps += 1
        assert checked_steps > 0

    def test_individual_already_at_target_gets_empty_plan(self, demo_cohort, e11_model):
        schema = demo_cohort.schema
        ind = demo_cohort.individuals[0]
        target = prototype_lifestyle(e11_model, plan(ind, e11_model, schema).target_prototype, schema)
        vals = ind.values.copy()
        for name, v in target.items():
            vals[schema.index(name)] = v
        at_target = ind.with_values(vals, id_suffix="-at-target")
        p = plan(at_target, e11_model, schema)
        assert p.steps == ()
        assert p.stop_reason == "target-reached"
        assert p.final_risk == p.initial_risk

    def test_no_improvement_policy_stops_when_risk_would_rise(self, demo_cohort, e11_model):
        schema = demo_cohort.schema
        saw_no_improvement = False
        for ind in demo_cohort.individuals[:80]:
            p = plan(ind, e11_model, schema)
            if p.stop_reason == "no-improvement":
                saw_no_improvement = True
                # every accepted step strictly reduced risk
                risks = [p.initial_risk] + [s.risk_after for s in p.steps]
                for before, after in zip(risks, risks[1:]):
                    assert after < before
        # the demo cohort is varied enough that some plans stall
        assert saw_no_improvement

    def test_exhaust_all_policy_runs_to_target_or_cap(self, demo_cohort, e11_model):
        schema = demo_cohort.schema
        cfg = PlanConfig(stop_policy="exhaust-all", max_steps=50)
        for ind in demo_cohort.individuals[:10]:
            p = plan(ind, e11_model, schema, cfg)
            assert p.stop_reason in ("target-reached", "max-steps")
            if p.stop_reason == "target-reached":
                final_vals = p.steps[-1].twin.values if p.steps else ind.values
                for name, v in p.target_lifestyle.items():
                    assert final_vals[schema.index(name)] == v

    def test_max_steps_truncates(self, demo_cohort, e11_model):
        schema = demo_cohort.schema
        cfg = PlanConfig(stop_policy="exhaust-all", max_steps=1)
        for ind in demo_cohort.individuals[:30]:
            full = plan(ind, e11_model, schema,
                        PlanConfig(stop_policy="exhaust-all", max_steps=50))
            if len(full.steps) > 1:
                p = plan(ind, e11_model, schema, cfg)
                assert len(p.steps) == 1
                assert p.stop_reason == "max-steps"
                assert p.steps[0].move == full.steps[0].move
                assert p.steps[0].risk_after == full.steps[0].risk_after
                assert np.array_equal(p.steps[0].twin.values,
                                      full.steps[0].twin.values)
                return
        pytest.fail("no individual needed more than one step")

    def test_plan_metadata(self, demo_cohort, e11_model):
        schema = demo_cohort.schema
        p = plan(demo_cohort.individuals[0], e11_model, schema)
        assert p.disease == "E11"
        W = e11_model.prototype_set
        assert W.prototypes[p.target_prototype].cls == "healthy"
        assert set(p.target_lifestyle) == {
            schema.specs[j].name for j in schema.intervenable_indices}

import numpy as np
import pytest

from protopal.distances import TangentBasis
from protopal.lvq import Prototype, PrototypeSet
from protopal.risk import (DISTANCE_FLOOR, neighborhood, risk_from_distances,
                           risk_score, risk_scores_batch)
from protopal.schema import DISEASED, HEALTHY

from oracles import naive_risk


def _set_from(positions, classes, measure="euclidean"):
    d = len(positions[0])
    protos = [Prototype(np.asarray(p, dtype=float), c, TangentBasis.empty(d))
              for p, c in zip(positions, classes)]
    return PrototypeSet(protos, measure=measure)


def test_hand_case_healthy_at_1_diseased_at_2():
    # healthy prototype at squared distance 1, diseased at 4 from the origin
    # in 1-D: x = 0, healthy at 1, diseased at 2
    W = _set_from([[1.0], [2.0]], [HEALTHY, DISEASED])
    x = np.zeros(1)
    # distances are squared: 1 and 4 -> risk = (1/4) / (1/1 + 1/4) = 1/5
    assert risk_score(x, W) == pytest.approx((1 / 4) / (1 + 1 / 4), abs=1e-12)


def test_hand_case_distance_values_one_and_two():
    # direct check of the formula on distance values {healthy: 1, diseased: 2}
    dist = np.array([[1.0, 2.0]])
    diseased_mask = np.array([False, True])
    got = float(risk_from_distances(dist, diseased_mask)[0])
    assert got == pytest.approx(1 / 3, abs=1e-15)  # (1/2) / (1/1 + 1/2)


def test_neighborhood_radius_and_boundary_membership():
    W = _set_from([[1.0], [2.0], [3.0], [-2.0]],
                  [HEALTHY, DISEASED, DISEASED, HEALTHY])
    x = np.zeros(1)
    nb = neighborhood(x, W)
    # per-class minima: healthy 1, diseased 4 -> radius 4; members at d <= 4
    assert nb.radius == pytest.approx(4.0)
    assert nb.indices == (0, 1, 3)  # d = 1, 4, 4: boundary prototypes included
    assert nb.diseased == (False, True, False)
    assert nb.diseased_count == 1 and nb.healthy_count == 2


def test_exact_hit_on_diseased_prototype_scores_near_one():
    W = _set_from([[0.0, 0.0], [3.0, 0.0]], [DISEASED, HEALTHY])
    r = risk_score(np.zeros(2), W)
    assert r > 1.0 - 1e-10
    # and symmetric for a healthy hit
    W2 = _set_from([[0.0, 0.0], [3.0, 0.0]], [HEALTHY, DISEASED])
    assert risk_score(np.zeros(2), W2) < 1e-10


def test_risk_bounds_and_batch_consistency():
    rng = np.random.default_rng(23)
    for _ in range(20):
        d = int(rng.integers(1, 6))
        n_protos = int(rng.integers(2, 10))
        classes = [DISEASED, HEALTHY] + [
            DISEASED if rng.random() < 0.5 else HEALTHY
            for _ in range(n_protos - 2)]
        W = _set_from(rng.normal(size=(n_protos, d)).tolist(), classes)
        X = rng.normal(size=(7, d))
        batch = risk_scores_batch(X, W)
        for i, x in enumerate(X):
            single = risk_score(x, W)
            assert 0.0 <= single <= 1.0
            assert batch[i] == pytest.approx(single, abs=1e-15)


def test_matches_naive_oracle_on_random_configurations():
    rng = np.random.default_rng(29)
    for _ in range(300):
        d = int(rng.integers(1, 9))
        n_protos = int(rng.integers(2, 21))
        classes = [DISEASED, HEALTHY] + [
            DISEASED if rng.random() < 0.5 else HEALTHY
            for _ in range(n_protos - 2)]
        W = _set_from(rng.normal(size=(n_protos, d)).tolist(), classes)
        x = rng.normal(size=d)
        dist = W.distances(x)
        flags = [c == DISEASED for c in classes]
        want = naive_risk(dist.tolist(), flags, floor=DISTANCE_FLOOR)
        assert risk_score(x, W) == pytest.approx(want, abs=1e-12)


def test_risk_monotone_in_diseased_distance():
    # moving the query toward the diseased prototype raises risk
    W = _set_from([[0.0], [4.0]], [DISEASED, HEALTHY])
    risks = [risk_score(np.array([t]), W) for t in (3.0, 2.0, 1.0, 0.5)]
    assert all(a < b for a, b in zip(risks, risks[1:]))

import numpy as np
import pytest

from protopal import (AutoencoderConfig, TrainingConfig, demo_config,
                      fit_autoencoders, generate_synthetic_cohort, train,
                      train_disease_models)
from protopal.schema import (BinaryDomain, CohortDataset, ContinuousDomain,
                             FeatureSchema, FeatureSpec, Individual,
                             OrdinalDomain)


def tiny_schema() -> FeatureSchema:
    """Four features covering every domain kind and mutability class."""
    return FeatureSchema([
        FeatureSpec("age", "demographic", ContinuousDomain(18, 90, "years"), "fixed"),
        FeatureSpec("activity", "lifestyle", OrdinalDomain(5), "intervenable"),
        FeatureSpec("smoking", "lifestyle", BinaryDomain(), "intervenable"),
        FeatureSpec("marker", "lab", ContinuousDomain(0, 50, "mg/dL"), "simulated"),
    ])


@pytest.fixture
def small_schema():
    return tiny_schema()


def blob_dataset(n: int = 200, seed: int = 0, sep: float = 2.5) -> CohortDataset:
    """Two Gaussian blobs in a 2-feature continuous schema, labeled for 'D'."""
    schema = FeatureSchema([
        FeatureSpec("f1", "history", ContinuousDomain(-1e6, 1e6), "fixed"),
        FeatureSpec("f2", "history", ContinuousDomain(-1e6, 1e6), "fixed"),
    ])
    rng = np.random.default_rng(seed)
    half = n // 2
    pts = np.vstack([rng.normal((-sep, 0.0), 1.0, size=(half, 2)),
                     rng.normal((sep, 0.0), 1.0, size=(n - half, 2))])
    individuals = [
        Individual(id=f"b{i:04d}", values=pts[i],
                   labels={"D": "diseased" if i < half else "healthy"})
        for i in range(n)
    ]
    return CohortDataset(schema, individuals)


@pytest.fixture(scope="session")
def demo_cohort():
    return generate_synthetic_cohort(demo_config(n=600, seed=7))


@pytest.fixture(scope="session")
def e11_model(demo_cohort):
    """A small but real tangent-distance model with fitted autoencoders."""
    config = TrainingConfig(prototypes_per_class=2, tangent_dim=2, epochs=10, seed=0)
    return train_disease_models(demo_cohort, ["E11"], config=config,
                                ae_config=AutoencoderConfig(epochs=60),
                                k_min=20)[0]


@pytest.fixture(scope="session")
def blob_model():
    ds = blob_dataset(n=200, seed=1)
    config = TrainingConfig(prototypes_per_class=1, tangent_dim=1, epochs=15, seed=0)
    return ds, train(ds, "D", config)


def pytest_terminal_summary(terminalreporter):
    """Replay the per-criterion acceptance verdicts after capture ends."""
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULT_LINES", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria", sep="-")
        for text in lines:
            terminalreporter.write_line(text)

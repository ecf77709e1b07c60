"""Synthetic cohort generation with planted, recoverable risk structure.

Replaces any real checkup data: cohorts are drawn from a configurable
generative process so every downstream claim (ranking quality, coupling
recovery, planner behavior) can be checked against known ground truth.

The process, per individual:

1. Non-simulated features are drawn independently (continuous: truncated
   normal around mid-range; ordinal: uniform level; binary: fair coin).
2. Simulated features (labs, and any other ``simulated`` column) are a linear
   combination of the *latent-standardized* source features named in the
   coupling matrix, plus Gaussian noise, mapped back to raw units. This
   plants lifestyle -> lab correlations that an autoencoder can recover.
3. Per disease, a logit is formed from a linear term over latent features and
   an optional radial "cluster bump" (two diseased clusters make the class
   boundary nonlinear). Labels are Bernoulli(sigmoid(logit)); event times are
   exponential with rate exp(logit), censored at a fixed quantile horizon.

Latent standardization uses closed-form moments of the sampling
distributions, so planted logits are a pure function of raw values and can
be recomputed by oracles via :func:`planted_logits`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import GeneratorConfigError
from .schema import (
    DISEASED,
    HEALTHY,
    BinaryDomain,
    CohortDataset,
    ContinuousDomain,
    FeatureSchema,
    FeatureSpec,
    Individual,
    OrdinalDomain,
)


@dataclass(frozen=True)
class ClusterBump:
    """Radial logit bumps creating diseased clusters in a 2-feature slice."""

    features: tuple[str, str]
    centers: tuple[tuple[float, float], ...]
    width: float = 1.0
    gain: float = 4.0


@dataclass(frozen=True)
class PlantedDisease:
    code: str
    name: str
    weights: Mapping[str, float]
    intercept: float = 0.0
    clusters: ClusterBump | None = None


@dataclass(frozen=True)
class GeneratorConfig:
    schema: FeatureSchema
    n: int
    seed: int
    diseases: tuple[PlantedDisease, ...] = ()
    couplings: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    noise_scale: float = 1.0
    censor_quantile: float = 0.9


def _latent_moments(spec: FeatureSpec) -> tuple[float, float]:
    """(mean, scale) of the feature's sampling distribution, closed form."""
    d = spec.domain
    if isinstance(d, ContinuousDomain):
        return (d.min + d.max) / 2.0, (d.max - d.min) / 6.0
    if isinstance(d, OrdinalDomain):
        L = d.levels
        return (L - 1) / 2.0, float(np.sqrt((L * L - 1) / 12.0))
    return 0.5, 0.5


def latent_matrix(schema: FeatureSchema, raw: np.ndarray) -> np.ndarray:
    """Map raw values to the generator's latent-standardized coordinates."""
    raw = np.atleast_2d(np.asarray(raw, dtype=np.float64))
    out = np.empty_like(raw)
    for j, spec in enumerate(schema.specs):
        mu, sd = _latent_moments(spec)
        out[:, j] = (raw[:, j] - mu) / sd
    return out


def _check_config(config: GeneratorConfig):
    names = set(config.schema.names)
    simulated = {config.schema.names[i] for i in config.schema.simulated_indices}
    for target, sources in config.couplings.items():
        if target not in names:
            raise GeneratorConfigError(f"coupling target {target!r} is not a schema feature")
        if target not in simulated:
            raise GeneratorConfigError(f"coupling target {target!r} must be a simulated feature")
        for src in sources:
            if src not in names:
                raise GeneratorConfigError(f"coupling source {src!r} is not a schema feature")
            if src in simulated:
                raise GeneratorConfigError(f"coupling source {src!r} must not be simulated")
    for dis in config.diseases:
        for f in dis.weights:
            if f not in names:
                raise GeneratorConfigError(
                    f"disease {dis.code}: weight references unknown feature {f!r}")
        if dis.clusters is not None:
            for f in dis.clusters.features:
                if f not in names:
                    raise GeneratorConfigError(
                        f"disease {dis.code}: cluster references unknown feature {f!r}")
    if not 0 < config.censor_quantile <= 1:
        raise GeneratorConfigError("censor_quantile must lie in (0, 1]")
    if config.n <= 0:
        raise GeneratorConfigError("n must be positive")


def planted_logits(config: GeneratorConfig, raw: np.ndarray, code: str) -> np.ndarray:
    """Ground-truth disease logit for each row of ``raw``; no randomness involved."""
    disease = next((d for d in config.diseases if d.code == code), None)
    if disease is None:
        raise GeneratorConfigError(f"config has no planted disease {code!r}")
    U = latent_matrix(config.schema, raw)
    logit = np.full(U.shape[0], disease.intercept, dtype=np.float64)
    for fname, w in disease.weights.items():
        logit += w * U[:, config.schema.index(fname)]
    if disease.clusters is not None:
        cb = disease.clusters
        ia, ib = (config.schema.index(f) for f in cb.features)
        for cx, cy in cb.centers:
            sq = (U[:, ia] - cx) ** 2 + (U[:, ib] - cy) ** 2
            logit += cb.gain * np.exp(-sq / (2.0 * cb.width * cb.width))
    return logit


def generate_synthetic_cohort(config: GeneratorConfig) -> CohortDataset:
    """Draw a cohort; a pure function of (config, seed)."""
    _check_config(config)
    rng = np.random.default_rng(config.seed)
    schema = config.schema
    n = config.n
    # zeros, not empty: the latent view below standardizes every column while
    # the simulated ones are still unfilled, and uninitialized memory can hold
    # non-finite values that trip floating-point warnings
    raw = np.zeros((n, len(schema)))

    sim_idx = set(schema.simulated_indices)
    for j, spec in enumerate(schema.specs):
        if j in sim_idx:
            continue
        d = spec.domain
        if isinstance(d, ContinuousDomain):
            mid, sd = _latent_moments(spec)
            raw[:, j] = np.clip(rng.normal(mid, sd, size=n), d.min, d.max)
        elif isinstance(d, OrdinalDomain):
            raw[:, j] = rng.integers(0, d.levels, size=n).astype(np.float64)
        else:
            raw[:, j] = rng.integers(0, 2, size=n).astype(np.float64)

    # Latent views of the already-drawn source features.
    U = latent_matrix(schema, raw)

    for j in sorted(sim_idx):
        spec = schema.specs[j]
        sources = config.couplings.get(spec.name, {})
        latent = config.noise_scale * rng.normal(size=n)
        for src, coeff in sources.items():
            latent = latent + coeff * U[:, schema.index(src)]
        mu, sd = _latent_moments(spec)
        if isinstance(spec.domain, ContinuousDomain):
            raw[:, j] = np.clip(mu + sd * latent, spec.domain.min, spec.domain.max)
        elif isinstance(spec.domain, OrdinalDomain):
            raw[:, j] = np.clip(np.round(mu + sd * latent), 0, spec.domain.levels - 1)
        else:
            raw[:, j] = (latent > 0).astype(np.float64)

    labels_per_code: dict[str, np.ndarray] = {}
    times_per_code: dict[str, np.ndarray] = {}
    cens_per_code: dict[str, np.ndarray] = {}
    for dis in config.diseases:
        logit = planted_logits(config, raw, dis.code)
        p = 1.0 / (1.0 + np.exp(-logit))
        labels_per_code[dis.code] = rng.random(n) < p
        rate = np.exp(logit)
        drawn = rng.exponential(1.0 / rate)
        horizon = float(np.quantile(drawn, config.censor_quantile))
        cens_per_code[dis.code] = drawn > horizon
        times_per_code[dis.code] = np.minimum(drawn, horizon)

    width = len(str(max(n - 1, 1)))
    individuals = []
    for i in range(n):
        labels = {code: (DISEASED if flags[i] else HEALTHY)
                  for code, flags in labels_per_code.items()}
        times = {code: float(t[i]) for code, t in times_per_code.items()}
        cens = {code: bool(c[i]) for code, c in cens_per_code.items()}
        individuals.append(Individual(id=f"synth-{i:0{width}d}", values=raw[i],
                                      labels=labels, event_times=times, censored=cens))
    return CohortDataset(schema, individuals)


# ---------------------------------------------------------------------------
# Default demo schema and configuration
# ---------------------------------------------------------------------------

def default_schema() -> FeatureSchema:
    """A checkup-style schema with plausible (synthetic, not clinical) ranges."""
    C, O, B = ContinuousDomain, OrdinalDomain, BinaryDomain
    activity_names = ("none", "rare", "weekly", "several_per_week", "daily")
    diet_names = ("poor", "fair", "average", "good", "excellent")
    sleep_names = ("poor", "fair", "good", "excellent")
    return FeatureSchema([
        FeatureSpec("age", "demographic", C(20.0, 80.0, "years"), "fixed"),
        FeatureSpec("sex", "demographic", B(), "fixed"),
        FeatureSpec("height", "demographic", C(140.0, 200.0, "cm"), "fixed"),
        FeatureSpec("bmi", "demographic", C(15.0, 45.0, "kg/m2"), "simulated"),
        FeatureSpec("systolic_bp", "lab", C(90.0, 200.0, "mmHg"), "simulated"),
        FeatureSpec("hdl", "lab", C(20.0, 100.0, "mg/dL"), "simulated"),
        FeatureSpec("ldl", "lab", C(40.0, 250.0, "mg/dL"), "simulated"),
        FeatureSpec("glucose", "lab", C(60.0, 300.0, "mg/dL"), "simulated"),
        FeatureSpec("hba1c", "lab", C(4.0, 14.0, "%"), "simulated"),
        FeatureSpec("smoking", "lifestyle", B(), "intervenable"),
        FeatureSpec("activity", "lifestyle", O(5, activity_names), "intervenable"),
        FeatureSpec("diet_quality", "lifestyle", O(5, diet_names), "intervenable"),
        FeatureSpec("alcohol_days", "lifestyle", O(8), "intervenable"),
        FeatureSpec("sleep_quality", "lifestyle", O(4, sleep_names), "intervenable"),
        FeatureSpec("heart_history", "history", B(), "fixed"),
        FeatureSpec("kidney_history", "history", B(), "fixed"),
        FeatureSpec("bp_medication", "medication", B(), "fixed"),
    ])


def default_couplings() -> dict[str, dict[str, float]]:
    return {
        "bmi": {"activity": -0.6, "diet_quality": -0.4},
        "systolic_bp": {"alcohol_days": 0.5, "smoking": 0.4, "activity": -0.3},
        "hdl": {"activity": 0.7, "smoking": -0.5, "diet_quality": 0.3},
        "ldl": {"diet_quality": -0.7, "activity": -0.3, "smoking": 0.3},
        "glucose": {"activity": -0.8, "diet_quality": -0.5, "alcohol_days": 0.3},
        "hba1c": {"activity": -0.7, "diet_quality": -0.6, "alcohol_days": 0.3},
    }


def demo_config(n: int = 5000, seed: int = 7) -> GeneratorConfig:
    """Three planted diseases over the default schema."""
    diseases = (
        PlantedDisease(
            code="E11", name="Type 2 diabetes mellitus",
            weights={"hba1c": 1.2, "glucose": 1.0, "bmi": 0.6, "age": 0.5, "activity": -0.4},
            intercept=-1.0),
        PlantedDisease(
            code="I10", name="Essential hypertension",
            weights={"systolic_bp": 1.4, "bmi": 0.6, "age": 0.6, "alcohol_days": 0.3},
            intercept=-1.0),
        PlantedDisease(
            code="K70", name="Alcoholic liver disease",
            weights={"alcohol_days": 1.5, "age": 0.3, "ldl": 0.3},
            intercept=-1.5),
    )
    return GeneratorConfig(schema=default_schema(), n=n, seed=seed, diseases=diseases,
                           couplings=default_couplings(), noise_scale=1.0)


# ---------------------------------------------------------------------------
# JSON config (CLI surface)
# ---------------------------------------------------------------------------

def config_to_obj(config: GeneratorConfig) -> dict:
    obj = {
        "n": config.n,
        "seed": config.seed,
        "noise_scale": config.noise_scale,
        "censor_quantile": config.censor_quantile,
        "schema": config.schema.to_obj(),
        "couplings": {t: dict(s) for t, s in config.couplings.items()},
        "diseases": [],
    }
    for d in config.diseases:
        rec = {"code": d.code, "name": d.name, "weights": dict(d.weights),
               "intercept": d.intercept}
        if d.clusters is not None:
            rec["clusters"] = {"features": list(d.clusters.features),
                               "centers": [list(c) for c in d.clusters.centers],
                               "width": d.clusters.width, "gain": d.clusters.gain}
        obj["diseases"].append(rec)
    return obj


def config_from_obj(obj: Mapping) -> GeneratorConfig:
    if "schema" in obj and obj["schema"] is not None:
        schema = FeatureSchema.from_obj(obj["schema"])
        couplings = {t: dict(s) for t, s in obj.get("couplings", {}).items()}
    else:
        schema = default_schema()
        couplings = ({t: dict(s) for t, s in obj["couplings"].items()}
                     if "couplings" in obj else default_couplings())
    diseases = []
    for rec in obj.get("diseases", []):
        clusters = None
        if rec.get("clusters"):
            c = rec["clusters"]
            clusters = ClusterBump(features=tuple(c["features"]),
                                   centers=tuple(tuple(p) for p in c["centers"]),
                                   width=float(c.get("width", 1.0)),
                                   gain=float(c.get("gain", 4.0)))
        diseases.append(PlantedDisease(code=str(rec["code"]),
                                       name=str(rec.get("name", rec["code"])),
                                       weights={k: float(v) for k, v in rec["weights"].items()},
                                       intercept=float(rec.get("intercept", 0.0)),
                                       clusters=clusters))
    try:
        n = int(obj["n"])
        seed = int(obj["seed"])
    except KeyError as exc:
        raise GeneratorConfigError(f"generator config missing field {exc}") from None
    return GeneratorConfig(schema=schema, n=n, seed=seed, diseases=tuple(diseases),
                           couplings=couplings,
                           noise_scale=float(obj.get("noise_scale", 1.0)),
                           censor_quantile=float(obj.get("censor_quantile", 0.9)))


def config_from_file(path: str | Path) -> GeneratorConfig:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GeneratorConfigError(f"generator config is not valid JSON: {exc}") from None
    return config_from_obj(obj)

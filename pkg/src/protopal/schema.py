"""Feature schema, individuals, cohorts, standardization and CSV ingestion.

A cohort is a flat table: one row per individual, one column per feature,
plus optional per-disease label / event-time / censoring columns. Features
carry a group (demographic, lab, lifestyle, history, medication), a value
domain (continuous, ordinal, binary) and a mutability class that drives the
twin simulator (fixed features are copied, intervenable features can be
assigned, simulated features are regenerated).

Ordinal and binary values are stored as float64 holding exact integer level
indices; all distance computation happens on the standardized matrix.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import CohortValidationError, SchemaError

DISEASED = "diseased"
HEALTHY = "healthy"
CLASSES = (DISEASED, HEALTHY)

GROUPS = ("demographic", "lab", "lifestyle", "history", "medication")
MUTABILITIES = ("fixed", "intervenable", "simulated")

STD_FLOOR = 1e-8


@dataclass(frozen=True)
class ContinuousDomain:
    min: float
    max: float
    units: str = ""

    kind = "continuous"

    def __post_init__(self):
        # normalize so a schema built with int bounds serializes (and digests)
        # identically after a JSON round trip
        object.__setattr__(self, "min", float(self.min))
        object.__setattr__(self, "max", float(self.max))
        if not (self.min < self.max):
            raise SchemaError(f"continuous domain requires min < max, got [{self.min}, {self.max}]")


@dataclass(frozen=True)
class OrdinalDomain:
    levels: int
    level_names: tuple[str, ...] = ()

    kind = "ordinal"

    def __post_init__(self):
        object.__setattr__(self, "levels", int(self.levels))
        object.__setattr__(self, "level_names", tuple(self.level_names))
        if self.levels < 2:
            raise SchemaError(f"ordinal domain requires at least 2 levels, got {self.levels}")
        if self.level_names and len(self.level_names) != self.levels:
            raise SchemaError(
                f"ordinal domain has {self.levels} levels but {len(self.level_names)} level names")


@dataclass(frozen=True)
class BinaryDomain:
    kind = "binary"


Domain = Union[ContinuousDomain, OrdinalDomain, BinaryDomain]


@dataclass(frozen=True)
class FeatureSpec:
    """One feature: its name, clinical group, value domain and mutability class."""

    name: str
    group: str
    domain: Domain
    mutability: str

    def __post_init__(self):
        if not self.name or not self.name.strip():
            raise SchemaError("feature name must be a non-empty identifier")
        if self.group not in GROUPS:
            raise SchemaError(f"feature {self.name!r}: unknown group {self.group!r}")
        if self.mutability not in MUTABILITIES:
            raise SchemaError(f"feature {self.name!r}: unknown mutability {self.mutability!r}")
        if self.group == "lifestyle" and self.mutability != "intervenable":
            raise SchemaError(f"lifestyle feature {self.name!r} must be intervenable")
        if self.group == "lab" and self.mutability != "simulated":
            raise SchemaError(f"lab feature {self.name!r} must be simulated")
        if self.name in ("age", "sex") and self.mutability != "fixed":
            raise SchemaError(f"feature {self.name!r} must be fixed")

    def check_value(self, v: float) -> str | None:
        """Return an error description if ``v`` violates the domain, else None."""
        if not math.isfinite(v):
            return f"non-finite value {v!r}"
        d = self.domain
        if isinstance(d, ContinuousDomain):
            if v < d.min or v > d.max:
                return f"value {v!r} outside [{d.min}, {d.max}]"
        elif isinstance(d, OrdinalDomain):
            if v != int(v):
                return f"ordinal value {v!r} is not an integer level index"
            if not (0 <= v < d.levels):
                return f"ordinal level {int(v)} outside [0, {d.levels - 1}]"
        else:
            if v not in (0.0, 1.0):
                return f"binary value {v!r} not in {{0, 1}}"
        return None

    def clamp(self, v: float) -> float:
        """Map an arbitrary real to the nearest valid domain value."""
        d = self.domain
        if isinstance(d, ContinuousDomain):
            return float(min(max(v, d.min), d.max))
        if isinstance(d, OrdinalDomain):
            return float(min(max(round(v), 0), d.levels - 1))
        return float(min(max(round(v), 0), 1))


def _domain_to_obj(d: Domain) -> dict:
    if isinstance(d, ContinuousDomain):
        return {"type": "continuous", "min": d.min, "max": d.max, "units": d.units}
    if isinstance(d, OrdinalDomain):
        obj = {"type": "ordinal", "levels": d.levels}
        if d.level_names:
            obj["level_names"] = list(d.level_names)
        return obj
    return {"type": "binary"}


def _domain_from_obj(obj: Mapping) -> Domain:
    kind = obj.get("type")
    if kind == "continuous":
        return ContinuousDomain(min=float(obj["min"]), max=float(obj["max"]),
                                units=str(obj.get("units", "")))
    if kind == "ordinal":
        return OrdinalDomain(levels=int(obj["levels"]),
                             level_names=tuple(obj.get("level_names", ())))
    if kind == "binary":
        return BinaryDomain()
    raise SchemaError(f"unknown domain type {kind!r}")


class FeatureSchema:
    """Ordered, immutable collection of FeatureSpec records."""

    def __init__(self, specs: Iterable[FeatureSpec]):
        self.specs: tuple[FeatureSpec, ...] = tuple(specs)
        if not self.specs:
            raise SchemaError("schema must contain at least one feature")
        names = [s.name for s in self.specs]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate feature names: {dupes}")
        self.names: tuple[str, ...] = tuple(names)
        self._index = {n: i for i, n in enumerate(names)}

    def __len__(self) -> int:
        return len(self.specs)

    def __iter__(self):
        return iter(self.specs)

    def __eq__(self, other) -> bool:
        return isinstance(other, FeatureSchema) and self.specs == other.specs

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"unknown feature {name!r}") from None

    def spec(self, name: str) -> FeatureSpec:
        return self.specs[self.index(name)]

    def indices_where(self, predicate) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.specs) if predicate(s))

    @property
    def intervenable_indices(self) -> tuple[int, ...]:
        return self.indices_where(lambda s: s.mutability == "intervenable")

    @property
    def simulated_indices(self) -> tuple[int, ...]:
        return self.indices_where(lambda s: s.mutability == "simulated")

    @property
    def fixed_indices(self) -> tuple[int, ...]:
        return self.indices_where(lambda s: s.mutability == "fixed")

    def to_obj(self) -> list[dict]:
        return [{"name": s.name, "group": s.group, "domain": _domain_to_obj(s.domain),
                 "mutability": s.mutability} for s in self.specs]

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_obj(), indent=indent)

    @classmethod
    def from_obj(cls, obj: Sequence[Mapping]) -> "FeatureSchema":
        specs = []
        for rec in obj:
            try:
                specs.append(FeatureSpec(name=str(rec["name"]), group=str(rec["group"]),
                                         domain=_domain_from_obj(rec["domain"]),
                                         mutability=str(rec["mutability"])))
            except KeyError as exc:
                raise SchemaError(f"feature record missing field {exc}") from None
        return cls(specs)

    @classmethod
    def from_json(cls, text: str | bytes) -> "FeatureSchema":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"schema file is not valid JSON: {exc}") from None
        if not isinstance(obj, list):
            raise SchemaError("schema JSON must be a list of feature records")
        return cls.from_obj(obj)

    @classmethod
    def from_file(cls, path: str | Path) -> "FeatureSchema":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def digest(self) -> str:
        """Stable content hash used to detect schema mismatches at serving time."""
        canonical = json.dumps(self.to_obj(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Individual:
    """One participant: feature values in schema order plus optional per-disease outcomes.

    ``labels`` maps an ICD-10 code to "diseased"/"healthy". ``event_times`` and
    ``censored`` are keyed the same way and must carry identical key sets.
    """

    id: str
    values: np.ndarray
    labels: Mapping[str, str] = field(default_factory=dict)
    event_times: Mapping[str, float] = field(default_factory=dict)
    censored: Mapping[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "labels", dict(self.labels))
        object.__setattr__(self, "event_times", dict(self.event_times))
        object.__setattr__(self, "censored", dict(self.censored))

    def label_for(self, disease: str) -> str | None:
        return self.labels.get(disease)

    def with_values(self, values: np.ndarray, id_suffix: str = "") -> "Individual":
        """Copy of this individual with replaced values (labels/outcomes dropped)."""
        return Individual(id=self.id + id_suffix, values=np.array(values, dtype=np.float64))


class CohortDataset:
    """A validated, immutable cohort: shared schema + ordered individuals."""

    def __init__(self, schema: FeatureSchema, individuals: Iterable[Individual]):
        self.schema = schema
        self.individuals: tuple[Individual, ...] = tuple(individuals)
        self._validate()
        mat = (np.stack([ind.values for ind in self.individuals])
               if self.individuals else np.empty((0, len(schema))))
        mat.flags.writeable = False
        self._matrix = mat

    def _validate(self):
        d = len(self.schema)
        seen: set[str] = set()
        for row, ind in enumerate(self.individuals):
            if ind.id in seen:
                raise CohortValidationError(f"duplicate individual id {ind.id!r}", row=row)
            seen.add(ind.id)
            if ind.values.shape != (d,):
                raise CohortValidationError(
                    f"individual {ind.id!r} has {ind.values.shape} values, schema has {d}",
                    row=row)
            for j, spec in enumerate(self.schema.specs):
                problem = spec.check_value(float(ind.values[j]))
                if problem:
                    raise CohortValidationError(
                        f"row {row}, feature {spec.name!r}: {problem}",
                        row=row, feature=spec.name)
            for code, lab in ind.labels.items():
                if lab not in CLASSES:
                    raise CohortValidationError(
                        f"row {row}: label for {code!r} must be one of {CLASSES}, got {lab!r}",
                        row=row)
            if set(ind.event_times) != set(ind.censored):
                raise CohortValidationError(
                    f"row {row}: event_time and censored must be present together "
                    f"(times for {sorted(ind.event_times)}, censored for {sorted(ind.censored)})",
                    row=row)
            for code, t in ind.event_times.items():
                if not (math.isfinite(t) and t >= 0):
                    raise CohortValidationError(
                        f"row {row}: event_time for {code!r} must be nonnegative, got {t!r}",
                        row=row)

    def __len__(self) -> int:
        return len(self.individuals)

    @property
    def matrix(self) -> np.ndarray:
        """(n, d) float64 matrix of raw feature values, read-only."""
        return self._matrix

    def disease_codes(self) -> tuple[str, ...]:
        codes: set[str] = set()
        for ind in self.individuals:
            codes.update(ind.labels)
            codes.update(ind.event_times)
        return tuple(sorted(codes))

    def labeled_subset(self, disease: str) -> tuple[np.ndarray, np.ndarray]:
        """(values, is_diseased) for individuals labeled for ``disease``."""
        rows = [i for i, ind in enumerate(self.individuals) if disease in ind.labels]
        X = self._matrix[rows] if rows else np.empty((0, len(self.schema)))
        y = np.array([self.individuals[i].labels[disease] == DISEASED for i in rows], dtype=bool)
        return X, y

    def survival_arrays(self, disease: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(values, event_times, censored) for individuals with outcomes for ``disease``."""
        rows = [i for i, ind in enumerate(self.individuals) if disease in ind.event_times]
        X = self._matrix[rows] if rows else np.empty((0, len(self.schema)))
        t = np.array([self.individuals[i].event_times[disease] for i in rows], dtype=np.float64)
        c = np.array([self.individuals[i].censored[disease] for i in rows], dtype=bool)
        return X, t, c


@dataclass(frozen=True)
class Standardizer:
    """Per-feature affine map to zero-mean unit-scale coordinates.

    Every feature is standardized (ordinal/binary level indices included) so
    that a single distance space covers the whole vector. Near-constant
    columns (std below 1e-8) get scale 1.0 to avoid division blow-up.
    """

    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        scale = np.asarray(self.scale, dtype=np.float64)
        if mean.shape != scale.shape or mean.ndim != 1:
            raise SchemaError("standardizer mean/scale must be 1-D arrays of equal length")
        if not np.all(scale > 0):
            raise SchemaError("standardizer scales must be strictly positive")
        mean.flags.writeable = False
        scale.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "scale", scale)

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.mean) / self.scale

    def invert(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=np.float64) * self.scale + self.mean


def fit_standardizer(dataset: CohortDataset) -> Standardizer:
    """Population mean/std per feature, with the constant-column scale rule."""
    if len(dataset) == 0:
        raise SchemaError("cannot fit standardizer on an empty dataset")
    X = dataset.matrix
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    scale = np.where(std < STD_FLOOR, 1.0, std)
    return Standardizer(mean=mean, scale=scale)


# ---------------------------------------------------------------------------
# CSV ingestion / serialization
# ---------------------------------------------------------------------------

_LABEL_PREFIX = "label_"
_TIME_PREFIX = "event_time_"
_CENS_PREFIX = "censored_"


def _read_text(source) -> str:
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _format_value(spec: FeatureSpec, v: float) -> str:
    if isinstance(spec.domain, ContinuousDomain):
        return repr(float(v))
    return str(int(v))


def _parse_float(cell: str, row: int, column: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise CohortValidationError(
            f"row {row}, column {column!r}: cannot parse {cell!r} as a number",
            row=row, feature=column) from None


def load_cohort(source, schema: FeatureSchema) -> CohortDataset:
    """Parse a UTF-8 CSV (header row, '.' decimal point) into a validated cohort.

    The header must contain ``id`` and every schema feature name; extra columns
    other than the recognized ``label_*`` / ``event_time_*`` / ``censored_*``
    families are ignored. Row order is preserved.
    """
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("CSV is empty: missing header row") from None

    col = {name: i for i, name in enumerate(header)}
    if "id" not in col:
        raise SchemaError("CSV is missing required column 'id'")
    for name in schema.names:
        if name not in col:
            raise SchemaError(f"CSV is missing schema feature column {name!r}")

    label_cols = {h[len(_LABEL_PREFIX):]: i for h, i in col.items() if h.startswith(_LABEL_PREFIX)}
    time_cols = {h[len(_TIME_PREFIX):]: i for h, i in col.items() if h.startswith(_TIME_PREFIX)}
    cens_cols = {h[len(_CENS_PREFIX):]: i for h, i in col.items() if h.startswith(_CENS_PREFIX)}

    feature_idx = [col[name] for name in schema.names]
    individuals = []
    for row, cells in enumerate(reader):
        if not cells:
            continue
        if len(cells) < len(header):
            raise CohortValidationError(
                f"row {row}: expected {len(header)} cells, got {len(cells)}", row=row)
        values = np.empty(len(schema))
        for j, (name, ci) in enumerate(zip(schema.names, feature_idx)):
            values[j] = _parse_float(cells[ci], row, name)
        labels = {}
        for code, ci in label_cols.items():
            cell = cells[ci].strip()
            if cell == "":
                continue
            if cell not in ("0", "1"):
                raise CohortValidationError(
                    f"row {row}, column label_{code}: expected 0/1/empty, got {cell!r}",
                    row=row, feature=f"label_{code}")
            labels[code] = DISEASED if cell == "1" else HEALTHY
        times, cens = {}, {}
        for code, ci in time_cols.items():
            cell = cells[ci].strip()
            if cell:
                times[code] = _parse_float(cell, row, f"event_time_{code}")
        for code, ci in cens_cols.items():
            cell = cells[ci].strip()
            if cell == "":
                continue
            if cell not in ("0", "1"):
                raise CohortValidationError(
                    f"row {row}, column censored_{code}: expected 0/1/empty, got {cell!r}",
                    row=row, feature=f"censored_{code}")
            cens[code] = cell == "1"
        individuals.append(Individual(id=cells[col["id"]], values=values, labels=labels,
                                      event_times=times, censored=cens))
    return CohortDataset(schema, individuals)


def write_cohort(dataset: CohortDataset, sink=None) -> str:
    """Serialize a cohort back to CSV text (and optionally write it to ``sink``).

    Column order: id, features in schema order, then per disease code (sorted)
    the label / event_time / censored columns that are populated anywhere.
    """
    label_codes, time_codes = set(), set()
    for ind in dataset.individuals:
        label_codes.update(ind.labels)
        time_codes.update(ind.event_times)

    header = ["id"] + list(dataset.schema.names)
    for code in sorted(label_codes | time_codes):
        if code in label_codes:
            header.append(_LABEL_PREFIX + code)
        if code in time_codes:
            header.append(_TIME_PREFIX + code)
            header.append(_CENS_PREFIX + code)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for ind in dataset.individuals:
        cells = [ind.id]
        cells += [_format_value(spec, v) for spec, v in zip(dataset.schema.specs, ind.values)]
        for code in sorted(label_codes | time_codes):
            if code in label_codes:
                lab = ind.labels.get(code)
                cells.append("" if lab is None else ("1" if lab == DISEASED else "0"))
            if code in time_codes:
                t = ind.event_times.get(code)
                cells.append("" if t is None else repr(float(t)))
                c = ind.censored.get(code)
                cells.append("" if c is None else ("1" if c else "0"))
        writer.writerow(cells)
    text = buf.getvalue()
    if sink is not None:
        if isinstance(sink, (str, Path)):
            Path(sink).write_text(text, encoding="utf-8")
        else:
            sink.write(text)
    return text

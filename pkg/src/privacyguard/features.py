"""Feature pipeline: record cleaning, the binary feature schema, encoding,
and the seeded train/test split."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

from .errors import DataError
from .ingest import LabeledRecord
from .rng import GENERATOR_NAME, SplitMix64, permutation

#: first schema column; encodes the verb as GET=0, POST=1
VERB_FEATURE = "GET/POST"

# guards math.floor against rationals like 2/3 that round down as floats
_RATIO_EPS = 1e-9


class SchemaError(DataError):
    """A record cannot be expressed in (or checked against) a feature schema."""


class DegenerateSplitError(DataError):
    """The requested split would leave train or test empty."""


def schema_digest(feature_names) -> str:
    """sha256 over the compact JSON list of feature names."""
    payload = json.dumps(list(feature_names), separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered binary feature layout: GET/POST, is_json, then sorted pl_* columns.

    The hash is derived from the names, never supplied, so two schemas agree
    exactly when their hashes do.
    """

    feature_names: tuple[str, ...]
    version: int = 1
    schema_hash: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "schema_hash", schema_digest(self.feature_names))

    def __len__(self) -> int:
        return len(self.feature_names)


@dataclass
class CleanReport:
    """What clean_records changed or refused."""

    duplicates_removed: int = 0
    normalized: int = 0
    rejected_records: list[LabeledRecord] = field(default_factory=list)

    @property
    def rejected(self) -> int:
        return len(self.rejected_records)


def clean_records(records) -> tuple[list[LabeledRecord], CleanReport]:
    """Normalize verb spelling, reject out-of-domain labels, drop exact duplicates.

    Order is preserved (first occurrence wins) and the pass is idempotent:
    cleaning already-clean records changes nothing and counts nothing.
    """
    report = CleanReport()
    cleaned = []
    seen = set()
    for rec in records:
        verb = rec.req_type.strip().upper()
        if verb != rec.req_type:
            rec = replace(rec, req_type=verb)
            report.normalized += 1
        if rec.invasive not in (0, 1):
            report.rejected_records.append(rec)
            continue
        if rec in seen:
            report.duplicates_removed += 1
            continue
        seen.add(rec)
        cleaned.append(rec)
    return cleaned, report


def build_schema(records, version: int = 1) -> FeatureSchema:
    """Feature layout covering the records.

    Always GET/POST and is_json first, then one pl_<key> column per payload
    key seen anywhere, sorted. The url column never becomes a feature. Verbs
    other than GET/POST are refused because the verb column is binary.
    """
    keys: set[str] = set()
    for idx, rec in enumerate(records):
        if rec.req_type not in ("GET", "POST"):
            raise SchemaError(
                f"record {idx} ({rec.url}): verb {rec.req_type!r} is not encodable, "
                "only GET and POST are"
            )
        keys.update(rec.payload_keys)
    names = (VERB_FEATURE, "is_json") + tuple("pl_" + k for k in sorted(keys))
    return FeatureSchema(feature_names=names, version=version)


def encode_record(rec: LabeledRecord, schema: FeatureSchema) -> tuple[list[int], frozenset[str]]:
    """Encode one record against a schema.

    Returns the 0/1 vector in schema order plus the record's payload keys the
    schema does not know about. Unknown keys never enter the vector; they are
    surfaced so callers can report drift between capture and schema.
    """
    if rec.req_type not in ("GET", "POST"):
        raise SchemaError(f"verb {rec.req_type!r} is not encodable, only GET and POST are")
    vector = [1 if rec.req_type == "POST" else 0, 1 if rec.is_json else 0]
    known: set[str] = set()
    for name in schema.feature_names[2:]:
        key = name[3:]
        known.add(key)
        vector.append(1 if key in rec.payload_keys else 0)
    return vector, frozenset(rec.payload_keys - known)


@dataclass
class EncodeReport:
    """Payload keys seen during encoding that the schema has no column for."""

    unseen_keys: set[str] = field(default_factory=set)
    unseen_count: int = 0


@dataclass
class Dataset:
    """Encoded samples plus the schema that shaped them."""

    schema: FeatureSchema
    x: list[list[int]]
    y: list[int]


def encode_dataset(records, schema: FeatureSchema) -> tuple[Dataset, EncodeReport]:
    """Encode every record, aggregating unknown-key sightings."""
    report = EncodeReport()
    x, y = [], []
    for rec in records:
        vector, unseen = encode_record(rec, schema)
        if unseen:
            report.unseen_keys |= unseen
            report.unseen_count += len(unseen)
        x.append(vector)
        y.append(rec.invasive)
    return Dataset(schema=schema, x=x, y=y), report


@dataclass
class SplitDataset:
    """Seeded train/test partition of an encoded dataset."""

    x_train: list[list[int]]
    x_test: list[list[int]]
    y_train: list[int]
    y_test: list[int]
    seed: int
    ratio: float
    generator: str = GENERATOR_NAME


def split_dataset(
    dataset: Dataset, ratio: float, seed: int, stratify: bool = False
) -> SplitDataset:
    """Shuffle with a seeded Fisher-Yates permutation and cut at floor(ratio*n).

    The same seed and ratio always produce the same partition. stratify=True
    shuffles and cuts within each label group instead (per-group floor),
    which keeps class balance at the cost of the exact global cut size.
    """
    n = len(dataset.x)
    if len(dataset.y) != n:
        raise ValueError(f"{n} samples but {len(dataset.y)} labels")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be strictly between 0 and 1")
    if n < 2:
        raise DegenerateSplitError("need at least 2 samples to split")
    if stratify:
        train_idx, test_idx = _stratified_indices(dataset.y, ratio, seed)
    else:
        order = permutation(n, seed)
        cut = math.floor(n * ratio + _RATIO_EPS)
        train_idx, test_idx = order[:cut], order[cut:]
    if not train_idx or not test_idx:
        raise DegenerateSplitError(
            f"ratio {ratio} leaves an empty train or test set for {n} samples"
        )
    return SplitDataset(
        x_train=[dataset.x[i] for i in train_idx],
        x_test=[dataset.x[i] for i in test_idx],
        y_train=[dataset.y[i] for i in train_idx],
        y_test=[dataset.y[i] for i in test_idx],
        seed=seed,
        ratio=ratio,
    )


def _stratified_indices(y, ratio: float, seed: int) -> tuple[list[int], list[int]]:
    """Per-label shuffles and cuts, all driven by one generator stream."""
    rng = SplitMix64(seed)
    train: list[int] = []
    test: list[int] = []
    for label in sorted(set(y)):
        group = [i for i, value in enumerate(y) if value == label]
        for i in range(len(group) - 1, 0, -1):
            j = rng.below(i + 1)
            group[i], group[j] = group[j], group[i]
        cut = math.floor(len(group) * ratio + _RATIO_EPS)
        train += group[:cut]
        test += group[cut:]
    return train, test


def schema_to_dict(schema: FeatureSchema) -> dict:
    """Plain-dict form used by JSON files and model bundles."""
    return {
        "version": schema.version,
        "feature_names": list(schema.feature_names),
        "schema_hash": schema.schema_hash,
    }


def schema_from_dict(doc: dict) -> FeatureSchema:
    """Rebuild a schema, verifying any stored hash against the names."""
    if not isinstance(doc, dict):
        raise SchemaError("schema must be a JSON object")
    names = doc.get("feature_names")
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise SchemaError("schema feature_names must be a list of strings")
    version = doc.get("version", 1)
    if not isinstance(version, int) or isinstance(version, bool):
        raise SchemaError("schema version must be an integer")
    schema = FeatureSchema(feature_names=tuple(names), version=version)
    stored = doc.get("schema_hash")
    if stored is not None and stored != schema.schema_hash:
        raise SchemaError(
            "stored schema_hash does not match the feature names "
            f"(stored {stored!r}, computed {schema.schema_hash!r})"
        )
    return schema

"""Self-describing model persistence.

A bundle pairs trained parameters with the exact feature schema that produced
them, plus hyperparameters and provenance. Serialization is canonical (sorted
keys, no whitespace, floats at 17 significant digits) so saving the same
bundle twice yields byte-identical files and a bundle's bytes can be diffed
or content-addressed.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .classifiers.logistic import LogisticHyper, LogisticModel
from .classifiers.svm import SvmHyper, SvmModel
from .classifiers.tree import (
    DecisionTreeModel,
    TreeHyper,
    tree_from_dict,
    tree_to_dict,
    validate_tree,
)
from .errors import DataError
from .features import FeatureSchema, schema_from_dict, schema_to_dict

FORMAT_VERSION = 1
BUNDLE_SUFFIX = ".pgmodel.json"
MODEL_KINDS = ("lr", "dt", "svm")

_TOP_KEYS = (
    "format_version",
    "model_kind",
    "schema",
    "model_payload",
    "hyper",
    "created_at",
    "training_fingerprint",
)


class BundleError(DataError):
    """Base for everything wrong with a model bundle."""


class MalformedBundleError(BundleError):
    """The bytes are not a structurally valid bundle."""


class UnsupportedVersionError(BundleError):
    """The bundle declares a format_version this code does not speak."""


class SchemaHashMismatchError(BundleError):
    """Stored hashes disagree with the feature names they claim to cover."""


@dataclass(frozen=True)
class ModelBundle:
    format_version: int
    model_kind: str
    schema: FeatureSchema
    model_payload: dict
    hyper: dict
    created_at: str
    training_fingerprint: str


def canonical_json(value) -> str:
    """Canonical rendering: sorted keys, compact separators, floats via %.17g.

    17 significant digits round-trip any IEEE double exactly, and the fixed
    format means equal values always produce equal bytes.
    """
    out: list[str] = []
    _encode(value, out)
    return "".join(out)


def _encode(value, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=True))
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise MalformedBundleError("non-finite numbers cannot be serialized")
        out.append(format(value, ".17g"))
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for idx, item in enumerate(value):
            if idx:
                out.append(",")
            _encode(item, out)
        out.append("]")
    elif isinstance(value, dict):
        out.append("{")
        for idx, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise MalformedBundleError(f"object keys must be strings, got {key!r}")
            if idx:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _encode(value[key], out)
        out.append("}")
    else:
        raise MalformedBundleError(f"cannot serialize a {type(value).__name__}")


def utc_timestamp(epoch: float | None = None) -> str:
    """ISO-8601 UTC timestamp at second precision, 'Z' suffix."""
    moment = (
        datetime.now(timezone.utc)
        if epoch is None
        else datetime.fromtimestamp(epoch, timezone.utc)
    )
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def build_timestamp() -> str:
    """Current timestamp, honoring SOURCE_DATE_EPOCH for reproducible output."""
    pinned = os.environ.get("SOURCE_DATE_EPOCH")
    if pinned is not None:
        try:
            return utc_timestamp(int(pinned))
        except (ValueError, OverflowError, OSError):
            pass
    return utc_timestamp()


def dataset_fingerprint(x, y) -> str:
    """Stable digest of an encoded dataset; row order is part of the identity."""
    h = hashlib.sha256()
    for vector, label in zip(x, y):
        line = ",".join(str(int(v)) for v in vector) + ";" + str(int(label)) + "\n"
        h.update(line.encode("ascii"))
    return h.hexdigest()


def bundle_for_model(
    model,
    schema: FeatureSchema,
    created_at: str | None = None,
    training_fingerprint: str = "",
    extra_hyper: dict | None = None,
) -> ModelBundle:
    """Wrap a trained model and its schema into a persistable bundle.

    A model already stamped with a different schema hash is refused; that
    skew would otherwise surface much later, at prediction time.
    """
    if model.schema_hash and model.schema_hash != schema.schema_hash:
        raise SchemaHashMismatchError(
            "model was trained against a different schema than the one being bundled"
        )
    if isinstance(model, LogisticModel):
        kind = "lr"
        payload = {
            "schema_hash": schema.schema_hash,
            "weights": [float(v) for v in model.weights],
            "bias": float(model.bias),
        }
        hyper = {
            "learning_rate": model.hyper.learning_rate,
            "iterations": model.hyper.iterations,
            "l2": model.hyper.l2,
        }
    elif isinstance(model, DecisionTreeModel):
        kind = "dt"
        payload = {
            "schema_hash": schema.schema_hash,
            "tree": tree_to_dict(model.root),
        }
        hyper = {
            "max_depth": model.hyper.max_depth,
            "min_samples": model.hyper.min_samples,
        }
    elif isinstance(model, SvmModel):
        kind = "svm"
        payload = {
            "schema_hash": schema.schema_hash,
            "weights": [float(v) for v in model.weights],
            "bias": float(model.bias),
            "lambda": model.hyper.lam,
        }
        hyper = {
            "lambda": model.hyper.lam,
            "iterations": model.hyper.iterations,
            "seed": model.hyper.seed,
        }
    else:
        raise TypeError(f"cannot bundle a {type(model).__name__}")
    if extra_hyper:
        hyper.update(extra_hyper)
    return ModelBundle(
        format_version=FORMAT_VERSION,
        model_kind=kind,
        schema=schema,
        model_payload=payload,
        hyper=hyper,
        created_at=created_at if created_at is not None else build_timestamp(),
        training_fingerprint=training_fingerprint,
    )


def bundle_to_dict(bundle: ModelBundle) -> dict:
    return {
        "format_version": bundle.format_version,
        "model_kind": bundle.model_kind,
        "schema": schema_to_dict(bundle.schema),
        "model_payload": bundle.model_payload,
        "hyper": bundle.hyper,
        "created_at": bundle.created_at,
        "training_fingerprint": bundle.training_fingerprint,
    }


def _check_payload(bundle: ModelBundle, exc_type) -> None:
    """Validate the kind-specific payload; raises exc_type on shape problems."""
    payload = bundle.model_payload
    if not isinstance(payload, dict):
        raise exc_type("model_payload must be an object")
    if payload.get("schema_hash") != bundle.schema.schema_hash:
        raise SchemaHashMismatchError(
            "model_payload.schema_hash does not match the bundled schema"
        )
    width = len(bundle.schema)
    if bundle.model_kind in ("lr", "svm"):
        weights = payload.get("weights")
        if not isinstance(weights, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in weights
        ):
            raise exc_type("weights must be a list of numbers")
        if len(weights) != width:
            raise exc_type(
                f"weights have length {len(weights)}, schema has {width} features"
            )
        if not all(math.isfinite(float(v)) for v in weights):
            raise exc_type("weights must be finite")
        bias = payload.get("bias")
        if not isinstance(bias, (int, float)) or isinstance(bias, bool) or not math.isfinite(float(bias)):
            raise exc_type("bias must be a finite number")
        if bundle.model_kind == "svm":
            lam = payload.get("lambda")
            if not isinstance(lam, (int, float)) or isinstance(lam, bool) or not float(lam) > 0:
                raise exc_type("lambda must be a positive number")
    elif bundle.model_kind == "dt":
        try:
            root = tree_from_dict(payload.get("tree"))
            validate_tree(root, width)
        except ValueError as exc:
            raise exc_type(f"invalid tree: {exc}") from exc
    else:
        raise exc_type(f"unknown model_kind {bundle.model_kind!r}")


def save_bundle(bundle: ModelBundle) -> bytes:
    """Canonical UTF-8 bytes for a bundle; equal bundles give equal bytes."""
    if bundle.model_kind not in MODEL_KINDS:
        raise BundleError(f"unknown model_kind {bundle.model_kind!r}")
    if not isinstance(bundle.hyper, dict):
        raise BundleError("hyper must be a dict")
    _check_payload(bundle, BundleError)
    return canonical_json(bundle_to_dict(bundle)).encode("utf-8")


def load_bundle(data) -> ModelBundle:
    """Parse and validate bundle bytes.

    Distinct failures get distinct errors: MalformedBundleError for broken
    structure, UnsupportedVersionError for a foreign format_version, and
    SchemaHashMismatchError when stored hashes disagree with the names.
    """
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedBundleError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedBundleError("bundle must be a JSON object")
    missing = [key for key in _TOP_KEYS if key not in doc]
    if missing:
        raise MalformedBundleError(f"bundle is missing keys: {', '.join(missing)}")

    version = doc["format_version"]
    if not isinstance(version, int) or isinstance(version, bool):
        raise MalformedBundleError("format_version must be an integer")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"bundle format_version {version} is not supported (expected {FORMAT_VERSION})"
        )

    kind = doc["model_kind"]
    if kind not in MODEL_KINDS:
        raise MalformedBundleError(f"unknown model_kind {kind!r}")

    schema_doc = doc["schema"]
    if not isinstance(schema_doc, dict):
        raise MalformedBundleError("schema must be an object")
    try:
        schema = schema_from_dict(
            {"feature_names": schema_doc.get("feature_names"), "version": schema_doc.get("version", 1)}
        )
    except DataError as exc:
        raise MalformedBundleError(str(exc)) from exc
    stored_hash = schema_doc.get("schema_hash")
    if stored_hash != schema.schema_hash:
        raise SchemaHashMismatchError(
            "schema.schema_hash does not match the feature names"
        )

    hyper = doc["hyper"]
    if not isinstance(hyper, dict):
        raise MalformedBundleError("hyper must be an object")
    created_at = doc["created_at"]
    fingerprint = doc["training_fingerprint"]
    if not isinstance(created_at, str) or not isinstance(fingerprint, str):
        raise MalformedBundleError("created_at and training_fingerprint must be strings")

    bundle = ModelBundle(
        format_version=version,
        model_kind=kind,
        schema=schema,
        model_payload=doc["model_payload"],
        hyper=hyper,
        created_at=created_at,
        training_fingerprint=fingerprint,
    )
    _check_payload(bundle, MalformedBundleError)
    return bundle


def model_from_bundle(bundle: ModelBundle):
    """Reconstruct the typed model a bundle describes."""
    payload = bundle.model_payload
    hyper = bundle.hyper
    if bundle.model_kind == "lr":
        return LogisticModel(
            weights=np.asarray(payload["weights"], dtype=float),
            bias=float(payload["bias"]),
            schema_hash=payload["schema_hash"],
            hyper=LogisticHyper(
                learning_rate=float(hyper.get("learning_rate", 0.1)),
                iterations=int(hyper.get("iterations", 5000)),
                l2=float(hyper.get("l2", 0.0)),
            ),
        )
    if bundle.model_kind == "dt":
        depth = hyper.get("max_depth")
        return DecisionTreeModel(
            root=tree_from_dict(payload["tree"]),
            schema_hash=payload["schema_hash"],
            hyper=TreeHyper(
                max_depth=None if depth is None else int(depth),
                min_samples=int(hyper.get("min_samples", 2)),
            ),
            n_features=len(bundle.schema),
        )
    if bundle.model_kind == "svm":
        iterations = hyper.get("iterations")
        return SvmModel(
            weights=np.asarray(payload["weights"], dtype=float),
            bias=float(payload["bias"]),
            schema_hash=payload["schema_hash"],
            hyper=SvmHyper(
                lam=float(payload["lambda"]),
                iterations=None if iterations is None else int(iterations),
                seed=int(hyper.get("seed", 42)),
            ),
        )
    raise BundleError(f"unknown model_kind {bundle.model_kind!r}")


def save_bundle_file(bundle: ModelBundle, path) -> None:
    Path(path).write_bytes(save_bundle(bundle))


def load_bundle_file(path) -> ModelBundle:
    return load_bundle(Path(path).read_bytes())

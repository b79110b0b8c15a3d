"""Strict prediction endpoints over loaded model bundles.

The request DTO is the feature schema, nothing more: a flat JSON object with
exactly one 0/1 integer per feature name. Missing keys, extra keys, floats,
booleans, and strings are all rejected, each named in the response. Handlers
share nothing mutable, so any number of concurrent requests see the same
models and produce the same answers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .bundle import MODEL_KINDS, BundleError, ModelBundle, load_bundle_file, model_from_bundle
from .features import FeatureSchema


class DtoValidationError(Exception):
    """The request body does not match the schema contract exactly."""

    def __init__(self, missing=(), unexpected=(), invalid=(), reason: str | None = None):
        self.missing = sorted(missing)
        self.unexpected = sorted(unexpected)
        self.invalid = sorted(invalid)
        self.reason = reason or (
            "payload must carry exactly the schema's feature names with integer 0/1 values"
        )
        super().__init__(self.reason)

    @property
    def fields(self) -> list[str]:
        return sorted({*self.missing, *self.unexpected, *self.invalid})


class ModelUnavailableError(Exception):
    """The route exists but no model of that kind is loaded."""


def validate_dto(body, schema: FeatureSchema) -> list[int]:
    """Check a request body against the schema and return the ordered vector.

    Values must be the integers 0 or 1; booleans and floats do not count,
    even when they would compare equal.
    """
    if not isinstance(body, dict):
        raise DtoValidationError(reason="payload must be a JSON object")
    wanted = set(schema.feature_names)
    got = set(body)
    missing = wanted - got
    unexpected = got - wanted
    invalid = {
        name
        for name in wanted & got
        if type(body[name]) is not int or body[name] not in (0, 1)
    }
    if missing or unexpected or invalid:
        raise DtoValidationError(missing=missing, unexpected=unexpected, invalid=invalid)
    return [body[name] for name in schema.feature_names]


@dataclass(frozen=True)
class LoadedModel:
    kind: str
    bundle: ModelBundle
    model: object


def load_models(paths: Mapping[str, str]) -> dict[str, LoadedModel]:
    """Load one bundle file per route kind; kind and bundle must agree."""
    loaded = {}
    for kind, path in paths.items():
        if kind not in MODEL_KINDS:
            raise BundleError(f"unknown model kind {kind!r}")
        bundle = load_bundle_file(path)
        if bundle.model_kind != kind:
            raise BundleError(
                f"route {kind} was given a {bundle.model_kind} bundle ({path})"
            )
        loaded[kind] = LoadedModel(kind=kind, bundle=bundle, model=model_from_bundle(bundle))
    return loaded


def handle_predict(models: Mapping[str, LoadedModel], kind: str, body) -> dict:
    """Pure prediction handler; the HTTP layer only transports its result."""
    entry = models.get(kind)
    if entry is None:
        raise ModelUnavailableError(f"no {kind} model is loaded")
    vector = validate_dto(body, entry.bundle.schema)
    return {
        "prediction": entry.model.predict(vector),
        "model_kind": kind,
        "schema_version": entry.bundle.schema.version,
    }


def create_app(models: Mapping[str, LoadedModel]) -> FastAPI:
    """FastAPI application serving health and per-kind prediction routes."""
    app = FastAPI(title="privacyguard", docs_url=None, redoc_url=None)

    @app.get("/api/health")
    async def health():
        return {"status": "ok", "models": [k for k in MODEL_KINDS if k in models]}

    @app.post("/api/predict/{kind}")
    async def predict(kind: str, request: Request):
        if kind not in MODEL_KINDS:
            return JSONResponse(
                status_code=404,
                content={"error": "unknown-model-kind", "model_kind": kind},
            )
        try:
            body = await request.json()
        except Exception:
            return JSONResponse(status_code=400, content={"error": "malformed-json"})
        try:
            return handle_predict(models, kind, body)
        except ModelUnavailableError:
            return JSONResponse(
                status_code=503,
                content={"error": "model-unavailable", "model_kind": kind},
            )
        except DtoValidationError as exc:
            return JSONResponse(
                status_code=422,
                content={
                    "error": "validation",
                    "fields": exc.fields,
                    "missing": exc.missing,
                    "unexpected": exc.unexpected,
                    "invalid": exc.invalid,
                    "reason": exc.reason,
                },
            )

    return app

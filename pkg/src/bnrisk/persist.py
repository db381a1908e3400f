"""Versioned JSON persistence for schemas, DAGs, and fitted models.

The model document carries the schema, structure, full-precision
hyperparameters, the prior weight, and provenance, plus a sha256 content
checksum. Loading verifies the checksum and the major format version and
tolerates unknown fields, so documents written by later 1.x writers stay
readable. JSON float round-tripping is exact for IEEE doubles, which keeps
save/load lossless bit for bit.
"""

from __future__ import annotations

import hashlib
import json
from typing import Mapping

import numpy as np

from .model import ArcConstraints, Dag, NetworkSchema, Variable
from .params import ParameterPosterior

FORMAT_VERSION = "1.0"


class PersistError(ValueError):
    """Unreadable, tampered, or incompatible document."""


def _checksum(payload: Mapping) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _check_version(doc: Mapping, expected_format: str) -> None:
    if doc.get("format") != expected_format:
        raise PersistError(f"not a {expected_format} document")
    version = str(doc.get("format_version", ""))
    major = version.split(".", 1)[0]
    if major != FORMAT_VERSION.split(".", 1)[0]:
        raise PersistError(f"unsupported format version {version!r}")


def schema_to_obj(schema: NetworkSchema) -> dict:
    return {"variables": [{"name": v.name, "states": list(v.states)} for v in schema.variables]}


def schema_from_obj(obj: Mapping) -> NetworkSchema:
    return NetworkSchema(
        Variable(v["name"], tuple(v["states"])) for v in obj["variables"]
    )


def dag_to_obj(dag: Dag) -> dict:
    return {"nodes": list(dag.nodes), "arcs": sorted([list(a) for a in dag.arcs])}


def dag_from_obj(obj: Mapping) -> Dag:
    return Dag(obj["nodes"], [tuple(a) for a in obj["arcs"]])


def save_dag(dag: Dag, schema: NetworkSchema, path) -> None:
    doc = {
        "format": "bnrisk-dag",
        "format_version": FORMAT_VERSION,
        "schema": schema_to_obj(schema),
        "dag": dag_to_obj(dag),
    }
    doc["checksum"] = _checksum({k: v for k, v in doc.items()})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)


def load_dag(path) -> tuple[Dag, NetworkSchema]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    _check_version(doc, "bnrisk-dag")
    _verify_checksum(doc)
    return dag_from_obj(doc["dag"]), schema_from_obj(doc["schema"])


def _verify_checksum(doc: Mapping) -> None:
    stored = doc.get("checksum")
    if stored is None:
        raise PersistError("document has no checksum")
    body = {k: v for k, v in doc.items() if k != "checksum"}
    if _checksum(body) != stored:
        raise PersistError("checksum mismatch: document was modified or corrupted")


def save_model(posterior: ParameterPosterior, path) -> None:
    """Write a fitted model as a checksummed JSON document."""
    doc = model_to_obj(posterior)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def model_to_obj(posterior: ParameterPosterior) -> dict:
    doc = {
        "format": "bnrisk-model",
        "format_version": FORMAT_VERSION,
        "schema": schema_to_obj(posterior.schema),
        "dag": dag_to_obj(posterior.dag),
        "alpha": float(posterior.alpha),
        "provenance": list(posterior.provenance),
        "prior_hyper": {
            name: [[float(x) for x in row] for row in posterior.prior_hyper[name]]
            for name in posterior.schema.names
        },
        "counts": {
            name: [[int(x) for x in row] for row in posterior.counts[name]]
            for name in posterior.schema.names
        },
    }
    doc["checksum"] = _checksum(doc)
    return doc


def load_model(path) -> ParameterPosterior:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return model_from_obj(doc)


def model_from_obj(doc: Mapping) -> ParameterPosterior:
    _check_version(doc, "bnrisk-model")
    _verify_checksum(doc)
    schema = schema_from_obj(doc["schema"])
    dag = dag_from_obj(doc["dag"])
    prior = {name: np.array(rows, dtype=np.float64) for name, rows in doc["prior_hyper"].items()}
    counts = {name: np.array(rows, dtype=np.int64) for name, rows in doc["counts"].items()}
    return ParameterPosterior(
        schema,
        dag,
        prior,
        float(doc["alpha"]),
        provenance=tuple(doc.get("provenance", ())),
        counts=counts,
    )


def model_id(posterior: ParameterPosterior) -> str:
    """Stable identifier: the checksum of the serialized document."""
    return model_to_obj(posterior)["checksum"]


def save_constraints(constraints: ArcConstraints, path) -> None:
    doc = {
        "format": "bnrisk-constraints",
        "format_version": FORMAT_VERSION,
        "required": sorted([list(a) for a in constraints.required]),
        "forbidden": sorted([list(a) for a in constraints.forbidden]),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)


def load_constraints(path) -> ArcConstraints:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    _check_version(doc, "bnrisk-constraints")
    return ArcConstraints(
        required=frozenset(tuple(a) for a in doc.get("required", ())),
        forbidden=frozenset(tuple(a) for a in doc.get("forbidden", ())),
    )


def save_schema(schema: NetworkSchema, path) -> None:
    doc = {
        "format": "bnrisk-schema",
        "format_version": FORMAT_VERSION,
        "schema": schema_to_obj(schema),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)


def load_schema(path) -> NetworkSchema:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    _check_version(doc, "bnrisk-schema")
    return schema_from_obj(doc["schema"])

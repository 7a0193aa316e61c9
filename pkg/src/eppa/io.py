"""JSON instance envelopes and result documents.

An instance file holds ``{"kind", "payload", "options"}``.  Results carry a
digest of the instance payload so a result can be matched to its input.
All scalars travel as ``"p/q"`` or ``"p/q+r/s*sqrt(d)"`` strings.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from . import freegroup as fg
from .errors import MalformedInputError
from .hilbert import PartialLinearIsometry, QuadraticSpace
from .malg import Algebra
from .metric import DistanceTable, ExtensionResult, FiniteMetricSpace, validate_space
from .scalar import format_scalar, parse_scalar

KINDS = ("metric", "malg", "hilbert")

DEFAULT_OPTIONS = {
    "budget_order": fg.DEFAULT_BUDGET_ORDER,
    "max_degree": fg.DEFAULT_MAX_DEGREE,
    "oracle_depth": 8,
    "seed": 0,
}

OPTION_RANGES = {
    "budget_order": (1, 10**7),
    "max_degree": (1, 12),
    "oracle_depth": (0, 64),
    "seed": (0, 2**63 - 1),
}


@dataclass
class Envelope:
    kind: str
    payload: dict
    options: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        return payload_digest(self.kind, self.payload)


def payload_digest(kind: str, payload: Any) -> str:
    text = json.dumps({"kind": kind, "payload": payload}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def dumps(doc: Mapping) -> str:
    """Canonical text for output files: stable key order, trailing newline."""
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def load_json(path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInputError(f"cannot read {path}: {exc}") from exc


def parse_envelope(data: Any) -> Envelope:
    if not isinstance(data, dict):
        raise MalformedInputError("instance must be a JSON object")
    kind = data.get("kind")
    if kind not in KINDS:
        raise MalformedInputError(f"kind must be one of {', '.join(KINDS)}")
    payload = data.get("payload")
    if not isinstance(payload, dict):
        raise MalformedInputError("payload must be a JSON object")
    options = data.get("options") or {}
    if not isinstance(options, dict):
        raise MalformedInputError("options must be a JSON object")
    for key, value in options.items():
        if key not in OPTION_RANGES:
            raise MalformedInputError(f"unknown option {key!r}")
        lo, hi = OPTION_RANGES[key]
        if not isinstance(value, int) or isinstance(value, bool) or not lo <= value <= hi:
            raise MalformedInputError(f"option {key!r} must be an integer in [{lo}, {hi}]")
    return Envelope(kind, payload, dict(options))


def resolve_options(envelope: Envelope, overrides: Mapping) -> dict:
    """Defaults, then envelope options, then explicit command-line values."""
    out = dict(DEFAULT_OPTIONS)
    out.update(envelope.options)
    out.update({k: v for k, v in overrides.items() if v is not None})
    for key, value in out.items():
        lo, hi = OPTION_RANGES[key]
        if not lo <= value <= hi:
            raise MalformedInputError(f"option {key!r} must be in [{lo}, {hi}]")
    return out


# ----------------------------------------------------------------------
# metric


def parse_metric(payload: Mapping) -> tuple[FiniteMetricSpace, list]:
    try:
        points = payload["points"]
        rows = payload["d"]
        raw_maps = payload.get("partial_isometries", [])
    except (KeyError, TypeError) as exc:
        raise MalformedInputError(f"metric payload needs points and d: {exc}") from exc
    if not isinstance(points, list) or not isinstance(rows, list) or len(rows) != len(points):
        raise MalformedInputError("d must be a square matrix matching points")
    if any(not isinstance(r, list) or len(r) != len(points) for r in rows):
        raise MalformedInputError("d must be a square matrix matching points")
    labels = [str(p) for p in points]
    d = [[parse_scalar(str(v)) for v in row] for row in rows]
    space = validate_space(labels, d)
    maps = []
    for entry in raw_maps:
        mapping = entry.get("map") if isinstance(entry, dict) else None
        if not isinstance(mapping, dict):
            raise MalformedInputError("each partial isometry needs a map object")
        try:
            maps.append({space.index(str(a)): space.index(str(b)) for a, b in mapping.items()})
        except (KeyError, ValueError) as exc:
            raise MalformedInputError(f"unknown point in partial isometry: {exc}") from exc
    return space, maps


def metric_result_doc(envelope: Envelope, result: ExtensionResult) -> dict:
    space = result.space
    labels = space.labels
    return {
        "kind": "metric",
        "instance_digest": envelope.digest,
        "status": "ok",
        "classes": [[[labels[p], k] for p, k in cls] for cls in result.classes],
        "d_Y": result.dY.to_rows(),
        "generators": [list(perm) for perm in result.perms],
        "embedding": {labels[x]: result.embedding[x] for x in space.points},
        "quotient": result.quotient.to_json(),
        "certificate": result.certificate,
    }


def metric_result_from_doc(space: FiniteMetricSpace, maps: list, doc: Mapping) -> ExtensionResult:
    """Rebuild an :class:`ExtensionResult` from a result document (no recomputation)."""
    try:
        n = len(maps)
        quotient = fg.FiniteQuotient.from_json(doc["quotient"], n)
        elements = quotient.elements(10**7)
        classes = [tuple((space.index(lbl), int(k)) for lbl, k in cls) for cls in doc["classes"]]
        dY = DistanceTable.from_rows([[parse_scalar(v) for v in row] for row in doc["d_Y"]])
        perms = [list(map(int, p)) for p in doc["generators"]]
        embedding = [int(doc["embedding"][lbl]) for lbl in space.labels]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError(f"malformed metric result: {exc}") from exc
    if len(dY) != len(classes) or len(perms) != n:
        raise MalformedInputError("result sizes do not match the instance")
    return ExtensionResult(space, maps, quotient, elements, classes, dY, perms, embedding,
                           doc.get("certificate", {}))


# ----------------------------------------------------------------------
# measure algebras


def parse_malg(payload: Mapping) -> Algebra:
    try:
        return Algebra.from_json(payload)
    except (KeyError, TypeError) as exc:
        raise MalformedInputError(f"malg payload needs cells and atoms: {exc}") from exc


# ----------------------------------------------------------------------
# inner-product spaces


def _vectors(space: QuadraticSpace, value, subspaces: Mapping) -> list:
    if isinstance(value, str):
        if value not in subspaces:
            raise MalformedInputError(f"unknown subspace {value!r}")
        value = subspaces[value]
    if not isinstance(value, list):
        raise MalformedInputError("vectors must be a list of coordinate lists")
    out = []
    for v in value:
        if not isinstance(v, list) or len(v) != space.dim:
            raise MalformedInputError("vector length does not match dim")
        out.append(tuple(parse_scalar(str(x)) for x in v))
    return out


def parse_hilbert(payload: Mapping) -> tuple[QuadraticSpace, PartialLinearIsometry, dict]:
    try:
        dim = int(payload["dim"])
        gram = [[parse_scalar(str(x)) for x in row] for row in payload["gram"]]
        subspaces = payload.get("subspaces", {})
        raw_map = payload["map"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError(f"hilbert payload needs dim, gram and map: {exc}") from exc
    if len(gram) != dim:
        raise MalformedInputError("gram size does not match dim")
    space = QuadraticSpace(gram)
    named = {name: _vectors(space, vs, {}) for name, vs in subspaces.items()}
    domain = _vectors(space, raw_map.get("domain", []), subspaces)
    images = _vectors(space, raw_map.get("images", []), subspaces)
    phi = PartialLinearIsometry.build(space, domain, images)
    return space, phi, named


def matrix_to_json(M) -> list:
    return [[format_scalar(x) for x in row] for row in M]


def matrix_from_json(rows) -> tuple:
    try:
        return tuple(tuple(parse_scalar(str(x)) for x in row) for row in rows)
    except TypeError as exc:
        raise MalformedInputError(f"malformed matrix: {exc}") from exc

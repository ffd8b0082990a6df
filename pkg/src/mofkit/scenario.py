"""JSON scenario files: a mof space, named fields, covers and tolerance overrides."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import algebra as alg
from .algebra import AlgebraSignature, DEFAULT_TOL, State, TensorSignature, ToleranceConfig
from .continuous import Cover, ball_cover, make_cover
from .errors import DimensionMismatch, MofkitError, ParseError, SchemaVersionMismatch, StructureViolation
from .lipschitz import OperatorField
from .mof import MofSpace

SCHEMA_VERSION = "1.0"


@dataclass
class Scenario:
    mof: MofSpace
    fields: dict = field(default_factory=dict)
    covers: list = field(default_factory=list)
    seed: int | None = None
    meta: dict = field(default_factory=dict)
    digest: str = ""


def encode_matrix(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in a]


def decode_matrix(data, where: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: matrix entries must be [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ParseError(f"{where}: expected a square matrix of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _require(doc: dict, key: str, kind, where: str = "scenario"):
    if key not in doc:
        raise ParseError(f"{where}: missing key {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise ParseError(f"{where}: {key!r} has the wrong type")
    return value


def _element(sig, data, where: str) -> alg.AlgebraElement:
    mat = decode_matrix(data, where)
    if mat.shape[0] != sig.total_dim:
        raise DimensionMismatch(f"{where}: matrix is {mat.shape[0]}x{mat.shape[0]}, "
                                f"expected {sig.total_dim}x{sig.total_dim}")
    try:
        return alg.AlgebraElement(sig, mat)
    except MofkitError as exc:
        raise type(exc)(f"{where}: {exc}") from exc


def scenario_from_dict(doc: dict, tol: ToleranceConfig | None = None, digest: str = "") -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a JSON object")
    version = _require(doc, "schema_version", str)
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"schema_version {version!r}; this tool reads {SCHEMA_VERSION!r}")
    points = _require(doc, "points", list)
    if not all(isinstance(p, str) for p in points):
        raise ParseError("points must be strings")
    algebras = _require(doc, "algebras", dict)
    bundle = {}
    for p in points:
        if p not in algebras:
            raise StructureViolation(f"algebras: no algebra for point {p!r}")
        try:
            bundle[p] = AlgebraSignature(tuple(int(b) for b in algebras[p]))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"algebras[{p!r}]: {exc}") from exc

    overrides = doc.get("tolerances") or {}
    base_tol = tol if tol is not None else DEFAULT_TOL
    try:
        tol = base_tol.with_overrides(**{k: float(v) for k, v in overrides.items()})
    except (TypeError, ValueError) as exc:
        raise ParseError(f"tolerances: {exc}") from exc

    D = {}
    for k, entry in enumerate(_require(doc, "D", list)):
        where = f"D[{k}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected an object")
        pair = _require(entry, "pair", list, where)
        if len(pair) != 2 or any(p not in bundle for p in pair):
            raise StructureViolation(f"{where}: pair {pair!r} does not name two points")
        x, y = pair
        sig = TensorSignature((bundle[x], bundle[y]))
        D[(x, y)] = _element(sig, _require(entry, "matrix", list, where), f"D{(x, y)!r}")

    raw_states = _require(doc, "states", dict)
    states = {}
    for p in points:
        if p not in raw_states:
            raise StructureViolation(f"states: no metric state for point {p!r}")
        mat = decode_matrix(raw_states[p], f"states[{p!r}]")
        if mat.shape[0] != bundle[p].total_dim:
            raise DimensionMismatch(f"states[{p!r}]: wrong size {mat.shape[0]}")
        states[p] = State(bundle[p], mat, tol=tol)

    m = MofSpace(points, bundle, D, states, doc.get("base_point"), tol)

    fields = {}
    for name, values in (doc.get("fields") or {}).items():
        if not isinstance(values, dict):
            raise ParseError(f"fields[{name!r}]: expected a map point -> matrix")
        vals = {}
        for p in points:
            if p not in values:
                raise StructureViolation(f"fields[{name!r}]: no value at {p!r}")
            vals[p] = _element(bundle[p], values[p], f"fields[{name!r}][{p!r}]")
        fields[name] = OperatorField(m, vals)

    covers = []
    for k, c in enumerate(doc.get("covers") or []):
        where = f"covers[{k}]"
        if "radius" in c:
            covers.append(ball_cover(m, float(c["radius"])))
        else:
            sets = _require(c, "sets", list, where)
            covers.append(make_cover(points, sets, c.get("bumps"), tol.eq))
    seed = doc.get("seed")
    return Scenario(m, fields, covers, None if seed is None else int(seed), dict(doc.get("meta") or {}), digest)


def digest_bytes(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def load_scenario(path, tol: ToleranceConfig | None = None) -> Scenario:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return scenario_from_dict(doc, tol, digest_bytes(data))


def scenario_to_dict(m: MofSpace, fields: dict | None = None, covers=None, seed=None, meta=None) -> dict:
    """Serialise a mof whose fibers are plain block signatures and whose points are strings."""
    for p in m.points:
        if not isinstance(p, str):
            raise StructureViolation(f"point {p!r} is not a string")
        if not isinstance(m.bundle[p], AlgebraSignature):
            raise StructureViolation(f"fiber at {p!r} is a tensor product; flatten it first")
    doc = {
        "schema_version": SCHEMA_VERSION,
        "points": list(m.points),
        "base_point": m.base_point,
        "algebras": {p: list(m.bundle[p].blocks) for p in m.points},
        "D": [{"pair": [x, y], "matrix": encode_matrix(v.matrix)} for (x, y), v in m.stored_items()],
        "states": {p: encode_matrix(m.metric_states[p].rho) for p in m.points},
        "fields": {name: {p: encode_matrix(f[p].matrix) for p in m.points}
                   for name, f in (fields or {}).items()},
    }
    if covers:
        doc["covers"] = [c if isinstance(c, dict) else _cover_dict(c) for c in covers]
    if seed is not None:
        doc["seed"] = int(seed)
    if meta:
        doc["meta"] = meta
    return doc


def _cover_dict(c: Cover) -> dict:
    return {"sets": [sorted(U) for U in c.sets], "bumps": [dict(sorted(h.items())) for h in c.bumps]}


def dumps(doc: dict) -> str:
    # json writes floats with repr, which round-trips bit for bit.
    return json.dumps(doc, indent=1) + "\n"


def save_scenario(path, doc: dict) -> None:
    Path(path).write_text(dumps(doc))

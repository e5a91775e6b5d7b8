"""JSON IFS spec files.

::

    {
      "name": "sierpinski",
      "dimension": 2,
      "maps": [
        {"ratio": 0.5, "shift": [0, 0]},
        {"ratio": 0.5, "rotation_degrees": 90, "reflection": false, "shift": [0.5, 0]},
        {"ratio": 0.5, "ortho": [[1, 0], [0, 1]], "shift": [0.25, 0.5]}
      ],
      "certificate": [[0, 0], [1, 0], [0.5, 1]],
      "labels": ["f1", "f2", "f3"]
    }

``rotation_degrees`` is a planar shorthand; ``reflection`` flips the second
axis (the only axis on the line) before rotating.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ifs_core import IFS, Similarity
from .osc_certificate import ConvexPolygon

TOP_FIELDS = {"name", "dimension", "maps", "certificate", "labels"}
MAP_FIELDS = {"ratio", "shift", "ortho", "rotation_degrees", "reflection", "label"}


class SpecError(ValueError):
    def __init__(self, location: str, message: str):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


@dataclass(frozen=True)
class IfsSpec:
    ifs: IFS
    certificate: ConvexPolygon | None
    labels: list[str]
    name: str | None
    sha256: str


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(where, f"expected a number, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise SpecError(where, "must be finite")
    return x


def _vector(value, length: int, where: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != length:
        raise SpecError(where, f"expected a list of {length} numbers")
    return np.array([_number(x, f"{where}[{i}]") for i, x in enumerate(value)])


def _rotation(degrees: float) -> np.ndarray:
    quarter = degrees / 90.0
    if quarter == round(quarter):
        c, s = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][int(round(quarter)) % 4]
    else:
        t = math.radians(degrees)
        c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s], [s, c]])


def _ortho(entry: dict, d: int, where: str) -> np.ndarray:
    has_rot = "rotation_degrees" in entry
    reflection = entry.get("reflection", False)
    if not isinstance(reflection, bool):
        raise SpecError(f"{where}.reflection", "expected true or false")
    if "ortho" in entry:
        if has_rot or "reflection" in entry:
            raise SpecError(f"{where}.ortho", "give either ortho or rotation_degrees/reflection, not both")
        rows = entry["ortho"]
        if not isinstance(rows, list) or len(rows) != d:
            raise SpecError(f"{where}.ortho", f"expected {d} rows")
        return np.array([_vector(r, d, f"{where}.ortho[{i}]") for i, r in enumerate(rows)])
    if has_rot and d != 2:
        raise SpecError(f"{where}.rotation_degrees", "only available when dimension is 2")
    q = _rotation(_number(entry["rotation_degrees"], f"{where}.rotation_degrees")) if has_rot else np.eye(d)
    if reflection:
        if d > 2:
            raise SpecError(f"{where}.reflection", "only available when dimension is 1 or 2; use ortho")
        flip = np.eye(d)
        flip[-1, -1] = -1.0
        q = q @ flip
    return q


def parse_spec(doc, sha256: str = "") -> IfsSpec:
    if not isinstance(doc, dict):
        raise SpecError("", "spec must be a JSON object")
    for key in doc:
        if key not in TOP_FIELDS:
            raise SpecError(key, "unknown field")
    if "dimension" not in doc:
        raise SpecError("dimension", "missing")
    d = doc["dimension"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise SpecError("dimension", f"expected a positive integer, got {d!r}")
    maps_doc = doc.get("maps")
    if not isinstance(maps_doc, list) or not maps_doc:
        raise SpecError("maps", "expected a non-empty list")

    maps, labels = [], []
    for i, entry in enumerate(maps_doc):
        where = f"maps[{i}]"
        if not isinstance(entry, dict):
            raise SpecError(where, "expected an object")
        for key in entry:
            if key not in MAP_FIELDS:
                raise SpecError(f"{where}.{key}", "unknown field")
        for key in ("ratio", "shift"):
            if key not in entry:
                raise SpecError(f"{where}.{key}", "missing")
        ratio = _number(entry["ratio"], f"{where}.ratio")
        shift = _vector(entry["shift"], d, f"{where}.shift")
        q = _ortho(entry, d, where)
        try:
            maps.append(Similarity(ratio, q, shift))
        except ValueError as exc:
            raise SpecError(where, str(exc)) from None
        labels.append(str(entry.get("label", f"f{i + 1}")))

    if "labels" in doc:
        given = doc["labels"]
        if not isinstance(given, list) or len(given) != len(maps) or not all(isinstance(x, str) for x in given):
            raise SpecError("labels", f"expected {len(maps)} strings")
        labels = list(given)

    certificate = None
    if "certificate" in doc:
        if d != 2:
            raise SpecError("certificate", "certificate verification requires d = 2")
        pts = doc["certificate"]
        if not isinstance(pts, list):
            raise SpecError("certificate", "expected a list of [x, y] vertices")
        verts = [_vector(p, 2, f"certificate[{j}]") for j, p in enumerate(pts)]
        try:
            certificate = ConvexPolygon(verts)
        except ValueError as exc:
            raise SpecError("certificate", str(exc)) from None

    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise SpecError("name", "expected a string")
    return IfsSpec(IFS(maps), certificate, labels, name, sha256)


def load_spec(path) -> IfsSpec:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise SpecError(str(path), f"cannot read: {exc.strerror}") from None
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SpecError(str(path), f"invalid JSON: {exc}") from None
    return parse_spec(doc, hashlib.sha256(raw).hexdigest())

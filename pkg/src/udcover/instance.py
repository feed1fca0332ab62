"""Problem instances, solutions, JSON persistence, generators and the MWDS reduction."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .geom import TOL, Disk, Point, dist

# provenance tags for Solution.trace
GUESS = "GUESS"
GADGET = "GADGET"
CUT = "CUT"
DP = "DP"
BASELINE = "BASELINE"
STAGES = (GUESS, GADGET, CUT, DP, BASELINE)


class ParseError(Exception):
    pass


class ValidationError(Exception):
    pass


class Infeasible(Exception):
    """Some point cannot be covered by the available disks."""


@dataclass(frozen=True)
class Instance:
    disks: tuple[Disk, ...]
    points: tuple[Point, ...]
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "disks", tuple(self.disks))
        object.__setattr__(self, "points", tuple(Point(float(p[0]), float(p[1])) for p in self.points))
        object.__setattr__(self, "meta", dict(self.meta))
        seen = set()
        for d in self.disks:
            if d.id in seen:
                raise ValidationError(f"duplicate disk id {d.id}")
            seen.add(d.id)
        for k, p in enumerate(self.points):
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise ValidationError(f"point {k} has non-finite coordinates")

    @property
    def n(self) -> int:
        return len(self.disks)

    @property
    def m(self) -> int:
        return len(self.points)

    def disk(self, disk_id: int) -> Disk:
        return self.by_id()[disk_id]

    def by_id(self) -> dict[int, Disk]:
        cache = self.__dict__.get("_by_id")
        if cache is None:
            cache = {d.id: d for d in self.disks}
            object.__setattr__(self, "_by_id", cache)
        return cache

    def is_dense(self) -> bool:
        return sorted(d.id for d in self.disks) == list(range(self.n))

    def restrict(self, point_idx: Iterable[int], disk_ids: Iterable[int]) -> "Instance":
        """Sub-instance keeping original disk ids (ids are then no longer dense)."""
        ids = set(disk_ids)
        return Instance(
            tuple(d for d in self.disks if d.id in ids),
            tuple(self.points[k] for k in point_idx),
            dict(self.meta),
        )

    def covering(self, p: Sequence[float], tol: float = TOL) -> list[int]:
        return [d.id for d in self.disks if dist(p, d.center) <= 1.0 + tol]


@dataclass(frozen=True)
class Solution:
    disk_ids: frozenset[int]
    total_weight: float
    trace: Mapping[int, str] = field(default_factory=dict)

    @staticmethod
    def build(instance: Instance, ids: Iterable[int], trace: Mapping[int, str] | None = None,
              default: str = BASELINE) -> "Solution":
        ids = frozenset(ids)
        table = instance.by_id()
        missing = [i for i in ids if i not in table]
        if missing:
            raise ValidationError(f"unknown disk ids {sorted(missing)}")
        tr = {i: (trace or {}).get(i, default) for i in sorted(ids)}
        return Solution(ids, weight_of(instance, ids), tr)

    def to_json(self) -> dict:
        return {
            "disk_ids": sorted(self.disk_ids),
            "weight": self.total_weight,
            "trace": {str(i): self.trace[i] for i in sorted(self.disk_ids)},
        }


def weight_of(instance: Instance, ids: Iterable[int]) -> float:
    """Sum of weights in id order, so equal sets always give identical floats."""
    table = instance.by_id()
    return math.fsum(table[i].weight for i in sorted(set(ids)))


def uncovered_points(instance: Instance, ids: Iterable[int], tol: float = TOL) -> list[int]:
    centers = [instance.disk(i).center for i in ids]
    out = []
    for k, p in enumerate(instance.points):
        if not any(dist(p, c) <= 1.0 + tol for c in centers):
            out.append(k)
    return out


def is_cover(instance: Instance, ids: Iterable[int], tol: float = TOL) -> bool:
    return not uncovered_points(instance, ids, tol)


def is_feasible(instance: Instance, tol: float = TOL) -> bool:
    return is_cover(instance, [d.id for d in instance.disks], tol)


# ---------------------------------------------------------------- persistence

def to_dict(instance: Instance) -> dict:
    return {
        "disks": [
            {"id": d.id, "x": float(d.center.x), "y": float(d.center.y), "w": float(d.weight)}
            for d in sorted(instance.disks, key=lambda d: d.id)
        ],
        "points": [{"x": float(p.x), "y": float(p.y)} for p in instance.points],
        "meta": {str(k): str(v) for k, v in sorted(instance.meta.items())},
    }


def dumps(instance: Instance) -> str:
    # json uses repr for floats, which is the shortest round-trip decimal
    return json.dumps(to_dict(instance), indent=1, allow_nan=False) + "\n"


def _num(obj: dict, key: str, where: str) -> float:
    if key not in obj:
        raise ParseError(f"{where}: missing field '{key}'")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: field '{key}' is not a number")
    v = float(v)
    if not math.isfinite(v):
        raise ValidationError(f"{where}: field '{key}' is not finite")
    return v


def from_dict(data: object) -> Instance:
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    disks_raw = data.get("disks", [])
    points_raw = data.get("points", [])
    if not isinstance(disks_raw, list) or not isinstance(points_raw, list):
        raise ParseError("'disks' and 'points' must be arrays")
    disks = []
    seen = set()
    for k, obj in enumerate(disks_raw):
        where = f"disks[{k}]"
        if not isinstance(obj, dict):
            raise ParseError(f"{where}: not an object")
        if "id" not in obj or isinstance(obj["id"], bool) or not isinstance(obj["id"], int):
            raise ParseError(f"{where}: field 'id' must be an integer")
        did = obj["id"]
        if did in seen:
            raise ValidationError(f"{where}: duplicate id {did}")
        seen.add(did)
        x, y, w = _num(obj, "x", where), _num(obj, "y", where), _num(obj, "w", where)
        if w < 0:
            raise ValidationError(f"{where}: negative weight {w}")
        disks.append(Disk(did, Point(x, y), w))
    points = []
    for k, obj in enumerate(points_raw):
        where = f"points[{k}]"
        if not isinstance(obj, dict):
            raise ParseError(f"{where}: not an object")
        points.append(Point(_num(obj, "x", where), _num(obj, "y", where)))
    meta = data.get("meta", {})
    if not isinstance(meta, dict):
        raise ParseError("'meta' must be an object")
    disks.sort(key=lambda d: d.id)
    return Instance(tuple(disks), tuple(points), {str(k): str(v) for k, v in meta.items()})


def loads(text: str) -> Instance:
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return from_dict(data)


def _reject_constant(name: str):
    raise ValidationError(f"non-finite number {name}")


def load(path: str | Path) -> Instance:
    return loads(Path(path).read_text())


def save(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps(instance))


# ---------------------------------------------------------------- generation

def parse_weights(spec: str) -> tuple[str, tuple[float, ...]]:
    parts = spec.split(":")
    try:
        if parts[0] == "uniform" and len(parts) == 3:
            a, b = float(parts[1]), float(parts[2])
            if not (0 <= a <= b):
                raise ValueError
            return "uniform", (a, b)
        if parts[0] == "const" and len(parts) == 2:
            c = float(parts[1])
            if c < 0:
                raise ValueError
            return "const", (c,)
    except ValueError:
        pass
    raise ValueError(f"bad weight spec {spec!r}; expected uniform:a:b or const:c")


def generate(n: int, m: int, side: float, seed: int, weights: str = "uniform:1:10") -> Instance:
    if n < 0 or m < 0:
        raise ValueError("n and m must be >= 0")
    if side <= 0:
        raise ValueError("side must be > 0")
    kind, params = parse_weights(weights)
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.0, side, size=(n, 2))
    pts = rng.uniform(0.0, side, size=(m, 2))
    if kind == "uniform":
        ws = rng.uniform(params[0], params[1], size=n)
    else:
        ws = np.full(n, params[0])
    disks = tuple(Disk(i, Point(float(centers[i, 0]), float(centers[i, 1])), float(ws[i])) for i in range(n))
    points = tuple(Point(float(x), float(y)) for x, y in pts)
    inst = Instance(disks, points, {})
    meta = {
        "generator": "uniform",
        "seed": str(seed),
        "side": repr(float(side)),
        "weights": weights,
        "feasible": "true" if is_feasible(inst) else "false",
    }
    return Instance(disks, points, meta)


def from_mwds(vertices: Sequence[tuple[Sequence[float], float]]) -> Instance:
    """WUDC instance with one co-located point and unit disk per vertex."""
    disks = []
    points = []
    for k, (p, w) in enumerate(vertices):
        pt = Point(float(p[0]), float(p[1]))
        disks.append(Disk(k, pt, float(w)))
        points.append(pt)
    return Instance(tuple(disks), tuple(points), {"generator": "mwds"})

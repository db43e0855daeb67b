"""Nelder-Mead and restricted Nelder-Mead iterations with move tracing.

The restricted variant (RNM) never expands, so the simplex volume cannot grow.
Vertices are ordered best to worst by value, with ties going to the older
vertex (lower id). Every vertex carries a ``slot`` that a replacement vertex
inherits; in two dimensions slots 0, 1, 2 are the labels A, B, C used by the
move codes 1-9 (reflect, inside contract, outside contract, times worst slot).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

REFLECT = "reflect"
EXPAND = "expand"
OUTSIDE_CONTRACT = "outside_contract"
INSIDE_CONTRACT = "inside_contract"
SHRINK = "shrink"

_CODE_BASE = {REFLECT: 1, INSIDE_CONTRACT: 4, OUTSIDE_CONTRACT: 7}


class EvaluationError(ValueError):
    """The objective returned a non-finite value."""

    def __init__(self, message: str, coords=None, iteration: Optional[int] = None):
        super().__init__(message)
        self.coords = None if coords is None else tuple(float(c) for c in coords)
        self.iteration = iteration


class DomainError(ValueError):
    """The simplex is degenerate or the configuration is invalid."""

    def __init__(self, message: str, iteration: Optional[int] = None):
        super().__init__(message)
        self.iteration = iteration


@dataclass(frozen=True)
class Vertex:
    coords: tuple[float, ...]
    value: float
    id: int
    slot: int = 0

    @property
    def point(self) -> np.ndarray:
        return np.array(self.coords)

    def to_json(self) -> dict:
        return {"id": self.id, "slot": self.slot, "coords": list(self.coords), "value": self.value}


Evaluator = Callable[[np.ndarray], float]


def _evaluate(objective: Evaluator, p: np.ndarray) -> float:
    v = float(objective(p))
    if not math.isfinite(v):
        raise EvaluationError(f"objective is not finite at {p.tolist()}: {v}", p)
    return v


@dataclass(frozen=True)
class Simplex:
    """Vertices sorted best to worst."""

    vertices: tuple[Vertex, ...]
    next_id: int

    @classmethod
    def from_points(cls, points, objective: Evaluator) -> "Simplex":
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] != pts.shape[1] + 1:
            raise DomainError(f"need n+1 points in n dimensions, got shape {pts.shape}")
        verts = tuple(
            Vertex(tuple(float(c) for c in p), _evaluate(objective, p), i, i) for i, p in enumerate(pts)
        )
        simplex = order_vertices(cls(verts, len(verts)))
        if simplex.volume() == 0.0:
            raise DomainError("initial simplex is degenerate")
        return simplex

    @property
    def dimension(self) -> int:
        return len(self.vertices) - 1

    def points(self) -> np.ndarray:
        return np.array([v.coords for v in self.vertices])

    def values(self) -> np.ndarray:
        return np.array([v.value for v in self.vertices])

    @property
    def best(self) -> Vertex:
        return self.vertices[0]

    @property
    def worst(self) -> Vertex:
        return self.vertices[-1]

    def by_slot(self) -> list[Vertex]:
        return sorted(self.vertices, key=lambda v: v.slot)

    def volume(self) -> float:
        p = self.points()
        edges = p[1:] - p[0]
        return abs(float(np.linalg.det(edges))) / math.factorial(self.dimension)

    def diameter(self) -> float:
        p = self.points()
        d = p[:, None, :] - p[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    def value_spread(self) -> float:
        return self.worst.value - self.best.value

    def to_json(self) -> list[dict]:
        return [v.to_json() for v in self.vertices]


def order_vertices(simplex: Simplex) -> Simplex:
    """Sort best to worst; equal values keep the older vertex first."""
    for v in simplex.vertices:
        if not math.isfinite(v.value):
            raise EvaluationError(f"non-finite value {v.value} at vertex {v.id}", v.coords)
    return Simplex(tuple(sorted(simplex.vertices, key=lambda v: (v.value, v.id))), simplex.next_id)


@dataclass(frozen=True)
class MoveRecord:
    kind: str
    worst_id: int
    accepted: tuple[Vertex, ...]
    evaluations: int
    code2d: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "code2d": self.code2d,
            "replaced_id": self.worst_id,
            "new_vertices": [v.to_json() for v in self.accepted],
            "evaluations": self.evaluations,
        }


@dataclass(frozen=True)
class RunConfig:
    variant: str = "rnm"
    chi: float = 2.0
    max_iterations: int = 1000
    diameter_tolerance: float = 0.0
    value_tolerance: float = 0.0

    def __post_init__(self):
        if self.variant not in ("rnm", "nm"):
            raise DomainError(f"variant must be 'rnm' or 'nm', got {self.variant!r}")
        if self.variant == "nm" and not self.chi > 1:
            raise DomainError(f"expansion coefficient must exceed 1, got {self.chi}")
        if self.max_iterations < 0:
            raise DomainError("max_iterations must be nonnegative")
        if self.diameter_tolerance < 0 or self.value_tolerance < 0:
            raise DomainError("tolerances must be nonnegative")

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "chi": self.chi,
            "max_iterations": self.max_iterations,
            "diameter_tolerance": self.diameter_tolerance,
            "value_tolerance": self.value_tolerance,
        }


# Two-dimensional moves. ``p1 + p2`` is formed first; scaling by powers of two
# is exact, so these match 0.75*(p1+p2) - 0.5*p3 etc. bit for bit and also
# work unchanged on exact rationals.


def reflect_2d(p1, p2, p3):
    """``p1 + p2 - p3``."""
    return (p1 + p2) - p3


def outside_contract_2d(p1, p2, p3):
    """``3/4 (p1 + p2) - 1/2 p3``."""
    return (p1 + p2) * 3 / 4 - p3 / 2


def inside_contract_2d(p1, p2, p3):
    """``1/4 (p1 + p2) + 1/2 p3``."""
    return (p1 + p2) / 4 + p3 / 2


def _trial_points(simplex: Simplex) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Centroid of the non-worst vertices and the reflection / contraction points."""
    pts = simplex.points()
    w = pts[-1]
    if simplex.dimension == 2:
        centroid = (pts[0] + pts[1]) / 2
        r = reflect_2d(pts[0], pts[1], w)
        out = outside_contract_2d(pts[0], pts[1], w)
        inn = inside_contract_2d(pts[0], pts[1], w)
    else:
        centroid = pts[:-1].sum(axis=0) / simplex.dimension
        r = 2.0 * centroid - w
        out = 0.5 * (centroid + r)
        inn = 0.5 * (centroid + w)
    return centroid, w, r, out, inn


def _replace_worst(simplex: Simplex, p: np.ndarray, value: float) -> tuple[Simplex, Vertex]:
    old = simplex.worst
    new = Vertex(tuple(float(c) for c in p), value, simplex.next_id, old.slot)
    s = order_vertices(Simplex(simplex.vertices[:-1] + (new,), simplex.next_id + 1))
    return s, new


def _code(simplex: Simplex, kind: str) -> Optional[int]:
    if simplex.dimension != 2 or kind not in _CODE_BASE:
        return None
    return _CODE_BASE[kind] + simplex.worst.slot


def _check(simplex: Simplex) -> None:
    if simplex.volume() == 0.0:
        raise DomainError("simplex is degenerate")


def _step(simplex: Simplex, objective: Evaluator, chi: Optional[float]) -> tuple[Simplex, MoveRecord]:
    _check(simplex)
    vs = simplex.vertices
    f1, fn, fw = vs[0].value, vs[-2].value, vs[-1].value
    worst_id = vs[-1].id
    centroid, w, r, out, inn = _trial_points(simplex)
    fr = _evaluate(objective, r)

    def done(kind, p, fp, evals):
        s, new = _replace_worst(simplex, p, fp)
        return s, MoveRecord(kind, worst_id, (new,), evals, _code(simplex, kind))

    if fr < fn:
        if chi is not None and fr < f1:
            e = centroid + chi * (centroid - w)
            fe = _evaluate(objective, e)
            if fe < fr:
                return done(EXPAND, e, fe, 2)
            return done(REFLECT, r, fr, 2)
        return done(REFLECT, r, fr, 1)
    if fr < fw:
        fo = _evaluate(objective, out)
        if fo <= fr:
            return done(OUTSIDE_CONTRACT, out, fo, 2)
    else:
        fi = _evaluate(objective, inn)
        if fi < fw:
            return done(INSIDE_CONTRACT, inn, fi, 2)
    return _shrink(simplex, objective, worst_id)


def _shrink(simplex: Simplex, objective: Evaluator, worst_id: int) -> tuple[Simplex, MoveRecord]:
    best = simplex.best
    b = best.point
    nid = simplex.next_id
    new = []
    for v in simplex.vertices[1:]:
        p = 0.5 * (b + v.point)
        new.append(Vertex(tuple(float(c) for c in p), _evaluate(objective, p), nid, v.slot))
        nid += 1
    s = order_vertices(Simplex((best, *new), nid))
    return s, MoveRecord(SHRINK, worst_id, tuple(new), 1 + len(new))


def rnm_step(simplex: Simplex, objective: Evaluator) -> tuple[Simplex, MoveRecord]:
    """One restricted iteration: reflect, outside contract, inside contract or shrink."""
    return _step(simplex, objective, None)


def nm_step(simplex: Simplex, objective: Evaluator, chi: float = 2.0) -> tuple[Simplex, MoveRecord]:
    """One classical iteration: as ``rnm_step`` but tries ``centroid + chi*(centroid - worst)``
    whenever the reflected point beats the best vertex."""
    if not chi > 1:
        raise DomainError(f"expansion coefficient must exceed 1, got {chi}")
    return _step(simplex, objective, chi)


@dataclass
class MoveTrace:
    config: RunConfig
    initial: Simplex
    records: list[MoveRecord] = field(default_factory=list)
    simplices: list[Simplex] = field(default_factory=list)
    stop_reason: str = "max_iterations"

    @property
    def final(self) -> Simplex:
        return self.simplices[-1] if self.simplices else self.initial

    def codes(self) -> list[Optional[int]]:
        return [r.code2d for r in self.records]

    def kinds(self) -> list[str]:
        return [r.kind for r in self.records]

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "initial_vertices": self.initial.to_json(),
            "iterations": [
                {"iteration": k + 1, **rec.to_json(), "vertices": s.to_json()}
                for k, (rec, s) in enumerate(zip(self.records, self.simplices))
            ],
            "stop_reason": self.stop_reason,
            "final_best": self.final.best.to_json(),
        }

    def dumps_json(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def dumps_csv(self) -> str:
        """One row per new vertex; iteration 0 lists the starting vertices."""
        if self.initial.dimension != 2:
            raise DomainError("CSV traces are two-dimensional only")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "code2d", "x", "y", "f"])
        for v in self.initial.by_slot():
            w.writerow([0, "", repr(v.coords[0]), repr(v.coords[1]), repr(v.value)])
        for k, rec in enumerate(self.records, 1):
            code = "" if rec.code2d is None else rec.code2d
            for v in rec.accepted:
                w.writerow([k, code, repr(v.coords[0]), repr(v.coords[1]), repr(v.value)])
        return buf.getvalue()


def run(objective: Evaluator, initial: Simplex, config: RunConfig = RunConfig()) -> MoveTrace:
    """Iterate until the iteration cap or a diameter / value-spread tolerance is met."""
    trace = MoveTrace(config, initial)
    s = initial
    chi = config.chi if config.variant == "nm" else None
    for k in range(config.max_iterations):
        if s.diameter() < config.diameter_tolerance:
            trace.stop_reason = "diameter_tolerance"
            break
        if s.value_spread() < config.value_tolerance:
            trace.stop_reason = "value_tolerance"
            break
        if k > 0 and s.volume() == 0.0:
            # rounding has collapsed the simplex; no move can change it further
            trace.stop_reason = "degenerate"
            break
        try:
            s, rec = _step(s, objective, chi)
        except (EvaluationError, DomainError) as exc:
            exc.iteration = k + 1
            raise
        trace.records.append(rec)
        trace.simplices.append(s)
    return trace


def load_trace_json(text: str) -> dict:
    """Parse a JSON trace, checking the fields downstream tools rely on."""
    data = json.loads(text)
    for key in ("config", "initial_vertices", "iterations"):
        if key not in data:
            raise ValueError(f"trace is missing {key!r}")
    return data


def simplex_from_json(vertices: Sequence[dict]) -> Simplex:
    verts = tuple(Vertex(tuple(v["coords"]), float(v["value"]), int(v["id"]), int(v["slot"])) for v in vertices)
    return order_vertices(Simplex(verts, max(v.id for v in verts) + 1))

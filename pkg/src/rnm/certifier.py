"""Exhaustive search for RNM move sequences that keep the flatness from growing.

The start triangle is ``A0 = (-1, -u)``, ``B0 = (s, t)``, ``C0 = (1, u)`` with
``0 <= s <= 1.00001`` and ``t, u`` free. Moves are coded 1-9: reflections
(1-3), inside contractions (4-6) and outside contractions (7-9), where the
residue picks the worst vertex A, B or C. Vertex comparisons are made on the
surrogate ``psi(x, y) = x**2/2 + y`` with a slack of ``1e-6``: ``f(v) >= f(w)``
becomes ``psi(v) > psi(w) - 1e-6``.

A sequence is *possible* for ``s`` when some ``(t, u)`` satisfies every move's
relaxed comparisons, the flatness after every step stays within 1.01 times the
initial flatness, and no reflection immediately undoes a reflection.
"""

from __future__ import annotations

import json
import logging
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Iterator, Optional, Sequence

from .exact import (
    DEFAULT_PRECISION,
    DOMAIN,
    Atom,
    Formula,
    IntervalSet,
    Poly,
    conj,
    disj,
    satisfying_set,
)
from .farkas import Row, SLinearConstraint, circuit_conditions, condition_atom, feasibility_condition

log = logging.getLogger(__name__)

EPS = Fraction(1, 10**6)
FLATNESS_GROWTH = Fraction(101, 100)
LABELS = "ABC"
# the certified claim: no possible sequence has this many moves
LONGEST_EXCLUDED = 14

REFLECT, INSIDE, OUTSIDE = "reflect", "inside", "outside"


def decode(code: int) -> tuple[str, int]:
    """Move code -> (kind, index of worst vertex)."""
    if not 1 <= code <= 9:
        raise ValueError(f"move code must be in 1..9, got {code}")
    kind = (REFLECT, INSIDE, OUTSIDE)[(code - 1) // 3]
    return kind, (code - 1) % 3


def encode(kind: str, worst: int) -> int:
    return {REFLECT: 1, INSIDE: 4, OUTSIDE: 7}[kind] + worst


# ---------------------------------------------------------------------------
# Parametric geometry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParametricVertex:
    """``x = a + b*s`` and ``y = c + d*t + e*u`` with rational coefficients."""

    x: tuple[Fraction, Fraction]
    y: tuple[Fraction, Fraction, Fraction]

    def __add__(self, other: "ParametricVertex") -> "ParametricVertex":
        return ParametricVertex(
            tuple(p + q for p, q in zip(self.x, other.x)),
            tuple(p + q for p, q in zip(self.y, other.y)),
        )

    def __sub__(self, other: "ParametricVertex") -> "ParametricVertex":
        return self + other.scale(-1)

    def scale(self, k) -> "ParametricVertex":
        k = Fraction(k)
        return ParametricVertex(tuple(k * p for p in self.x), tuple(k * p for p in self.y))

    def x_poly(self) -> Poly:
        return Poly(self.x)

    def psi(self) -> tuple[Poly, Fraction, Fraction]:
        """``psi`` at this vertex as (polynomial in s, coefficient of t, coefficient of u)."""
        a, b = self.x
        c, d, e = self.y
        return Poly([a * a / 2 + c, a * b, b * b / 2]), d, e

    def at(self, s, t, u) -> tuple:
        a, b = self.x
        c, d, e = self.y
        return a + b * s, c + d * t + e * u


def _v(x, y) -> ParametricVertex:
    return ParametricVertex(tuple(map(Fraction, x)), tuple(map(Fraction, y)))


@dataclass(frozen=True)
class ParametricTriangle:
    vertices: tuple[ParametricVertex, ParametricVertex, ParametricVertex]
    contractions: int = 0
    # step index (1-based) at which each vertex was created by a reflection, else None
    reflected_at: tuple = (None, None, None)
    steps: int = 0

    @classmethod
    def initial(cls) -> "ParametricTriangle":
        return cls(
            (
                _v((-1, 0), (0, 0, -1)),
                _v((0, 1), (0, 1, 0)),
                _v((1, 0), (0, 0, 1)),
            )
        )

    def others(self, worst: int) -> tuple[int, int]:
        return tuple(i for i in range(3) if i != worst)  # type: ignore[return-value]

    def trial_points(self, worst: int) -> dict[str, ParametricVertex]:
        i, j = self.others(worst)
        p, q, w = self.vertices[i], self.vertices[j], self.vertices[worst]
        pq = p + q
        return {
            "r": pq - w,
            "out": pq.scale(Fraction(3, 4)) - w.scale(Fraction(1, 2)),
            "in": pq.scale(Fraction(1, 4)) + w.scale(Fraction(1, 2)),
        }


def apply_move(tri: ParametricTriangle, code: int) -> ParametricTriangle:
    """Triangle after move ``code``; the new vertex keeps the replaced vertex's label."""
    kind, worst = decode(code)
    pts = tri.trial_points(worst)
    new = pts[{REFLECT: "r", INSIDE: "in", OUTSIDE: "out"}[kind]]
    verts = list(tri.vertices)
    verts[worst] = new
    tags = list(tri.reflected_at)
    step = tri.steps + 1
    tags[worst] = step if kind == REFLECT else None
    return ParametricTriangle(
        tuple(verts),  # type: ignore[arg-type]
        tri.contractions + (kind != REFLECT),
        tuple(tags),
        step,
    )


def worse_or_equal(v: ParametricVertex, w: ParametricVertex, eps: Fraction = EPS) -> SLinearConstraint:
    """Relaxed image of ``f(v) >= f(w)``: ``psi(v) - psi(w) > -eps``."""
    pv, dv, ev = v.psi()
    pw, dw, ew = w.psi()
    return SLinearConstraint(pv - pw, dv - dw, ev - ew, -eps, strict=True)


def move_inequalities(
    tri: ParametricTriangle,
    code: int,
    ordering: Optional[tuple[int, int, int]] = None,
    eps: Fraction = EPS,
) -> list[SLinearConstraint]:
    """Relaxed comparisons that must hold for ``tri`` to take move ``code``.

    ``ordering`` is ``(best, next, worst)`` as vertex indices. Its worst entry
    must match the code. The best/next split matters only for reflections,
    where acceptance compares against the next-worst vertex; for contractions
    it adds the comparison ``next >= best``.
    """
    kind, worst = decode(code)
    if ordering is None:
        i, j = tri.others(worst)
        ordering = (i, j, worst)
    best, nxt, w_idx = ordering
    if w_idx != worst or sorted(ordering) != [0, 1, 2]:
        raise ValueError(f"ordering {ordering} inconsistent with move code {code}")
    V = tri.vertices
    W, N, B = V[worst], V[nxt], V[best]
    pts = tri.trial_points(worst)
    r = pts["r"]
    ge = lambda a, b: worse_or_equal(a, b, eps)  # noqa: E731
    out = [ge(W, N), ge(W, B), ge(N, B)]
    if kind == REFLECT:
        out.append(ge(N, r))
    elif kind == INSIDE:
        out += [ge(r, W), ge(W, pts["in"])]
    else:
        out += [ge(r, N), ge(r, B), ge(W, r), ge(r, pts["out"])]
    return out


def _move_branches(
    tri: ParametricTriangle, code: int, eps: Fraction = EPS
) -> list[list[SLinearConstraint]]:
    """Alternative constraint sets whose union is the move's exact condition.

    Only the worst vertex is fixed by the code; reflection acceptance
    ``f(r) < max(f(P), f(Q))`` splits into two conjunctive branches.
    """
    kind, worst = decode(code)
    i, j = tri.others(worst)
    V = tri.vertices
    W, P, Q = V[worst], V[i], V[j]
    pts = tri.trial_points(worst)
    r = pts["r"]
    ge = lambda a, b: worse_or_equal(a, b, eps)  # noqa: E731
    base = [ge(W, P), ge(W, Q)]
    if kind == REFLECT:
        return [base + [ge(P, r)], base + [ge(Q, r)]]
    if kind == INSIDE:
        return [base + [ge(r, W), ge(W, pts["in"])]]
    return [base + [ge(r, P), ge(r, Q), ge(W, r), ge(r, pts["out"])]]


# ---------------------------------------------------------------------------
# Flatness
# ---------------------------------------------------------------------------


def _x_differences(tri: ParametricTriangle) -> list[Poly]:
    xs = [v.x_poly() for v in tri.vertices]
    return [xs[a] - xs[b] for a in range(3) for b in range(3) if a != b]


def flatness_step_condition(
    start: ParametricTriangle, tri: ParametricTriangle, growth: Fraction = FLATNESS_GROWTH
) -> Formula:
    """``flatness(tri) <= growth * flatness(start)`` as a formula in ``s``.

    Each contraction halves the area, so the ratio is
    ``2**-c * (width(start) / width(tri))**3``. Widths are maxima of the
    pairwise x-differences, which are linear in ``s``; since cubing is
    monotone, ``2**-c * max(D0)**3 <= growth * max(D)**3`` holds iff for every
    start difference some current difference dominates it.
    """
    scale = growth * 2**tri.contractions
    clauses = []
    for d0 in _x_differences(start):
        options = [Atom(d0**3 - (d**3) * scale, "<=") for d in _x_differences(tri)]
        clauses.append(disj(*options))
    return conj(*clauses)


def flatness_conditions(history: Sequence[ParametricTriangle]) -> list[Formula]:
    """One formula per triangle after the start asserting bounded flatness growth."""
    start = history[0]
    return [flatness_step_condition(start, tri) for tri in history[1:]]


def _admissible(sequence: Sequence[int]) -> bool:
    if not sequence or decode(sequence[0])[0] != INSIDE:
        return False
    last = None
    for code in sequence:
        kind, worst = decode(code)
        if kind == REFLECT and last == worst:
            return False
        last = worst if kind == REFLECT else None
    return True


def sequence_history(sequence: Sequence[int]) -> list[ParametricTriangle]:
    """Triangles from the start through every move of ``sequence``."""
    hist = [ParametricTriangle.initial()]
    for code in sequence:
        hist.append(apply_move(hist[-1], code))
    return hist


def sequence_branches(sequence: Sequence[int], eps: Fraction = EPS) -> list[list[SLinearConstraint]]:
    """Alternative conjunctive constraint systems in ``(s, t, u)`` for the whole sequence."""
    hist = sequence_history(sequence)
    branches: list[list[SLinearConstraint]] = [[]]
    for tri, code in zip(hist, sequence):
        branches = [b + extra for b in branches for extra in _move_branches(tri, code, eps)]
    return branches


def possible_set_of(sequence: Sequence[int], precision: Fraction = DEFAULT_PRECISION) -> IntervalSet:
    """Possible set of one sequence, computed directly from its full formula.

    Slower than the incremental search, and independent of it.
    """
    if not _admissible(sequence):
        return IntervalSet.empty()
    flat = conj(*flatness_conditions(sequence_history(sequence)))
    feas = disj(*(feasibility_condition(b) for b in sequence_branches(sequence)))
    return satisfying_set(conj(flat, feas), DOMAIN, precision)


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------


@dataclass
class _Branch:
    rows: list[Row]
    keys: frozenset
    sset: IntervalSet


@dataclass
class MoveSequenceResult:
    sequence: tuple[int, ...]
    possible_set: IntervalSet

    def format(self, precision: Fraction = DEFAULT_PRECISION) -> str:
        seq = "{" + ", ".join(map(str, self.sequence)) + "}"
        return f"{seq} possible for s in {self.possible_set.format(precision=precision)}"


@dataclass
class _Node:
    sequence: tuple[int, ...]
    tri: ParametricTriangle
    branches: list[_Branch]
    flat: IntervalSet
    last_reflect: Optional[int]
    possible: IntervalSet = field(default_factory=IntervalSet)


def _extend_branch(branch: _Branch, new: list[SLinearConstraint], limit: IntervalSet) -> Optional[_Branch]:
    rows = list(branch.rows)
    keys = set(branch.keys)
    start = len(rows)
    for c in new:
        r = Row.from_constraint(c)
        k = r.key()
        if k not in keys:
            keys.add(k)
            rows.append(r)
    conds = circuit_conditions(rows, start)
    sset = branch.sset.intersect(limit)
    if not sset:
        return None
    for q in sorted(conds, key=len):
        if len(q) == 1:  # positive constant: infeasible
            return None
    phi = conj(*(condition_atom(q) for q in sorted(conds)))
    sset = sset.intersect(satisfying_set(phi, DOMAIN))
    if not sset:
        return None
    return _Branch(rows, frozenset(keys), sset)


def _children(node: _Node, max_depth: int) -> Iterator[_Node]:
    if len(node.sequence) >= max_depth:
        return
    codes = (4, 5, 6) if not node.sequence else range(1, 10)
    for code in codes:
        kind, worst = decode(code)
        if kind == REFLECT and node.last_reflect == worst:
            continue
        tri = apply_move(node.tri, code)
        flat = node.flat.intersect(
            satisfying_set(flatness_step_condition(ParametricTriangle.initial(), tri), DOMAIN)
        )
        if not flat:
            continue
        branches = []
        for br in node.branches:
            for extra in _move_branches(node.tri, code):
                nb = _extend_branch(br, extra, flat)
                if nb is not None:
                    branches.append(nb)
        if not branches:
            continue
        possible = IntervalSet()
        for b in branches:
            possible = possible.union(b.sset)
        yield _Node(
            node.sequence + (code,),
            tri,
            branches,
            flat,
            worst if kind == REFLECT else None,
            possible,
        )


def _root() -> _Node:
    return _Node((), ParametricTriangle.initial(), [_Branch([], frozenset(), IntervalSet.full())],
                 IntervalSet.full(), None)


def _search(node: _Node, max_depth: int, progress: bool = False) -> list[MoveSequenceResult]:
    results: list[MoveSequenceResult] = []
    stack = [node]
    while stack:
        cur = stack.pop()
        for child in _children(cur, max_depth):
            results.append(MoveSequenceResult(child.sequence, child.possible))
            if progress:
                log.info("%s", results[-1].format())
            stack.append(child)
    return results


def _search_subtree(args: tuple[_Node, int]) -> list[MoveSequenceResult]:
    node, max_depth = args
    return _search(node, max_depth)


def enumerate_possible(max_depth: int = 14, progress: bool = False, workers: int = 1) -> list[MoveSequenceResult]:
    """All possible move sequences of length ``1..max_depth`` starting with an inside contraction.

    With ``workers > 1`` the subtrees below the first two moves are searched in
    separate processes. Results are sorted lexicographically by sequence either way.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if workers <= 1:
        results = _search(_root(), max_depth, progress)
    else:
        results = []
        frontier = []
        for first in _children(_root(), max_depth):
            results.append(MoveSequenceResult(first.sequence, first.possible))
            for second in _children(first, max_depth):
                results.append(MoveSequenceResult(second.sequence, second.possible))
                frontier.append(second)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_search_subtree, [(n, max_depth) for n in frontier]):
                results.extend(part)
    results.sort(key=lambda r: r.sequence)
    return results


# ---------------------------------------------------------------------------
# Reference comparison
# ---------------------------------------------------------------------------

_LINE = re.compile(r"^\{([\d,\s]+)\} possible for s in \{(.*)\}\s*$")
_PAIR = re.compile(r"\{\s*([-+\d.eE]+)\s*,\s*([-+\d.eE]+)\s*\}")


def parse_output_line(line: str) -> tuple[tuple[int, ...], list[tuple[float, float]]]:
    m = _LINE.match(line.strip())
    if not m:
        raise ValueError(f"unparseable line: {line!r}")
    seq = tuple(int(x) for x in m.group(1).split(","))
    ivs = [(float(a), float(b)) for a, b in _PAIR.findall(m.group(2))]
    return seq, ivs


def load_reference() -> dict[tuple[int, ...], list[tuple[float, float]]]:
    """The bundled list of possible sequences and their s-intervals."""
    text = resources.files("rnm").joinpath("data/reference_sequences.txt").read_text()
    ref = {}
    for line in text.splitlines():
        if line.strip():
            seq, ivs = parse_output_line(line)
            ref[seq] = ivs
    return ref


@dataclass
class CertificationReport:
    results: list[MoveSequenceResult]
    max_depth: int
    max_length: int
    missing: list[tuple[int, ...]]
    extra: list[tuple[int, ...]]
    deviations: list[dict]
    tolerance: float
    wall_time: float

    @property
    def certified(self) -> bool:
        """No possible sequence reaches ``max_depth`` moves."""
        return self.max_length < self.max_depth

    @property
    def matches_reference(self) -> bool:
        return not (self.missing or self.extra or self.deviations)

    @property
    def passed(self) -> bool:
        """Reference reproduced and no possible sequence of ``LONGEST_EXCLUDED`` or more moves."""
        return self.matches_reference and self.max_length < LONGEST_EXCLUDED

    def summary(self) -> list[str]:
        out = [
            f"sequences: {len(self.results)}",
            f"max length: {self.max_length} (searched up to {self.max_depth})",
            f"reference: {'match' if self.matches_reference else 'MISMATCH'}"
            f" (missing {len(self.missing)}, extra {len(self.extra)}, deviations {len(self.deviations)})",
            f"wall time: {self.wall_time:.1f} s",
            f"verdict: {'PASS' if self.passed else 'FAIL'}",
        ]
        for seq in self.missing:
            out.append(f"  missing {list(seq)}")
        for seq in self.extra:
            out.append(f"  extra {list(seq)}")
        for d in self.deviations:
            out.append(f"  deviation {d}")
        return out

    def lines(self) -> list[str]:
        return [r.format() for r in self.results]

    def to_json(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "max_length": self.max_length,
            "certified": self.certified,
            "matches_reference": self.matches_reference,
            "passed": self.passed,
            "sequences": [
                {"sequence": list(r.sequence), "intervals": [list(iv) for iv in r.possible_set.approx()]}
                for r in self.results
            ],
            "reference_diff": {
                "missing": [list(s) for s in self.missing],
                "extra": [list(s) for s in self.extra],
                "deviations": self.deviations,
                "tolerance": self.tolerance,
            },
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def compare_with_reference(
    results: Sequence[MoveSequenceResult],
    reference: dict,
    tolerance: float = 1e-5,
    max_depth: Optional[int] = None,
) -> tuple[list, list, list]:
    """Missing sequences, extra sequences and endpoint deviations beyond ``tolerance``."""
    got = {r.sequence: r.possible_set.approx() for r in results}
    ref = {k: v for k, v in reference.items() if max_depth is None or len(k) <= max_depth}
    missing = sorted(set(ref) - set(got))
    extra = sorted(set(got) - set(ref))
    deviations = []
    for seq in sorted(set(got) & set(ref)):
        mine, theirs = got[seq], ref[seq]
        if len(mine) != len(theirs):
            deviations.append({"sequence": list(seq), "computed": mine, "reference": theirs})
            continue
        worst = max(
            max(abs(a - c), abs(b - d)) for (a, b), (c, d) in zip(mine, theirs)
        )
        if worst > tolerance:
            deviations.append(
                {"sequence": list(seq), "computed": mine, "reference": theirs, "error": worst}
            )
    return missing, extra, deviations


def verify_proposition(max_depth: int = 14, tolerance: float = 1e-5, workers: int = 1) -> CertificationReport:
    """Run the search and compare it with the bundled reference list."""
    t0 = time.perf_counter()
    results = enumerate_possible(max_depth, workers=workers)
    elapsed = time.perf_counter() - t0
    missing, extra, deviations = compare_with_reference(
        results, load_reference(), tolerance, max_depth
    )
    max_length = max((len(r.sequence) for r in results), default=0)
    return CertificationReport(
        results, max_depth, max_length, missing, extra, deviations, tolerance, elapsed
    )

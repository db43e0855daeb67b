"""Feasibility in ``(t, u)`` of linear systems with ``s``-dependent right-hand sides.

A system ``N z >= d(s)`` with ``z = (t, u)`` is feasible iff ``gamma . d(s) <= 0``
for every ``gamma >= 0`` with ``N^T gamma = 0``. The cone of such ``gamma`` is
generated by its minimal-support vectors, and in the plane those have support
of at most three rows, so the condition is a finite conjunction of polynomial
atoms in ``s``: one per sign-valid circuit among the subsets of one, two or
three rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Sequence

from .exact import FALSE, TRUE, Atom, Formula, Poly, conj


@dataclass(frozen=True)
class SLinearConstraint:
    """``phi(s) + nu*t + omega*u >= theta`` (``>`` when ``strict``).

    Strict constraints are treated as non-strict when deciding feasibility.
    """

    phi: Poly
    nu: Fraction
    omega: Fraction
    theta: Fraction
    strict: bool = False

    @property
    def is_pure(self) -> bool:
        """True when the constraint does not involve ``t`` or ``u``."""
        return self.nu == 0 and self.omega == 0

    def rhs(self) -> Poly:
        """``d(s) = theta - phi(s)``."""
        return Poly([self.theta]) - self.phi

    def holds(self, s, t, u) -> bool:
        lhs = self.phi(s) + self.nu * t + self.omega * u
        return lhs > self.theta if self.strict else lhs >= self.theta

    def slack(self, s: float, t: float, u: float) -> float:
        phi = sum(float(c) * s**k for k, c in enumerate(self.phi.coeffs))
        return phi + float(self.nu) * t + float(self.omega) * u - float(self.theta)


class Row:
    """Integer-scaled constraint ``nu*t + om*u >= d(s)``."""

    __slots__ = ("nu", "om", "d")

    def __init__(self, nu: int, om: int, d: tuple[int, ...]):
        self.nu = nu
        self.om = om
        self.d = d

    @classmethod
    def from_constraint(cls, c: SLinearConstraint) -> "Row":
        d = c.rhs().coeffs
        fracs = [Fraction(c.nu), Fraction(c.omega), *d]
        den = reduce(lambda a, x: a * x.denominator // gcd(a, x.denominator), fracs, 1)
        ints = [int(x * den) for x in fracs]
        g = reduce(gcd, ints, 0) or 1
        ints = [i // g for i in ints]
        return cls(ints[0], ints[1], tuple(ints[2:]))

    def key(self) -> tuple:
        return (self.nu, self.om, self.d)

    def __repr__(self) -> str:
        return f"Row({self.nu}*t + {self.om}*u >= {self.d})"


def _combine(weights: Sequence[int], rows: Sequence[Row]) -> tuple[int, ...]:
    n = max(len(r.d) for r in rows)
    out = [0] * n
    for w, r in zip(weights, rows):
        for k, c in enumerate(r.d):
            out[k] += w * c
    while out and out[-1] == 0:
        out.pop()
    g = reduce(gcd, out, 0)
    if g > 1:
        out = [c // g for c in out]
    return tuple(out)


def _pair_gamma(a: Row, b: Row) -> tuple[int, int] | None:
    """Positive weights making the two rows cancel, if they are antiparallel."""
    if a.nu * b.om - a.om * b.nu != 0:
        return None
    if a.nu * b.nu + a.om * b.om >= 0:
        return None
    if a.nu != 0:
        return abs(b.nu), abs(a.nu)
    return abs(b.om), abs(a.om)


def _triple_gamma(a: Row, b: Row, c: Row) -> tuple[int, int, int] | None:
    """Strictly positive null vector of the 2x3 transpose, if one exists."""
    g1 = b.nu * c.om - c.nu * b.om
    g2 = c.nu * a.om - a.nu * c.om
    g3 = a.nu * b.om - b.nu * a.om
    if g1 > 0 and g2 > 0 and g3 > 0:
        return g1, g2, g3
    if g1 < 0 and g2 < 0 and g3 < 0:
        return -g1, -g2, -g3
    return None


def circuit_conditions(rows: Sequence[Row], start: int = 0) -> set[tuple[int, ...]]:
    """Integer coefficient tuples ``q`` (lowest degree first) meaning ``q(s) <= 0``.

    Only circuits that use at least one row with index ``>= start`` are
    produced, so a caller extending a system can add just the new conditions.
    Trivially true conditions (``q`` constant and nonpositive) are dropped; a
    constant positive ``q`` is kept and makes the whole system infeasible.
    """
    out: set[tuple[int, ...]] = set()

    def add(q: tuple[int, ...]) -> None:
        if len(q) <= 1 and (not q or q[0] <= 0):
            return
        out.add(q)

    live = [i for i, r in enumerate(rows) if r.nu or r.om]
    for i in range(start, len(rows)):
        r = rows[i]
        if not (r.nu or r.om):
            add(_combine((1,), (r,)))
    for idx_j, j in enumerate(live):
        if j < start:
            continue
        b = rows[j]
        for i in live[:idx_j]:
            gam = _pair_gamma(rows[i], b)
            if gam is not None:
                add(_combine(gam, (rows[i], b)))
    for idx_k, k in enumerate(live):
        if k < start:
            continue
        c = rows[k]
        for idx_j in range(idx_k):
            j = live[idx_j]
            b = rows[j]
            for idx_i in range(idx_j):
                i = live[idx_i]
                gam = _triple_gamma(rows[i], b, c)
                if gam is not None:
                    add(_combine(gam, (rows[i], b, c)))
    return out


def condition_atom(q: tuple[int, ...]) -> Atom:
    return Atom(Poly(q), "<=")


def feasibility_condition(constraints: Iterable[SLinearConstraint]) -> Formula:
    """Formula in ``s`` that holds exactly when some real ``(t, u)`` satisfies all constraints."""
    rows = dedupe_rows(Row.from_constraint(c) for c in constraints)
    conds = circuit_conditions(rows)
    if any(len(q) == 1 and q[0] > 0 for q in conds):
        return FALSE
    if not conds:
        return TRUE
    return conj(*(condition_atom(q) for q in sorted(conds)))


def dedupe_rows(rows: Iterable[Row]) -> list[Row]:
    seen = set()
    out = []
    for r in rows:
        k = r.key()
        if k not in seen:
            seen.add(k)
            out.append(r)
    return out

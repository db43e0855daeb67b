"""Exact univariate algebra in the symbol ``s``.

Polynomials carry :class:`fractions.Fraction` coefficients, real roots are
isolated with Sturm sequences, and Boolean combinations of polynomial
inequalities are solved over a closed interval into an :class:`IntervalSet`
whose endpoints are exact algebraic numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction]

#: Search domain for ``s``.
DOMAIN = (Fraction(0), Fraction(100001, 100000))
DEFAULT_PRECISION = Fraction(1, 10**7)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


class Poly:
    """Polynomial in ``s`` with exact rational coefficients (lowest degree first)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Number] = ()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def const(cls, c: Number) -> "Poly":
        return cls([c])

    @classmethod
    def s(cls) -> "Poly":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, x: Number) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly([other])
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({[str(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if k == 0 else ("s" if k == 1 else f"s^{k}")
            if mono and abs(c) == 1:
                terms.append(("-" if c < 0 else "+") + mono)
            else:
                terms.append(f"{'-' if c < 0 else '+'}{abs(c)}{'*' + mono if mono else ''}")
        out = " ".join(terms)
        return out[1:] if out.startswith("+") else out

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly([other])

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return Poly(
            (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)
        )

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = _frac(other)
            return Poly(c * a for a in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        out = Poly([1])
        for _ in range(n):
            out = out * self
        return out

    def derivative(self) -> "Poly":
        return Poly(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.lead
        if len(rem) - 1 < dq:
            return Poly(), Poly(rem)
        quot = [Fraction(0)] * (len(rem) - dq)
        for k in range(len(rem) - 1 - dq, -1, -1):
            c = rem[k + dq] / lead
            quot[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= c * b
        return Poly(quot), Poly(rem[:dq])

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self * (1 / self.lead)

    def primitive(self) -> "Poly":
        """Positive rational multiple with coprime integer coefficients."""
        if self.is_zero():
            return self
        den = reduce(lambda a, c: a * c.denominator // gcd(a, c.denominator), self.coeffs, 1)
        ints = [int(c * den) for c in self.coeffs]
        g = reduce(gcd, ints)
        return Poly(Fraction(i, g) for i in ints)

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def squarefree(self) -> "Poly":
        """Product of the distinct irreducible factors (monic)."""
        if self.degree <= 0:
            return self.monic()
        return (self // self.gcd(self.derivative())).monic()

    def sign_at(self, x: Number) -> int:
        v = self(x)
        return (v > 0) - (v < 0)


def sturm_sequence(p: Poly) -> list[Poly]:
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        seq.append(-(seq[-2] % seq[-1]))
    return seq[:-1]


def _variations(seq: Sequence[Poly], x: Fraction) -> int:
    count, last = 0, 0
    for q in seq:
        sg = q.sign_at(x)
        if sg:
            if last and sg != last:
                count += 1
            last = sg
    return count


def count_roots_open(seq: Sequence[Poly], a: Fraction, b: Fraction) -> int:
    """Distinct roots in ``(a, b)`` of a squarefree polynomial nonzero at ``a`` and ``b``."""
    return _variations(seq, a) - _variations(seq, b)


# ---------------------------------------------------------------------------
# Algebraic reals
# ---------------------------------------------------------------------------


class AlgebraicReal:
    """A real root of a squarefree rational polynomial.

    Either exactly rational (``lo == hi``) or the unique root of ``poly`` in the
    open interval ``(lo, hi)``, with ``poly`` nonzero (of opposite signs) at both
    ends. The isolating interval is refined in place; the value never changes.
    """

    __slots__ = ("poly", "lo", "hi")

    def __init__(self, poly: Poly, lo: Fraction, hi: Fraction):
        self.poly = poly
        self.lo = lo
        self.hi = hi

    @classmethod
    def rational(cls, x: Number) -> "AlgebraicReal":
        x = _frac(x)
        return cls(Poly([-x, 1]), x, x)

    @property
    def is_rational(self) -> bool:
        return self.lo == self.hi

    def refine(self, width: Fraction) -> "AlgebraicReal":
        while self.hi - self.lo > width:
            self.bisect()
        return self

    def bisect(self) -> None:
        if self.is_rational:
            return
        m = (self.lo + self.hi) / 2
        sm = self.poly.sign_at(m)
        if sm == 0:
            self.lo = self.hi = m
        elif sm == self.poly.sign_at(self.lo):
            self.lo = m
        else:
            self.hi = m

    def approx(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        if self.is_rational:
            return float(self.lo)
        self.refine(Fraction(1, 10**18))
        return float(self.approx())

    def __repr__(self) -> str:
        if self.is_rational:
            return f"AlgebraicReal({self.lo})"
        return f"AlgebraicReal(root of {self.poly} in ({float(self.lo)}, {float(self.hi)}))"

    # comparisons ---------------------------------------------------------

    def _cmp_rational(self, x: Fraction) -> int:
        """Sign of ``self - x``."""
        if self.is_rational:
            d = self.lo - x
            return (d > 0) - (d < 0)
        if x <= self.lo:
            return 1
        if x >= self.hi:
            return -1
        sx = self.poly.sign_at(x)
        if sx == 0:
            self.lo = self.hi = x
            return 0
        # the root lies on the side where the sign differs from sign(x)
        return -1 if sx != self.poly.sign_at(self.lo) else 1

    def compare(self, other) -> int:
        """Three-way exact comparison."""
        if not isinstance(other, AlgebraicReal):
            return self._cmp_rational(_frac(other))
        if other.is_rational:
            return self._cmp_rational(other.lo)
        if self.is_rational:
            return -other._cmp_rational(self.lo)
        g = None
        while True:
            if self.hi <= other.lo:
                return -1
            if other.hi <= self.lo:
                return 1
            if self.is_rational or other.is_rational:
                return self.compare(other)
            if g is None:
                g = self.poly.gcd(other.poly)
            if g.degree >= 1 and _is_root_of(self, g) and _is_root_of(other, g):
                lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
                if count_roots_open(sturm_sequence(g), lo, hi) == 1:
                    return 0
            self.bisect()
            other.bisect()

    def __eq__(self, other) -> bool:
        return self.compare(other) == 0

    def __lt__(self, other) -> bool:
        return self.compare(other) < 0

    def __le__(self, other) -> bool:
        return self.compare(other) <= 0

    def __gt__(self, other) -> bool:
        return self.compare(other) > 0

    def __ge__(self, other) -> bool:
        return self.compare(other) >= 0

    __hash__ = None  # type: ignore[assignment]


def _is_root_of(r: AlgebraicReal, g: Poly) -> bool:
    # g divides r.poly, so g is nonzero at the isolating endpoints
    return g.sign_at(r.lo) != g.sign_at(r.hi)


def sign_at(p: Poly, r: AlgebraicReal) -> int:
    """Exact sign of ``p`` at the algebraic number ``r``."""
    if r.is_rational:
        return p.sign_at(r.lo)
    if p.is_zero():
        return 0
    g = r.poly.gcd(p)
    if g.degree >= 1 and _is_root_of(r, g):
        return 0
    q = p.squarefree()
    seq = sturm_sequence(q)
    while True:
        if r.is_rational:
            return p.sign_at(r.lo)
        if q.sign_at(r.lo) and q.sign_at(r.hi) and count_roots_open(seq, r.lo, r.hi) == 0:
            return p.sign_at(r.lo)
        r.bisect()


# ---------------------------------------------------------------------------
# Root isolation
# ---------------------------------------------------------------------------


def isolate_roots(
    p: Poly, domain: tuple[Number, Number] = DOMAIN
) -> list[AlgebraicReal]:
    """Isolate the distinct real roots of ``p`` in the closed interval ``domain``.

    Returns roots in increasing order. Rational roots hit during bisection are
    returned exactly.
    """
    if p.is_zero():
        raise ValueError("polynomial is identically zero")
    lo, hi = _frac(domain[0]), _frac(domain[1])
    if p.degree == 0:
        return []
    q = p.squarefree()
    exact: list[Fraction] = []

    def deflate(x: Fraction) -> None:
        nonlocal q
        exact.append(x)
        q = q // Poly([-x, 1])

    for end in (lo, hi):
        if q.degree >= 1 and q(end) == 0:
            deflate(end)
    isolated: list[tuple[Fraction, Fraction]] = []
    if lo < hi and q.degree >= 1:
        work = [(lo, hi)]
        seq = sturm_sequence(q)
        while work:
            a, b = work.pop()
            n = count_roots_open(seq, a, b)
            if n == 0:
                continue
            if n == 1:
                isolated.append((a, b))
                continue
            m = (a + b) / 2
            if q(m) == 0:
                deflate(m)
                seq = sturm_sequence(q)
                # earlier isolating intervals keep their single (non-m) root
            work.append((a, m))
            work.append((m, b))
    out = [AlgebraicReal.rational(x) for x in exact]
    # defining polynomial: the final deflated factor still has the root simply
    out += [AlgebraicReal(q, a, b) for a, b in isolated]
    out.sort(key=lambda r: (r.lo, r.hi))
    return out


# ---------------------------------------------------------------------------
# Interval sets
# ---------------------------------------------------------------------------


def _point(x) -> AlgebraicReal:
    return x if isinstance(x, AlgebraicReal) else AlgebraicReal.rational(x)


class IntervalSet:
    """Sorted, disjoint union of closed intervals with exact endpoints.

    Sets are closed by convention: strict inequalities contribute the closure of
    their solution set.
    """

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[tuple] = ()):
        ivs = [(_point(a), _point(b)) for a, b in intervals]
        self.intervals: list[tuple[AlgebraicReal, AlgebraicReal]] = _normalize(ivs)

    @classmethod
    def full(cls, domain: tuple[Number, Number] = DOMAIN) -> "IntervalSet":
        return cls([domain])

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls()

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def contains(self, x: Number) -> bool:
        x = _frac(x)
        return any(a.compare(x) <= 0 <= b.compare(x) for a, b in self.intervals)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        i = j = 0
        A, B = self.intervals, other.intervals
        while i < len(A) and j < len(B):
            a0, a1 = A[i]
            b0, b1 = B[j]
            lo = a0 if a0 >= b0 else b0
            hi = a1 if a1 <= b1 else b1
            if lo <= hi:
                out.append((lo, hi))
            if a1 <= b1:
                i += 1
            else:
                j += 1
        res = IntervalSet()
        res.intervals = out
        return res

    def union(self, other: "IntervalSet") -> "IntervalSet":
        res = IntervalSet()
        res.intervals = _normalize(self.intervals + other.intervals)
        return res

    def issubset(self, other: "IntervalSet") -> bool:
        for a, b in self.intervals:
            if not any(c <= a and b <= d for c, d in other.intervals):
                return False
        return True

    def measure(self) -> float:
        return sum(float(b) - float(a) for a, b in self.intervals)

    def approx(self, precision: Fraction = DEFAULT_PRECISION) -> list[tuple[float, float]]:
        out = []
        for a, b in self.intervals:
            a.refine(precision)
            b.refine(precision)
            out.append((float(a.approx()), float(b.approx())))
        return out

    def format(self, digits: int = 6, precision: Fraction = DEFAULT_PRECISION) -> str:
        """Render like ``{{0.582145, 1.}}`` with ``digits`` significant figures."""
        parts = [
            "{" + f"{_fmt_number(a, digits)}, {_fmt_number(b, digits)}" + "}"
            for a, b in self.approx(precision)
        ]
        return "{" + ", ".join(parts) + "}"

    def __repr__(self) -> str:
        return f"IntervalSet({self.approx()})"


def _fmt_number(x: float, digits: int) -> str:
    text = f"{x:.{digits}g}"
    if "e" in text:
        return text
    if "." not in text:
        text += "."
    return text


def _normalize(ivs: list) -> list:
    ivs = [iv for iv in ivs if iv[0] <= iv[1]]
    if not ivs:
        return []
    ivs.sort(key=_SortKey)
    out = [ivs[0]]
    for a, b in ivs[1:]:
        la, lb = out[-1]
        if a <= lb:
            if b > lb:
                out[-1] = (la, b)
        else:
            out.append((a, b))
    return out


class _SortKey:
    __slots__ = ("iv",)

    def __init__(self, iv):
        self.iv = iv

    def __lt__(self, other) -> bool:
        return self.iv[0] < other.iv[0]


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

RELATIONS = (">", ">=", "<", "<=")


@dataclass(frozen=True)
class Atom:
    """``poly  rel  0``."""

    poly: Poly
    rel: str

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")

    def holds_for_sign(self, sign: int) -> bool:
        return {
            ">": sign > 0,
            ">=": sign >= 0,
            "<": sign < 0,
            "<=": sign <= 0,
        }[self.rel]

    def holds(self, x: Number) -> bool:
        return self.holds_for_sign(self.poly.sign_at(x))

    def __str__(self) -> str:
        return f"({self.poly} {self.rel} 0)"


@dataclass(frozen=True)
class And:
    args: tuple

    def __str__(self) -> str:
        return "(" + " & ".join(map(str, self.args)) + ")" if self.args else "TRUE"


@dataclass(frozen=True)
class Or:
    args: tuple

    def __str__(self) -> str:
        return "(" + " | ".join(map(str, self.args)) + ")" if self.args else "FALSE"


TRUE = And(())
FALSE = Or(())

Formula = Union[Atom, And, Or]


def conj(*args: Formula) -> Formula:
    flat = []
    for a in args:
        if isinstance(a, And):
            flat.extend(a.args)
        elif a == FALSE:
            return FALSE
        else:
            flat.append(a)
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*args: Formula) -> Formula:
    flat = []
    for a in args:
        if isinstance(a, Or):
            flat.extend(a.args)
        elif a == TRUE:
            return TRUE
        else:
            flat.append(a)
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def atoms(phi: Formula) -> list[Atom]:
    if isinstance(phi, Atom):
        return [phi]
    out: list[Atom] = []
    for a in phi.args:
        out.extend(atoms(a))
    return out


def evaluate(phi: Formula, x: Number) -> bool:
    """Exact truth value at a rational point."""
    if isinstance(phi, Atom):
        return phi.holds(x)
    if isinstance(phi, And):
        return all(evaluate(a, x) for a in phi.args)
    return any(evaluate(a, x) for a in phi.args)


def _evaluate_signs(phi: Formula, signs: dict) -> bool:
    if isinstance(phi, Atom):
        return phi.holds_for_sign(signs[phi.poly])
    if isinstance(phi, And):
        return all(_evaluate_signs(a, signs) for a in phi.args)
    return any(_evaluate_signs(a, signs) for a in phi.args)


def _between(a: AlgebraicReal, b: AlgebraicReal) -> Fraction:
    """A rational strictly between ``a < b``."""
    while a.hi >= b.lo:
        if a.is_rational and b.is_rational:
            break
        a.bisect()
        b.bisect()
        if a.is_rational and b.is_rational:
            break
    return (a.hi + b.lo) / 2


def atom_set(atom: Atom, domain: tuple[Number, Number] = DOMAIN) -> IntervalSet:
    """Closed satisfying set of a single atom."""
    return satisfying_set_by_cells(atom, domain)


def satisfying_set_by_cells(
    phi: Formula, domain: tuple[Number, Number] = DOMAIN
) -> IntervalSet:
    """Satisfying set via a cell decomposition at all atom roots.

    The domain is cut at every root of every atom; the formula is evaluated
    exactly at each breakpoint and at a rational test point inside each cell.
    """
    lo, hi = _frac(domain[0]), _frac(domain[1])
    polys = []
    seen = set()
    for a in atoms(phi):
        if a.poly not in seen:
            seen.add(a.poly)
            polys.append(a.poly)
    points: list[AlgebraicReal] = [AlgebraicReal.rational(lo), AlgebraicReal.rational(hi)]
    for p in polys:
        if p.is_zero():
            continue
        points.extend(isolate_roots(p, (lo, hi)))
    points = _dedupe_sorted(points)

    def truth_at_point(r: AlgebraicReal) -> bool:
        signs = {p: sign_at(p, r) for p in polys}
        return _evaluate_signs(phi, signs)

    def truth_at_rational(x: Fraction) -> bool:
        signs = {p: p.sign_at(x) for p in polys}
        return _evaluate_signs(phi, signs)

    pieces = []
    for i, r in enumerate(points):
        if truth_at_point(r):
            pieces.append((r, r))
        if i + 1 < len(points):
            nxt = points[i + 1]
            if truth_at_rational(_between(r, nxt)):
                pieces.append((r, nxt))
    return IntervalSet(pieces)


def _dedupe_sorted(points: list[AlgebraicReal]) -> list[AlgebraicReal]:
    points = sorted(points, key=_PointKey)
    out: list[AlgebraicReal] = []
    for p in points:
        if not out or out[-1].compare(p) != 0:
            out.append(p)
    return out


class _PointKey:
    __slots__ = ("p",)

    def __init__(self, p):
        self.p = p

    def __lt__(self, other) -> bool:
        return self.p < other.p


def satisfying_set(
    phi: Formula,
    domain: tuple[Number, Number] = DOMAIN,
    precision: Fraction = DEFAULT_PRECISION,
) -> IntervalSet:
    """Closed subset of ``domain`` where ``phi`` holds.

    Conjunctions and disjunctions are combined set-wise, atoms by cell
    decomposition. ``precision`` only affects how far endpoints are refined
    eagerly; the endpoints themselves are exact.
    """
    result = _sat(phi, domain)
    for a, b in result.intervals:
        a.refine(precision)
        b.refine(precision)
    return result


def _sat(phi: Formula, domain) -> IntervalSet:
    if isinstance(phi, Atom):
        return _atom_fast(phi, domain)
    if isinstance(phi, And):
        out = IntervalSet.full(domain)
        for a in phi.args:
            out = out.intersect(_sat(a, domain))
            if not out:
                break
        return out
    out = IntervalSet.empty()
    for a in phi.args:
        out = out.union(_sat(a, domain))
    return out


def _atom_fast(atom: Atom, domain) -> IntervalSet:
    p = atom.poly
    lo, hi = _frac(domain[0]), _frac(domain[1])
    if p.degree <= 0:
        ok = atom.holds_for_sign((p.lead > 0) - (p.lead < 0))
        return IntervalSet.full((lo, hi)) if ok else IntervalSet.empty()
    return satisfying_set_by_cells(atom, (lo, hi))

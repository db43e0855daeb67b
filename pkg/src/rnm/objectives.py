"""Two-dimensional test objectives with analytic first and second derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Protocol

import numpy as np

from .simplex import Simplex


class Objective(Protocol):
    def __call__(self, p) -> float: ...


class DifferentiableObjective(Objective, Protocol):
    def gradient_hessian(self, p) -> tuple[np.ndarray, np.ndarray]: ...


@dataclass(frozen=True)
class QuadraticObjective:
    """``f(p) = 0.5 p^T A p + b^T p + c`` with symmetric ``A``."""

    A: np.ndarray
    b: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.shape != (2, 2) or not np.array_equal(A, A.T):
            raise ValueError("A must be a symmetric 2x2 matrix")
        A.setflags(write=False)
        b = np.array(self.b, dtype=float).reshape(2)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @classmethod
    def from_coefficients(cls, a11, a12, a22, b1, b2, c=0.0) -> "QuadraticObjective":
        return cls(np.array([[a11, a12], [a12, a22]], dtype=float), np.array([b1, b2], dtype=float), c)

    def __call__(self, p) -> float:
        x, y = float(p[0]), float(p[1])
        A, b = self.A, self.b
        return 0.5 * (A[0, 0] * x * x + 2.0 * A[0, 1] * x * y + A[1, 1] * y * y) + b[0] * x + b[1] * y + self.c

    def gradient_hessian(self, p) -> tuple[np.ndarray, np.ndarray]:
        p = np.asarray(p, dtype=float)
        return self.A @ p + self.b, self.A.copy()

    def is_positive_definite(self) -> bool:
        return bool(self.A[0, 0] > 0 and np.linalg.det(self.A) > 0)

    def minimizer(self) -> np.ndarray:
        return np.linalg.solve(self.A, -self.b)

    def describe(self) -> str:
        A, b = self.A, self.b
        vals = (A[0, 0], A[0, 1], A[1, 1], b[0], b[1], self.c)
        return "quad:" + ",".join(_fmt_num(v) for v in vals)


def _fmt_num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


@dataclass(frozen=True)
class McKinnonObjective:
    """``2400|x|^3 + y + y^2`` for ``x <= 0`` and ``6x^3 + y + y^2`` for ``x >= 0``.

    Strictly convex and twice continuously differentiable, with a Hessian that
    is singular only at the origin. Three-point simplices started at the
    standard triangle inside-contract forever towards ``(0, 0)``, which is not
    the minimizer ``(0, -1/2)``.
    """

    def __call__(self, p) -> float:
        x, y = float(p[0]), float(p[1])
        cube = 2400.0 * abs(x) ** 3 if x <= 0 else 6.0 * x**3
        return cube + y + y * y

    def gradient_hessian(self, p) -> tuple[np.ndarray, np.ndarray]:
        x, y = float(p[0]), float(p[1])
        if x <= 0:
            gx, hxx = -7200.0 * x * x, -14400.0 * x
        else:
            gx, hxx = 18.0 * x * x, 36.0 * x
        return np.array([gx, 1.0 + 2.0 * y]), np.array([[hxx, 0.0], [0.0, 2.0]])


@dataclass(frozen=True)
class MonotoneWrapped:
    """``g(inner(p))`` for a strictly increasing scalar ``g``."""

    inner: Objective
    g: Callable[[float], float]

    def __call__(self, p) -> float:
        return float(self.g(self.inner(p)))


def cubic_plus_identity(z: float) -> float:
    """``z**3 + z``, a strictly increasing map used to test order invariance."""
    return z * z * z + z


def evaluate(obj: Objective, p) -> float:
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError(f"non-finite point {p.tolist()}")
    return float(obj(p))


def fd_gradient_hessian(obj: Objective, p, step: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """Central finite differences with step ``1e-6 * max(1, |p|)`` by default."""
    p = np.asarray(p, dtype=float)
    h = step if step is not None else 1e-6 * max(1.0, float(np.linalg.norm(p)))
    n = p.size
    e = np.eye(n) * h
    g = np.array([(obj(p + e[i]) - obj(p - e[i])) / (2 * h) for i in range(n)])
    # a larger step keeps the second differences out of the rounding noise
    H = np.empty((n, n))
    h2 = max(h, 1e-4 * max(1.0, float(np.linalg.norm(p))))
    e2 = np.eye(n) * h2
    f0 = obj(p)
    for i in range(n):
        H[i, i] = (obj(p + e2[i]) - 2 * f0 + obj(p - e2[i])) / h2**2
        for j in range(i + 1, n):
            H[i, j] = H[j, i] = (
                obj(p + e2[i] + e2[j]) - obj(p + e2[i] - e2[j]) - obj(p - e2[i] + e2[j]) + obj(p - e2[i] - e2[j])
            ) / (4 * h2**2)
    return g, H


def gradient_hessian(obj: Objective, p) -> tuple[np.ndarray, np.ndarray]:
    """Analytic derivatives when the objective provides them, finite differences otherwise."""
    fn = getattr(obj, "gradient_hessian", None)
    if fn is not None:
        g, H = fn(np.asarray(p, dtype=float))
        return np.asarray(g, dtype=float), np.asarray(H, dtype=float)
    return fd_gradient_hessian(obj, p)


QUAD42 = QuadraticObjective.from_coefficients(4, 1, 6, -3, 5, 0)


def mckinnon_start_points() -> np.ndarray:
    r = math.sqrt(33.0)
    return np.array([[0.0, 0.0], [1.0, 1.0], [(1.0 + r) / 8.0, (1.0 - r) / 8.0]])


def quad42_start_points() -> np.ndarray:
    return np.array([[0.0, 0.5], [0.25, -0.75], [-0.8, 0.0]])


def mckinnon_start(obj: Optional[Objective] = None) -> Simplex:
    return Simplex.from_points(mckinnon_start_points(), obj or McKinnonObjective())


def quad42_start(obj: Optional[Objective] = None) -> Simplex:
    return Simplex.from_points(quad42_start_points(), obj or QUAD42)


PRESETS = {
    "mckinnon-start": mckinnon_start_points,
    "quad-42-start": quad42_start_points,
}


def parse_objective(text: str) -> Objective:
    """``mckinnon`` or ``quad:a11,a12,a22,b1,b2,c`` with ``f = 0.5 p^T A p + b^T p + c``."""
    text = text.strip()
    if text == "mckinnon":
        return McKinnonObjective()
    if text.startswith("quad:"):
        body = text[len("quad:"):]
        parts = body.split(",")
        if len(parts) != 6:
            raise ValueError(f"quadratic needs 6 coefficients a11,a12,a22,b1,b2,c; got {len(parts)} in {text!r}")
        vals = []
        pos = len("quad:")
        for part in parts:
            try:
                vals.append(float(part))
            except ValueError:
                raise ValueError(f"bad number {part!r} at position {pos} in {text!r}") from None
            pos += len(part) + 1
        return QuadraticObjective.from_coefficients(*vals)
    raise ValueError(f"unknown objective {text!r}; expected 'mckinnon' or 'quad:a11,a12,a22,b1,b2,c'")

"""Local coordinate frames that put a quadratic model into normal form.

At a base point ``b`` with gradient ``g`` and positive definite Hessian ``H``
the frame ``p~ = M^-1 (p - b)`` satisfies ``g.m1 = 0``, ``g.m2 = 1``,
``m1.H.m1 = 1`` and ``m1.H.m2 = 0``, so the degree-2 Taylor model becomes
``f(b) + y~ + x~^2/2 + alpha*y~^2/2`` with ``alpha = m2.H.m2``. Triangle
width, height and flatness (area over width cubed) are measured in these
coordinates.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .objectives import Objective, gradient_hessian
from .simplex import MoveTrace, Simplex

MAX_CONDITION = 1e12
HEIGHT_FACTOR = 10.0
FLATNESS_LIMIT = 10.0


class NoFrameError(ValueError):
    """No normal-form frame exists at the requested base point."""


class FlatnessUndefinedError(ValueError):
    """The triangle has zero transformed width."""


@dataclass(frozen=True)
class LocalFrame:
    base: np.ndarray
    M: np.ndarray
    M_inv: np.ndarray
    alpha: float

    def to_local(self, points) -> np.ndarray:
        """Map rows of ``points`` to frame coordinates."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return (p - self.base) @ self.M_inv.T

    def to_global(self, local) -> np.ndarray:
        q = np.atleast_2d(np.asarray(local, dtype=float))
        return q @ self.M.T + self.base


def local_frame(g, H, b) -> LocalFrame:
    """Frame at ``b`` from the gradient ``g`` and Hessian ``H`` there."""
    g = np.asarray(g, dtype=float).reshape(2)
    H = np.asarray(H, dtype=float).reshape(2, 2)
    b = np.asarray(b, dtype=float).reshape(2)
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(H))):
        raise NoFrameError("no frame exists: non-finite derivatives")
    if not np.any(g):
        raise NoFrameError("at minimizer, frame undefined: gradient is zero")
    H = 0.5 * (H + H.T)
    eig = np.linalg.eigvalsh(H)
    if eig[0] <= 0:
        raise NoFrameError(f"no frame exists: Hessian is not positive definite (eigenvalues {eig.tolist()})")
    if eig[1] / eig[0] > MAX_CONDITION:
        raise NoFrameError(f"no frame exists: Hessian condition number {eig[1] / eig[0]:.3g} exceeds {MAX_CONDITION:g}")
    # gradient rotated 90 degrees clockwise
    gh = np.array([g[1], -g[0]])
    m1 = gh / math.sqrt(float(gh @ H @ gh))
    w = np.linalg.solve(H, g)
    m2 = w / float(g @ w)
    M = np.column_stack([m1, m2])
    return LocalFrame(b, M, np.linalg.inv(M), float(m2 @ H @ m2))


def frame_at(objective: Objective, b) -> LocalFrame:
    g, H = gradient_hessian(objective, b)
    return local_frame(g, H, b)


@dataclass(frozen=True)
class FrameMetrics:
    width: float
    height: float
    area: float
    flatness: float


def frame_metrics(triangle, frame: LocalFrame) -> FrameMetrics:
    q = frame.to_local(triangle)
    if q.shape != (3, 2):
        raise ValueError(f"expected three 2-D vertices, got shape {q.shape}")
    w = float(np.ptp(q[:, 0]))
    h = float(np.ptp(q[:, 1]))
    e = q[1:] - q[0]
    area = 0.5 * abs(float(e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0]))
    if w == 0.0:
        raise FlatnessUndefinedError("flatness undefined: transformed width is zero")
    return FrameMetrics(w, h, area, area / w**3)


def contraction_predicates(metrics: FrameMetrics) -> tuple[bool, bool]:
    """``(h <= 10 w^2, flatness <= 10)``."""
    return (
        metrics.height <= HEIGHT_FACTOR * metrics.width**2,
        metrics.flatness <= FLATNESS_LIMIT,
    )


BASE_WORST = "worst"
BASE_MIDPOINT = "midpoint"
# not a normal-form frame: the original coordinates, translated to the worst vertex
BASE_AXES = "axes"
BASE_POLICIES = (BASE_WORST, BASE_MIDPOINT, BASE_AXES)


def triangle_frame(objective: Objective, simplex: Simplex, base: str = BASE_WORST) -> LocalFrame:
    """Frame at the worst vertex, or at the midpoint of the edge joining the
    leftmost and rightmost vertices as seen from the worst-vertex frame.

    ``axes`` skips the normal form and measures in the original coordinates,
    which is the only choice that stays meaningful where the Hessian degenerates.
    """
    pts = simplex.points()
    if base == BASE_AXES:
        return LocalFrame(pts[-1], np.eye(2), np.eye(2), math.nan)
    f1 = frame_at(objective, pts[-1])
    if base == BASE_WORST:
        return f1
    if base != BASE_MIDPOINT:
        raise ValueError(f"unknown base point policy {base!r}")
    x = f1.to_local(pts)[:, 0]
    mid = 0.5 * (pts[int(np.argmin(x))] + pts[int(np.argmax(x))])
    return frame_at(objective, mid)


@dataclass(frozen=True)
class Diagnostic:
    """Metrics of the triangle on which the iteration's move was taken."""

    iteration: int
    code2d: Optional[int]
    kind: str
    metrics: Optional[FrameMetrics]
    frame_error: str = ""

    @property
    def is_contraction(self) -> bool:
        return self.kind in ("inside_contract", "outside_contract")

    @property
    def h_over_w(self) -> float:
        return self.metrics.height / self.metrics.width if self.metrics else math.nan

    @property
    def h_over_w2(self) -> float:
        return self.metrics.height / self.metrics.width**2 if self.metrics else math.nan

    def predicates(self) -> tuple[Optional[bool], Optional[bool]]:
        return contraction_predicates(self.metrics) if self.metrics else (None, None)


def diagnose_run(trace: MoveTrace, objective: Objective, base: str = BASE_WORST) -> list[Diagnostic]:
    """Per-iteration frame metrics; frame failures are recorded, not raised."""
    if trace.initial.dimension != 2:
        raise ValueError("diagnostics need a two-dimensional trace")
    before = [trace.initial, *trace.simplices[:-1]]
    out = []
    for k, (rec, s) in enumerate(zip(trace.records, before), 1):
        try:
            m = frame_metrics(s.points(), triangle_frame(objective, s, base))
            out.append(Diagnostic(k, rec.code2d, rec.kind, m))
        except (NoFrameError, FlatnessUndefinedError) as exc:
            out.append(Diagnostic(k, rec.code2d, rec.kind, None, str(exc)))
    return out


DIAGNOSTIC_COLUMNS = [
    "iteration", "code2d", "w", "h", "area", "flatness",
    "h_over_w", "h_over_w2", "h_bound_ok", "flatness_ok", "frame_error",
]


def diagnostics_csv(diags: list[Diagnostic]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(DIAGNOSTIC_COLUMNS)
    for d in diags:
        code = "" if d.code2d is None else d.code2d
        if d.metrics is None:
            wr.writerow([d.iteration, code, "", "", "", "", "", "", "", "", d.frame_error])
            continue
        m = d.metrics
        hb, fl = d.predicates()
        wr.writerow([
            d.iteration, code, repr(m.width), repr(m.height), repr(m.area), repr(m.flatness),
            repr(d.h_over_w), repr(d.h_over_w2), int(hb), int(fl), "",
        ])
    return buf.getvalue()


def fit_height_exponent(diags: list[Diagnostic], first: int, last: int) -> float:
    """Least-squares slope of ``log h`` against ``log w`` over iterations ``first..last``."""
    sel = [d for d in diags if first <= d.iteration <= last and d.metrics and d.metrics.height > 0]
    if len(sel) < 2:
        raise ValueError("need at least two iterations with valid metrics")
    lw = np.log([d.metrics.width for d in sel])
    lh = np.log([d.metrics.height for d in sel])
    return float(np.polyfit(lw, lh, 1)[0])

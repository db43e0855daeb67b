"""Restricted Nelder-Mead: simplex engine, frame diagnostics and an exact move-sequence certifier."""

from .simplex import (
    DomainError,
    EvaluationError,
    MoveRecord,
    MoveTrace,
    RunConfig,
    Simplex,
    Vertex,
    nm_step,
    order_vertices,
    rnm_step,
    run,
)
from .objectives import (
    McKinnonObjective,
    MonotoneWrapped,
    QuadraticObjective,
    evaluate,
    gradient_hessian,
    mckinnon_start,
    parse_objective,
    quad42_start,
)
from .frame import FrameMetrics, LocalFrame, NoFrameError, contraction_predicates, diagnose_run, frame_metrics, local_frame

__all__ = [
    "DomainError", "EvaluationError", "MoveRecord", "MoveTrace", "RunConfig", "Simplex", "Vertex",
    "nm_step", "order_vertices", "rnm_step", "run",
    "McKinnonObjective", "MonotoneWrapped", "QuadraticObjective", "evaluate", "gradient_hessian",
    "mckinnon_start", "parse_objective", "quad42_start",
    "FrameMetrics", "LocalFrame", "NoFrameError", "contraction_predicates", "diagnose_run",
    "frame_metrics", "local_frame",
]

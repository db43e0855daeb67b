import csv
import io

import numpy as np
import pytest

from rnm.frame import (
    BASE_AXES,
    BASE_MIDPOINT,
    BASE_WORST,
    DIAGNOSTIC_COLUMNS,
    FlatnessUndefinedError,
    LocalFrame,
    NoFrameError,
    contraction_predicates,
    diagnose_run,
    diagnostics_csv,
    fit_height_exponent,
    frame_at,
    frame_metrics,
    local_frame,
    triangle_frame,
)
from rnm.objectives import QUAD42, McKinnonObjective, mckinnon_start, quad42_start
from rnm.simplex import RunConfig, run


def test_identity_hessian_gives_identity_frame():
    fr = local_frame([0.0, 1.0], np.eye(2), [0.0, 0.0])
    assert np.allclose(fr.M, np.eye(2)) and fr.alpha == pytest.approx(1.0)


def test_anisotropic_hessian_alpha():
    fr = local_frame([0.0, 1.0], np.diag([1.0, 2.0]), [0.0, 0.0])
    assert fr.alpha == pytest.approx(2.0)
    fr = local_frame([1.0, 0.0], np.diag([1.0, 2.0]), [0.0, 0.0])
    assert fr.alpha == pytest.approx(1.0)
    fr = local_frame([0.0, 2.0], np.diag([1.0, 2.0]), [0.0, 0.0])
    # m2 = H^-1 g / (g.H^-1 g) = (0, 1/2), so alpha = 2 * 1/4
    assert fr.alpha == pytest.approx(0.5)


def test_frame_identities_on_random_data():
    rng = np.random.default_rng(0)
    for _ in range(200):
        L = rng.normal(size=(2, 2))
        H = L @ L.T + 0.1 * np.eye(2)
        g = rng.normal(size=2)
        fr = local_frame(g, H, rng.normal(size=2))
        m1, m2 = fr.M[:, 0], fr.M[:, 1]
        assert abs(g @ m1) < 1e-9 * np.linalg.norm(g) * np.linalg.norm(m1)
        assert g @ m2 == pytest.approx(1.0)
        assert m1 @ H @ m1 == pytest.approx(1.0)
        assert abs(m1 @ H @ m2) < 1e-9 * (1 + abs(fr.alpha))
        assert np.allclose(fr.M @ fr.M_inv, np.eye(2))
        assert np.linalg.det(fr.M) > 0
        # orientation is fixed: m1 points along the gradient turned clockwise
        assert m1 @ np.array([g[1], -g[0]]) > 0


def test_taylor_model_is_in_normal_form():
    rng = np.random.default_rng(1)
    for _ in range(50):
        L = rng.normal(size=(2, 2))
        H = L @ L.T + 0.1 * np.eye(2)
        g = rng.normal(size=2)
        fr = local_frame(g, H, np.zeros(2))
        xt, yt = rng.normal(size=2)
        d = fr.to_global([xt, yt])[0]
        model = g @ d + 0.5 * d @ H @ d
        assert model == pytest.approx(yt + 0.5 * xt**2 + 0.5 * fr.alpha * yt**2, abs=1e-9)


def test_frame_errors():
    with pytest.raises(NoFrameError, match="at minimizer"):
        local_frame([0.0, 0.0], np.eye(2), [0, 0])
    with pytest.raises(NoFrameError, match="no frame exists"):
        local_frame([0.0, 1.0], np.diag([1.0, 0.0]), [0, 0])
    with pytest.raises(NoFrameError, match="condition"):
        local_frame([0.0, 1.0], np.diag([1.0, 1e-13]), [0, 0])
    with pytest.raises(NoFrameError, match="non-finite"):
        local_frame([np.nan, 1.0], np.eye(2), [0, 0])


def test_round_trip_local_coordinates():
    fr = frame_at(QUAD42, [0.3, 0.2])
    pts = np.array([[0.0, 0.5], [0.25, -0.75], [-0.8, 0.0]])
    assert np.allclose(fr.to_global(fr.to_local(pts)), pts)


def test_metrics_example():
    ident = LocalFrame(np.zeros(2), np.eye(2), np.eye(2), 1.0)
    m = frame_metrics([[0, 0], [1, 0], [0, 1]], ident)
    assert (m.width, m.height, m.area, m.flatness) == (1.0, 1.0, 0.5, 0.5)
    with pytest.raises(FlatnessUndefinedError):
        frame_metrics([[0, 0], [0, 1], [0, 2]], ident)


def test_contraction_predicate_examples():
    ident = LocalFrame(np.zeros(2), np.eye(2), np.eye(2), 1.0)
    # w = 0.1, h = 0.15: h/w^2 = 15, flatness 7.5
    m = frame_metrics([[0, 0], [0.1, 0], [0.05, 0.15]], ident)
    assert contraction_predicates(m) == (False, True)
    # w = 2, h = 3: h/w^2 = 3/4, flatness = 3/8
    m = frame_metrics([[0, 0], [2, 0], [1, 3]], ident)
    assert contraction_predicates(m) == (True, True)
    m = frame_metrics([[0, 0], [0.1, 0], [0.05, 30]], ident)
    assert m.flatness > 10 and not contraction_predicates(m)[1]


def test_finite_difference_frame_matches_analytic():
    def plain(p):
        return QUAD42(p)

    for b in ([0.3, 0.2], [-1.0, 0.5], [2.0, -2.0]):
        a = frame_at(QUAD42, b)
        f = frame_at(plain, b)
        assert np.allclose(a.M, f.M, rtol=1e-4, atol=1e-6)
        assert a.alpha == pytest.approx(f.alpha, rel=1e-4)


def test_base_policies():
    obj = McKinnonObjective()
    s = run(obj, mckinnon_start(obj), RunConfig(max_iterations=10)).final
    worst = triangle_frame(obj, s, BASE_WORST)
    assert np.array_equal(worst.base, s.points()[-1])
    mid = triangle_frame(obj, s, BASE_MIDPOINT)
    x = worst.to_local(s.points())[:, 0]
    pts = s.points()
    assert np.allclose(mid.base, 0.5 * (pts[np.argmin(x)] + pts[np.argmax(x)]))
    axes = triangle_frame(obj, s, BASE_AXES)
    assert np.array_equal(axes.M, np.eye(2))
    with pytest.raises(ValueError):
        triangle_frame(obj, s, "centroid")


def test_diagnostics_csv_columns_and_frame_failures():
    obj = McKinnonObjective()
    trace = run(obj, mckinnon_start(obj), RunConfig(max_iterations=6))
    diags = diagnose_run(trace, obj, BASE_WORST)
    assert [d.iteration for d in diags] == list(range(1, 7))
    rows = list(csv.DictReader(io.StringIO(diagnostics_csv(diags))))
    assert list(rows[0]) == DIAGNOSTIC_COLUMNS
    for r, d in zip(rows, diags):
        if d.metrics is None:
            assert r["frame_error"] and r["w"] == ""
        else:
            assert float(r["w"]) == d.metrics.width and r["h_bound_ok"] in ("0", "1")


def test_quadratic_contractions_satisfy_predicates():
    trace = run(QUAD42, quad42_start(), RunConfig(max_iterations=500, value_tolerance=1e-12))
    diags = [d for d in diagnose_run(trace, QUAD42) if d.is_contraction]
    assert diags and all(d.predicates() == (True, True) for d in diags)


def test_mckinnon_height_exponent_depends_on_frame():
    obj = McKinnonObjective()
    trace = run(obj, mckinnon_start(obj), RunConfig(max_iterations=60))
    assert set(trace.kinds()) == {"inside_contract"}
    axes = fit_height_exponent(diagnose_run(trace, obj, BASE_AXES), 20, 40)
    worst = fit_height_exponent(diagnose_run(trace, obj, BASE_WORST), 20, 40)
    # the normal-form frame scales x by about 6 sqrt(x), which changes the fitted slope
    assert axes == pytest.approx(3.06, abs=0.02)
    assert worst == pytest.approx(2.0, abs=0.02)
    with pytest.raises(ValueError):
        fit_height_exponent([], 1, 2)

import json
import random
from fractions import Fraction

import pytest

from rnm.certifier import (
    EPS,
    CertificationReport,
    MoveSequenceResult,
    ParametricTriangle,
    apply_move,
    compare_with_reference,
    decode,
    encode,
    enumerate_possible,
    flatness_step_condition,
    load_reference,
    move_inequalities,
    parse_output_line,
    possible_set_of,
)
from rnm.exact import DOMAIN, FALSE, TRUE, IntervalSet, Poly, evaluate, satisfying_set

F = Fraction
HI = DOMAIN[1]


def coords(v):
    return v.x, v.y


def test_codes_round_trip():
    for code in range(1, 10):
        assert encode(*decode(code)) == code
    assert decode(4) == ("inside", 0) and decode(9) == ("outside", 2)
    with pytest.raises(ValueError):
        decode(0)


def test_apply_move_examples():
    start = ParametricTriangle.initial()
    # inside contraction replacing A = (-1, -u) with 1/4 (B + C) + 1/2 A
    a = apply_move(start, 4).vertices[0]
    assert coords(a) == ((F(-1, 4), F(1, 4)), (0, F(1, 4), F(-1, 4)))
    # reflection of A through the midpoint of B and C
    a = apply_move(start, 1).vertices[0]
    assert coords(a) == ((F(2), F(1)), (0, F(1), F(2)))
    # inside contraction replacing C = (1, u)
    c = apply_move(start, 6).vertices[2]
    assert coords(c) == ((F(1, 4), F(1, 4)), (0, F(1, 4), F(1, 4)))
    tri = apply_move(start, 6)
    assert tri.contractions == 1 and tri.steps == 1


def test_move_inequalities_for_inside_contraction_of_a():
    start = ParametricTriangle.initial()
    # default ordering is (B, C, A): A is compared with C, then with B
    cons = move_inequalities(start, 4)
    vs_c, vs_b = cons[0], cons[1]
    # psi(A) - psi(C) = -2u
    assert vs_c.phi == Poly() and (vs_c.nu, vs_c.omega, vs_c.theta) == (0, -2, -EPS)
    # psi(A) - psi(B) = 1/2 - s^2/2 - t - u
    assert vs_b.phi == Poly([F(1, 2), 0, F(-1, 2)])
    assert (vs_b.nu, vs_b.omega, vs_b.theta, vs_b.strict) == (-1, -1, -EPS, True)
    with pytest.raises(ValueError, match="inconsistent"):
        move_inequalities(start, 4, ordering=(0, 1, 2))


def test_flatness_condition_examples():
    start = ParametricTriangle.initial()
    # one contraction halves the area while the width stays 2 for s in [0, 1]
    assert not evaluate(flatness_step_condition(start, apply_move(start, 4)), F(1, 2))
    # a reflection keeps area and width
    for s in (0, F(1, 2), 1):
        assert evaluate(flatness_step_condition(start, apply_move(start, 1)), s)
    assert evaluate(flatness_step_condition(start, start), F(1, 3))


def test_flatness_after_inside_contraction_of_c():
    start = ParametricTriangle.initial()
    cond = flatness_step_condition(start, apply_move(start, 6))
    sset = satisfying_set(cond, DOMAIN)
    [(a, b)] = sset.approx()
    assert b == pytest.approx(1.00001, abs=1e-7)
    assert a == pytest.approx(0.582145, abs=1e-6)


def test_coordinates_stay_exact_and_bounded():
    rng = random.Random(0)
    bound = F(400005, 10000)
    for _ in range(500):
        tri = ParametricTriangle.initial()
        for ell in range(1, rng.randint(1, 20) + 1):
            tri = apply_move(tri, rng.randint(1, 9))
            for v in tri.vertices:
                for q in (*v.x, *v.y):
                    assert 4**ell % q.denominator == 0
                a, b = v.x
                lam = max(abs(a), abs(a + b * HI))
                assert lam <= F(100001, 100000) + F(400002, 100000) * ell
                c, d, e = v.y
                assert abs(c) + (abs(d) + abs(e)) * bound <= bound * (1 + 2 * ell)


def test_depth_three_matches_reference():
    results = enumerate_possible(3)
    lines = [r.format() for r in results]
    assert lines == [
        "{5} possible for s in {{0.999999, 1.00001}}",
        "{5, 6} possible for s in {{0.999999, 1.00001}}",
        "{6} possible for s in {{0.582145, 1.}}",
        "{6, 2} possible for s in {{0.582145, 0.737035}}",
        "{6, 2, 1} possible for s in {{0.582145, 0.695708}}",
        "{6, 2, 5} possible for s in {{0.582145, 0.737035}}",
        "{6, 2, 8} possible for s in {{0.582145, 0.614711}}",
        "{6, 5} possible for s in {{0.582145, 1.}}",
        "{6, 8} possible for s in {{0.582145, 0.853944}}",
        "{6, 8, 4} possible for s in {{0.582145, 0.810502}}",
        "{6, 8, 7} possible for s in {{0.582145, 0.853944}}",
    ]
    assert compare_with_reference(results, load_reference(), 1e-5, 3) == ([], [], [])


def test_direct_recomputation_agrees_with_search():
    results = {r.sequence: r.possible_set for r in enumerate_possible(3)}
    for seq, sset in results.items():
        assert possible_set_of(seq).format() == sset.format()
    # a handful of sequences the search rejected
    for seq in [(4,), (1,), (7,), (6, 6), (6, 2, 2), (6, 3), (5, 6, 4)]:
        assert seq not in results and not possible_set_of(seq)


def test_reflection_cannot_undo_a_reflection():
    assert not possible_set_of((6, 2, 2))
    assert possible_set_of((6, 2))


def test_parse_output_line():
    seq, ivs = parse_output_line("{6, 2, 1} possible for s in {{0.582145, 0.695708}, {0.8, 1.}}")
    assert seq == (6, 2, 1) and ivs == [(0.582145, 0.695708), (0.8, 1.0)]
    with pytest.raises(ValueError):
        parse_output_line("nonsense")
    line = MoveSequenceResult((6,), IntervalSet([(F(1, 2), 1)])).format()
    assert parse_output_line(line) == ((6,), [(0.5, 1.0)])


def test_reference_fixture():
    ref = load_reference()
    assert len(ref) == 67
    assert max(map(len, ref)) == 13
    assert ref[(6,)] == [(0.582145, 1.0)]


def test_report_json_and_verdict():
    results = enumerate_possible(2)
    missing, extra, dev = compare_with_reference(results, load_reference(), 1e-5, 2)
    rep = CertificationReport(results, 2, 2, missing, extra, dev, 1e-5, 0.0)
    data = json.loads(rep.dumps())
    assert data["matches_reference"] and not data["certified"] and data["passed"]
    first = data["sequences"][0]
    assert first["sequence"] == [5]
    assert first["intervals"] == [[pytest.approx(0.999999, abs=1e-6), 1.00001]]
    assert "wall_time" not in data
    assert any(line.startswith("verdict: PASS") for line in rep.summary())
    bad = CertificationReport(results, 2, 2, [(9,)], [], [], 1e-5, 0.0)
    assert not bad.passed and "  missing [9]" in bad.summary()


def test_comparison_flags_deviations():
    results = enumerate_possible(1)
    ref = {(5,): [(0.999999, 1.00001)], (6,): [(0.58, 1.0)]}
    missing, extra, dev = compare_with_reference(results, ref, 1e-5)
    assert not missing and not extra
    assert [d["sequence"] for d in dev] == [[6]]


@pytest.mark.slow
def test_full_search_is_prefix_closed_and_shrinking(certify_run):
    parsed = dict(certify_run["parsed"])
    for seq, ivs in parsed.items():
        if len(seq) == 1:
            continue
        parent = parsed[seq[:-1]]
        for a, b in ivs:
            assert any(c - 1e-6 <= a and b <= d + 1e-6 for c, d in parent)


def test_trivial_formulas():
    assert satisfying_set(TRUE, DOMAIN)
    assert not satisfying_set(FALSE, DOMAIN)

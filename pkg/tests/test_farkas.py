import random
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from scipy.optimize import linprog

from rnm.exact import DOMAIN, FALSE, TRUE, Poly, evaluate, satisfying_set
from rnm.farkas import Row, SLinearConstraint, circuit_conditions, dedupe_rows, feasibility_condition

S = Poly.s()


def c(phi, nu, om, theta, strict=False):
    return SLinearConstraint(Poly.const(phi) if not isinstance(phi, Poly) else phi, Fraction(nu), Fraction(om), Fraction(theta), strict)


def lp_feasible(rows, s):
    A = np.array([[-float(r.nu), -float(r.omega)] for r in rows])
    b = np.array([float(r.phi(s)) - float(r.theta) for r in rows])
    res = linprog(np.zeros(2), A_ub=A, b_ub=b, bounds=[(None, None)] * 2, method="highs")
    return res.status == 0


def random_system(rng, n_max=6):
    rows = []
    for _ in range(rng.randint(1, n_max)):
        phi = Poly([Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(rng.randint(1, 3))])
        rows.append(c(phi, rng.randint(-2, 2), rng.randint(-2, 2), Fraction(rng.randint(-4, 4), rng.randint(1, 3))))
    return rows


def test_contradictory_pair_is_false():
    assert feasibility_condition([c(0, 1, 0, 0), c(0, -1, 0, 1)]) == FALSE


def test_single_halfplane_is_true():
    assert feasibility_condition([c(S, 1, 1, 0)]) == TRUE


def test_empty_system_is_true():
    assert feasibility_condition([]) == TRUE


def test_bounded_by_s():
    # t >= s and -t >= -1
    phi = feasibility_condition([c(-S, 1, 0, 0), c(0, -1, 0, -1)])
    assert evaluate(phi, Fraction(1, 2)) and evaluate(phi, 1)
    assert not evaluate(phi, Fraction(100001, 100000))
    [(lo, hi)] = satisfying_set(phi, DOMAIN).approx()
    assert lo == 0.0 and hi == pytest.approx(1.0, abs=1e-7)


def test_pure_rows_become_atoms():
    # 1 - s >= 1/2 involves neither t nor u
    phi = feasibility_condition([c(1 - S, 0, 0, Fraction(1, 2))])
    assert evaluate(phi, Fraction(1, 4)) and not evaluate(phi, Fraction(3, 4))


def test_triangle_circuit():
    # t >= 0, u >= 0, -t - u >= -s: feasible iff s >= 0
    phi = feasibility_condition([c(0, 1, 0, 0), c(0, 0, 1, 0), c(S, -1, -1, 0)])
    assert evaluate(phi, 0) and evaluate(phi, Fraction(1, 3))
    phi2 = feasibility_condition([c(0, 1, 0, 0), c(0, 0, 1, 0), c(S, -1, -1, 1)])
    assert not evaluate(phi2, Fraction(1, 2)) and evaluate(phi2, 1)


def test_rows_are_scaled_to_integers():
    r = Row.from_constraint(c(Fraction(1, 2) * S, Fraction(1, 3), Fraction(-2, 3), Fraction(1, 6)))
    assert (r.nu, r.om, r.d) == (2, -4, (1, -3))
    assert len(dedupe_rows([r, Row.from_constraint(c(S, Fraction(2, 3), Fraction(-4, 3), Fraction(1, 3)))])) == 1


def test_agrees_with_lp_oracle():
    rng = random.Random(11)
    for _ in range(150):
        rows = random_system(rng)
        phi = feasibility_condition(rows)
        for _ in range(20):
            s = Fraction(rng.randint(0, 100001), 100000)
            assert evaluate(phi, s) == lp_feasible(rows, s)


def test_adding_a_constraint_never_enlarges_the_set():
    rng = random.Random(12)
    for _ in range(60):
        rows = random_system(rng, 5)
        extra = random_system(rng, 1)
        small = satisfying_set(feasibility_condition(rows + extra), DOMAIN)
        big = satisfying_set(feasibility_condition(rows), DOMAIN)
        assert small.issubset(big)


def test_three_row_subsets_decide_feasibility():
    rng = random.Random(13)
    for _ in range(60):
        rows = random_system(rng)
        for _ in range(5):
            s = Fraction(rng.randint(0, 100001), 100000)
            subsets_ok = all(
                lp_feasible(list(sub), s) for k in (1, 2, 3) for sub in combinations(rows, k) if len(sub) <= len(rows)
            )
            assert subsets_ok == lp_feasible(rows, s)


def test_incremental_circuits_match_full_recomputation():
    rng = random.Random(14)
    for _ in range(50):
        rows = dedupe_rows(Row.from_constraint(r) for r in random_system(rng, 6))
        k = rng.randint(0, len(rows))
        assert circuit_conditions(rows[:k]) | circuit_conditions(rows, k) == circuit_conditions(rows)

import itertools
import random
from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from pcsp.catalog import catalog_get, one_in_three
from pcsp.core import Relation, Structure, find_homomorphism, planted_instance
from pcsp.relaxations import (build_relaxation_system, relative_interior_solution, solve_aip, solve_blp,
                              solve_blp_aip)


def rxxx():
    return Structure(1, [Relation("R", 3, [(0, 0, 0)])])


def dense(system):
    M = np.zeros((len(system.rows), system.num_vars))
    for i, row in enumerate(system.rows):
        for j, c in row.items():
            M[i, j] = c
    return M, np.array(system.rhs, dtype=float)


@st.composite
def instances(draw):
    A = Structure(2, [Relation("R", 3, sorted(draw(st.sets(st.tuples(*[st.integers(0, 1)] * 3),
                                                           min_size=1, max_size=4))))])
    n = draw(st.integers(1, 3))
    scopes = draw(st.sets(st.tuples(*[st.integers(0, n - 1)] * 3), min_size=1, max_size=2))
    return Structure(n, [Relation("R", 3, sorted(scopes))]), A


def test_system_shape_on_the_fixture():
    system = build_relaxation_system(rxxx(), one_in_three())
    assert system.num_vars == 5 and len(system.rows) == 8
    assert system.variables[0] == ("mu", 0, 0) and system.variables[2] == ("lambda", 0, (0, 0, 1))


def test_fixture_verdicts():
    X, A = rxxx(), one_in_three()
    blp = solve_blp(X, A)
    assert blp.accepted
    third = Fraction(1, 3)
    assert blp.certificate == (Fraction(2, 3), third, third, third, third)
    assert not solve_aip(X, A)
    v = solve_blp_aip(X, A)
    assert not v and "integer" in v.rejected_reason


def test_certificate_serialization():
    X, A = rxxx(), one_in_three()
    system = build_relaxation_system(X, A)
    out = solve_blp(X, A).to_dict(system)
    assert out["certificate"][0] == ["mu[0][0]", "2/3"]
    assert out["certificate"][2] == ["lambda[0][0,0,1]", "1/3"]
    assert "certificate" not in solve_aip(X, A).to_dict()


def test_empty_template_relation_rejects_everything():
    A = Structure(2, [Relation("R", 2, [])])
    X = Structure(1, [Relation("R", 2, [(0, 0)])])
    for solver in (solve_blp, solve_aip, solve_blp_aip):
        assert not solver(X, A)


def test_no_constraints_accepts():
    X = Structure(2, [Relation("R", 3, [])])
    for solver in (solve_blp, solve_aip, solve_blp_aip):
        v = solver(X, one_in_three())
        assert v and build_relaxation_system(X, one_in_three()).satisfied_by(v.certificate)


@settings(max_examples=120, deadline=None)
@given(instances())
def test_blp_matches_floating_point_oracle(pair):
    X, A = pair
    system = build_relaxation_system(X, A)
    M, b = dense(system)
    res = linprog(np.zeros(system.num_vars), A_eq=M, b_eq=b, bounds=[(0, None)] * system.num_vars, method="highs")
    v = solve_blp(X, A)
    assert v.accepted == (res.status == 0)
    if v:
        assert system.satisfied_by(v.certificate)


@settings(max_examples=80, deadline=None)
@given(instances())
def test_aip_certificates_and_box_search(pair):
    X, A = pair
    system = build_relaxation_system(X, A)
    v = solve_aip(X, A)
    if v:
        assert all(sum(c * v.certificate[j] for j, c in row.items()) == r for row, r in zip(system.rows, system.rhs))
    if system.num_vars <= 8:
        found = any(all(sum(c * x[j] for j, c in row.items()) == r for row, r in zip(system.rows, system.rhs))
                    for x in itertools.product(range(-1, 2), repeat=system.num_vars))
        if found:
            assert v


@settings(max_examples=60, deadline=None)
@given(instances())
def test_relative_interior_has_maximal_support(pair):
    X, A = pair
    system = build_relaxation_system(X, A)
    point = relative_interior_solution(system)
    if point is None:
        assert not solve_blp(X, A)
        return
    assert system.satisfied_by(point)
    M, b = dense(system)
    for j in range(system.num_vars):
        c = np.zeros(system.num_vars)
        c[j] = -1
        res = linprog(c, A_eq=M, b_eq=b, bounds=[(0, None)] * system.num_vars, method="highs")
        assert (point[j] > 0) == (-res.fun > 1e-9)


@settings(max_examples=80, deadline=None)
@given(instances())
def test_hierarchy_and_soundness(pair):
    X, A = pair
    both = solve_blp_aip(X, A)
    if both:
        assert solve_blp(X, A) and solve_aip(X, A)
    if find_homomorphism(X, A) is not None:
        assert both and solve_blp(X, A) and solve_aip(X, A)


def test_blp_aip_integer_point_respects_support():
    X, A = rxxx(), catalog_get("nae")
    system = build_relaxation_system(X, A)
    point = relative_interior_solution(system)
    v = solve_blp_aip(X, A)
    assert v
    assert all(v.certificate[j] == 0 for j, p in enumerate(point) if p == 0)


def test_planted_instances_are_accepted():
    rng = random.Random(5)
    for key in ["one_in_three", "eqn(3,1)", "remark_5_1"]:
        A = catalog_get(key)
        for _ in range(5):
            X, _h = planted_instance(A, 5, 4, rng)
            assert solve_blp(X, A) and solve_aip(X, A) and solve_blp_aip(X, A)

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from pcsp.catalog import catalog_get, eqn, linear_equation, nae, one_in_three
from pcsp.classifier import (INCONCLUSIVE, NP_HARD, TRACTABLE, ClassifierBounds, ClassifierVerdict,
                             affine_assignment, alternating_witness, build_affine_structure, classify,
                             index_vector, sandwich_search, solve_instance, unit_embedding, vector_index)
from pcsp.core import Relation, Structure, compose, is_homomorphism, planted_instance
from pcsp.errors import DataError, InvalidTemplate, PromiseViolation, ResourceLimitExceeded, VerdictMismatch
from pcsp.polymorphisms import ALTERNATING, is_polymorphism, symmetry_kind


def affine_hull(tuples, a, m):
    """All sums c_1 t_1 + .. + c_s t_s (mod m) with c's summing to 1."""
    flat = [[int(v == x) for x in t for v in range(a)] for t in tuples]
    out = set()
    for cs in itertools.product(range(m), repeat=len(flat)):
        if sum(cs) % m != 1 % m:
            continue
        v = [sum(c * f[i] for c, f in zip(cs, flat)) % m for i in range(len(flat[0]))]
        r = len(tuples[0])
        out.add(tuple(vector_index(v[i * a:(i + 1) * a], m) for i in range(r)))
    return out


@st.composite
def symmetric_boolean(draw, arity=3):
    seeds = draw(st.sets(st.tuples(*[st.integers(0, 1)] * arity), min_size=1, max_size=2))
    tuples = {tuple(t[p] for p in pi) for t in seeds for pi in itertools.permutations(range(arity))}
    return Structure(2, [Relation("R", arity, sorted(tuples))])


# -- affine structures -------------------------------------------------------------

def test_vector_codec_round_trip():
    for m, a in [(2, 2), (3, 2), (4, 3)]:
        for i in range(m ** a):
            assert vector_index(index_vector(i, m, a), m) == i


@pytest.mark.parametrize("m,size", [(1, 1), (2, 4), (3, 9), (4, 16)])
def test_coset_sizes_for_one_in_three(m, size):
    cos = build_affine_structure(one_in_three(), m).cosets[0]
    assert cos.size == size
    assert len(set(cos.tuples())) == size


@settings(max_examples=60, deadline=None)
@given(st.sets(st.tuples(*[st.integers(0, 2)] * 2), min_size=1, max_size=4), st.integers(1, 3))
def test_cosets_equal_affine_hulls(tuples, m):
    A = Structure(3, [Relation("R", 2, sorted(tuples))])
    cos = build_affine_structure(A, m).cosets[0]
    hull = affine_hull(sorted(tuples), 3, m)
    assert set(cos.tuples()) == hull
    for t in itertools.product(range(m ** 3), repeat=2):
        assert cos.contains(t) == (t in hull)


def test_unit_embedding_is_a_homomorphism():
    for key in ["one_in_three", "nae", "cyclic_plus(3)", "remark_5_1"]:
        A = catalog_get(key)
        for m in (1, 2, 3):
            Am = build_affine_structure(A, m).materialize()
            assert is_homomorphism(unit_embedding(A, m), A, Am)
    with pytest.raises(DataError):
        build_affine_structure(one_in_three(), 0)


def test_alternating_witness():
    aff = build_affine_structure(one_in_three(), 2)
    Am = aff.materialize()
    f = alternating_witness(aff, 1)
    assert symmetry_kind(f) == ALTERNATING
    assert is_polymorphism(f, Am, Am)
    with pytest.raises(ResourceLimitExceeded):
        alternating_witness(build_affine_structure(one_in_three(), 3), 3, cap=1000)


def test_caps_raise():
    with pytest.raises(ResourceLimitExceeded):
        build_affine_structure(one_in_three(), 5).materialize(cap=10)
    with pytest.raises(ResourceLimitExceeded):
        sandwich_search(one_in_three(), eqn(3, 1), 3, domain_cap=5)
    with pytest.raises(ResourceLimitExceeded):
        sandwich_search(one_in_three(), eqn(3, 1), 3, coset_cap=5)


@settings(max_examples=40, deadline=None)
@given(symmetric_boolean(), st.integers(1, 3), st.integers(2, 3))
def test_sandwich_search_matches_exhaustive_maps(A, m, b):
    B = linear_equation(b, 1, 3)
    Am = build_affine_structure(A, m).materialize()
    got = sandwich_search(A, B, m)
    brute = any(is_homomorphism(h, Am, B) for h in itertools.product(range(b), repeat=Am.domain_size))
    assert (got is not None) == brute
    if got is not None:
        assert is_homomorphism(got, Am, B)


# -- classification ----------------------------------------------------------------

def test_bounds():
    b = ClassifierBounds.for_template(one_in_three(), one_in_three())
    assert b.m_max == b.default_m_max == 16
    assert ClassifierBounds.for_template(one_in_three(), eqn(3, 1), 4).m_max == 4
    with pytest.raises(DataError):
        ClassifierBounds.for_template(one_in_three(), one_in_three(), 0)


def test_constant_tuple_gives_m_one():
    v = classify(one_in_three(), eqn(2, 1))
    assert v.outcome == TRACTABLE and v.m == 1


def test_one_in_three_to_mod3():
    v = classify(one_in_three(), eqn(3, 1))
    assert v.outcome == TRACTABLE and v.m == 3
    for m in (1, 2):
        assert sandwich_search(one_in_three(), eqn(3, 1), m) is None
    h = compose(unit_embedding(one_in_three(), 3), v.sandwich_hom)
    assert is_homomorphism(h, one_in_three(), eqn(3, 1))
    assert v.to_dict()["m"] == 3


def test_one_in_three_to_itself_is_hard():
    v = classify(one_in_three(), one_in_three())
    assert v.outcome == NP_HARD and v.m_bound_exhausted == 16
    assert v.preconditions["additive_dependent_route"] is not None


def test_lower_bound_stays_inconclusive():
    v = classify(one_in_three(), one_in_three(), ClassifierBounds.for_template(one_in_three(), one_in_three(), 5))
    assert v.outcome == INCONCLUSIVE and "below" in v.reason


def test_preconditions():
    v = classify(one_in_three(), nae())
    assert v.outcome == INCONCLUSIVE and not v.preconditions["B_functional"]
    S = catalog_get("remark_5_2")
    assert classify(S, S).outcome == INCONCLUSIVE
    with pytest.raises(InvalidTemplate):
        classify(eqn(3, 1), nae())


@pytest.fixture(scope="module")
def parity_pair_verdict():
    B = catalog_get("remark_4_4")
    return B, classify(B, B)


def test_components_route(parity_pair_verdict):
    _B, v = parity_pair_verdict
    assert v.outcome == TRACTABLE and v.preconditions["route"] == "components"
    assert [c[1].m for c in v.components] == [2, 3]


@settings(max_examples=25, deadline=None)
@given(symmetric_boolean())
def test_least_m_and_soundness(A):
    B = eqn(3, 1)
    try:
        v = classify(A, B, ClassifierBounds.for_template(A, B, 4))
    except InvalidTemplate:
        return
    if v.outcome == TRACTABLE and not v.components:
        assert is_homomorphism(compose(unit_embedding(A, v.m), v.sandwich_hom), A, B)
        for m in range(1, v.m):
            assert sandwich_search(A, B, m) is None
    elif v.outcome != TRACTABLE:
        for m in range(1, 5):
            assert sandwich_search(A, B, m) is None


# -- solving ------------------------------------------------------------------------

def test_planted_solving():
    A, B = one_in_three(), eqn(3, 1)
    v = classify(A, B)
    rng = random.Random(2)
    for _ in range(30):
        X, _h = planted_instance(A, rng.randint(1, 30), rng.randint(1, 30), rng)
        g = affine_assignment(X, A, v.m)
        assert is_homomorphism(g, X, build_affine_structure(A, v.m).materialize())
        assert is_homomorphism(solve_instance(X, A, B, v), X, B)


def test_promise_violation_and_wrong_verdict():
    A, B = one_in_three(), eqn(3, 1)
    v = classify(A, B)
    X = Structure(1, [Relation("R", 3, [(0, 0, 0)])])
    with pytest.raises(PromiseViolation):
        solve_instance(X, A, B, v)
    with pytest.raises(VerdictMismatch):
        solve_instance(X, A, B, ClassifierVerdict(NP_HARD))


def test_component_solving(parity_pair_verdict):
    B, v = parity_pair_verdict
    rng = random.Random(4)
    for _ in range(10):
        X, _h = planted_instance(B, 8, 4, rng)
        assert is_homomorphism(solve_instance(X, B, B, v), X, B)

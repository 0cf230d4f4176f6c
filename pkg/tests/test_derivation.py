import itertools

import pytest
from hypothesis import given, settings, strategies as st

from pcsp.analysis import hypergraph_metrics
from pcsp.catalog import catalog_get, one_in_three
from pcsp.core import Relation, Structure
from pcsp.derivation import (DerivationContext, ProofTree, check_sufficient_conditions, delta, derivable_set,
                             derives, gamma, is_super_connected, super_connected_report, validate_proof)
from pcsp.errors import DataError, ResourceLimitExceeded


def naive_closure(R, premises, n):
    """Fixpoint by trying every matrix of n columns from R."""
    D = set(premises)
    r = len(R[0])
    while True:
        new = set()
        for cols in itertools.product(R, repeat=n):
            rows = [tuple(c[i] for c in cols) for i in range(r)]
            if all(row in D for row in rows[1:]) and rows[0] not in D:
                new.add(rows[0])
        if not new:
            return D
        D |= new


@st.composite
def relations(draw, arity, domain):
    tuples = draw(st.sets(st.tuples(*[st.integers(0, domain - 1)] * arity), min_size=1, max_size=7))
    return Structure(domain, [Relation("R", arity, sorted(tuples))])


@st.composite
def symmetric_relations(draw, arity, domain):
    seeds = draw(st.sets(st.tuples(*[st.integers(0, domain - 1)] * arity), min_size=1, max_size=3))
    tuples = {tuple(t[p] for p in pi) for t in seeds for pi in itertools.permutations(range(arity))}
    return Structure(domain, [Relation("R", arity, sorted(tuples))])


def test_premise_sets():
    A = one_in_three()
    assert len(gamma(A)) == 6
    assert (0, 1, 1) in gamma(A) and (1, 0, 1) in gamma(A) and (1, 1, 0) not in gamma(A)
    assert len(delta(catalog_get("eqn(3,1)"), 3)) == 27 - 6
    with pytest.raises(DataError):
        delta(A, 0)


def test_gamma_saturates_one_in_three():
    ctx = DerivationContext(one_in_three(), "R", 3)
    assert derivable_set(ctx, gamma(one_in_three())) == frozenset(itertools.product((0, 1), repeat=3))


def test_proof_of_110_revalidates():
    A = one_in_three()
    ctx = DerivationContext(A, "R", 3)
    tree = derives(ctx, gamma(A), (1, 1, 0))
    assert tree is not None and tree.tuple == (1, 1, 0)
    assert tree.depth == 2
    assert validate_proof(tree, A.relations[0].tuples, gamma(A))
    assert set(tree.leaves()) <= gamma(A)


def test_tampered_proof_is_rejected():
    A = one_in_three()
    tree = derives(DerivationContext(A, "R", 3), gamma(A), (1, 1, 0))
    bad = ProofTree(tree.tuple, tree.columns, list(reversed(tree.children)))
    assert not validate_proof(bad, A.relations[0].tuples, gamma(A))
    assert not validate_proof(ProofTree((1, 1, 0)), A.relations[0].tuples, gamma(A))


def test_underivable_target():
    S = Structure(2, [Relation("N", 2, [(0, 1), (1, 0)])])
    ctx = DerivationContext(S, "N", 3)
    assert derives(ctx, gamma(S), (1, 1, 0)) is None
    assert derivable_set(ctx, gamma(S)) == gamma(S)


def test_bad_premise_is_a_data_error():
    with pytest.raises(DataError):
        derivable_set(DerivationContext(one_in_three(), "R", 3), [(0, 2, 0)])


def test_node_cap_raises():
    B = catalog_get("remark_4_4")
    with pytest.raises(ResourceLimitExceeded):
        is_super_connected(B, node_cap=100)


@pytest.mark.parametrize("key", ["one_in_three", "nae", "eqn(3,1)", "cyclic_plus(4)", "q_in_r(2,4)", "remark_5_1"])
def test_super_connected_catalog(key):
    assert is_super_connected(catalog_get(key)) is not None


@pytest.mark.parametrize("key", ["remark_5_2", "remark_5_3"])
def test_not_super_connected_catalog(key):
    assert is_super_connected(catalog_get(key)) is None


def test_report_and_sufficient_conditions():
    rep = super_connected_report(one_in_three())
    assert rep["R"] == {"derived": 8, "of": 8, "complete": True}
    sc = check_sufficient_conditions(one_in_three())
    assert sc["additive_sufficient"] and sc["dependent_sufficient"]
    diseq = Structure(2, [Relation("N", 2, [(0, 1), (1, 0)])])
    sc = check_sufficient_conditions(diseq)
    assert sc["additive"] == "unknown"


def test_permuted_proofs_stay_valid():
    A = one_in_three()
    tree = derives(DerivationContext(A, "R", 3), gamma(A), (1, 1, 0))
    for pi in itertools.permutations(range(3)):
        moved = {tuple(g[p] for p in pi) for g in gamma(A)}
        assert validate_proof(tree.permuted(pi), A.relations[0].tuples, moved)


@settings(max_examples=60, deadline=None)
@given(relations(3, 2), st.sets(st.tuples(*[st.integers(0, 1)] * 2), max_size=3))
def test_closure_matches_naive_fixpoint(S, premises):
    R = list(S.relations[0].tuples)
    ctx = DerivationContext(S, "R", 2)
    assert derivable_set(ctx, premises) == naive_closure(R, premises, 2)


@settings(max_examples=40, deadline=None)
@given(relations(2, 3), st.sets(st.tuples(*[st.integers(0, 2)] * 3), max_size=4))
def test_closure_matches_naive_fixpoint_binary(S, premises):
    R = list(S.relations[0].tuples)
    assert derivable_set(DerivationContext(S, "R", 3), premises) == naive_closure(R, premises, 3)


@settings(max_examples=40, deadline=None)
@given(relations(3, 2), st.sets(st.tuples(*[st.integers(0, 1)] * 3), max_size=3),
       st.sets(st.tuples(*[st.integers(0, 1)] * 3), max_size=3))
def test_monotone_reflexive_and_idempotent(S, p, q):
    ctx = DerivationContext(S, "R", 3)
    Dp = derivable_set(ctx, p)
    assert set(p) <= Dp
    assert Dp <= derivable_set(ctx, set(p) | set(q))
    assert derivable_set(ctx, Dp) == Dp


@settings(max_examples=40, deadline=None)
@given(symmetric_relations(3, 3))
def test_diameter_one_means_super_connected(S):
    # the coordinate shuffling in the argument needs a symmetric relation
    if hypergraph_metrics(S).diameter <= 1:
        assert is_super_connected(S) is not None


@settings(max_examples=40, deadline=None)
@given(symmetric_relations(3, 3))
def test_connected_ternary_means_super_connected(S):
    if hypergraph_metrics(S).connected:
        assert is_super_connected(S) is not None


@settings(max_examples=25, deadline=None)
@given(symmetric_relations(4, 3))
def test_connected_quaternary_means_super_connected(S):
    if hypergraph_metrics(S).connected:
        assert is_super_connected(S) is not None


def test_asymmetric_relation_can_fail_despite_diameter_one():
    S = Structure(3, [Relation("R", 3, [(0, 1, 2)])])
    assert hypergraph_metrics(S).diameter == 1
    assert is_super_connected(S) is None

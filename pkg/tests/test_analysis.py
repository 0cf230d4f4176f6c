import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from pcsp.analysis import (INF, adjacent_transpositions, check_balance_witness, cyclic_shift,
                           digraph_balanced_via_scc, hypergraph_metrics, is_balanced, is_functional, is_symmetric,
                           permutation_closure, transitive_group_preserves)
from pcsp.catalog import catalog_get, eqn, linear_equation, nae, one_in_three
from pcsp.core import Relation, Structure
from pcsp.errors import DataError


def rel(tuples, name="R"):
    tuples = sorted(set(tuples))
    return Relation(name, len(tuples[0]), tuples)


def test_symmetry_findings():
    assert is_symmetric(one_in_three())
    f = is_symmetric(catalog_get("remark_5_3"))
    assert not f and f.witness == ((0, 1), (1, 0))
    assert not is_symmetric(catalog_get("remark_5_2"))


def test_functionality_findings():
    assert is_functional(one_in_three())
    for m in range(1, 10):
        S = eqn(m, 1 % m if m > 1 else 0)
        assert is_functional(S) and is_symmetric(S)
    f = is_functional(nae())
    assert not f and f.witness == ((0, 1, 0), (0, 1, 1))


def test_metrics():
    m = hypergraph_metrics(one_in_three())
    assert m.diameter == 1 and m.connected
    B = catalog_get("remark_4_4")
    mb = hypergraph_metrics(B)
    assert mb.diameter == INF and not mb.connected
    assert mb.to_dict()["diameter"] == "inf"
    path = Structure(3, [Relation("E", 2, [(0, 1), (1, 2)])])
    assert hypergraph_metrics(path).distances[0][2] == 2


def test_balance_fixtures():
    w = is_balanced(one_in_three().relations[0])
    assert set(w.counts.values()) == {1}
    rows = [sorted(r) for r in w.matrix]
    assert all(r == rows[0] for r in rows)
    assert is_balanced(Relation("P", 2, [(0, 1)])) is None
    assert is_balanced(Relation("S", 3, [(0, 0, 1), (0, 1, 0), (0, 1, 1)])) is None
    with pytest.raises(DataError):
        is_balanced(Relation("R", 2, []))


def test_balance_witness_checks_out():
    for key in ["one_in_three", "nae", "eqn(3,1)", "cyclic_plus(4)", "remark_4_4(1)", "q_in_r(2,4)"]:
        R = catalog_get(key).relations[0]
        w = is_balanced(R)
        assert w is not None and check_balance_witness(R, w)


def test_parity_witness_counts():
    w = is_balanced(linear_equation(2, 1, 3).relations[0])
    assert w.counts == {(0, 0, 1): 1, (0, 1, 0): 1, (1, 0, 0): 1, (1, 1, 1): 1}


def brute_balanced(R, limit=4):
    """Search small positive counts directly."""
    tuples = R.tuples
    for counts in itertools.product(range(1, limit + 1), repeat=len(tuples)):
        rows = []
        for i in range(R.arity):
            freq = {}
            for t, c in zip(tuples, counts):
                freq[t[i]] = freq.get(t[i], 0) + c
            rows.append(freq)
        if all(r == rows[0] for r in rows):
            return True
    return False


@settings(max_examples=120, deadline=None)
@given(st.sets(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=5))
def test_balance_matches_scc_and_small_search(edges):
    R = rel(edges)
    b = is_balanced(R) is not None
    assert b == digraph_balanced_via_scc(R)
    if brute_balanced(R):
        assert b


@settings(max_examples=60, deadline=None)
@given(st.sets(st.tuples(st.integers(0, 1), st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=4))
def test_balance_witness_valid_on_ternary(tuples):
    R = rel(tuples)
    w = is_balanced(R)
    if w is not None:
        assert check_balance_witness(R, w)
    else:
        assert not brute_balanced(R, 3)


def test_scc_rejects_wrong_arity():
    with pytest.raises(DataError):
        digraph_balanced_via_scc(one_in_three().relations[0])


def test_permutation_groups():
    assert len(permutation_closure(adjacent_transpositions(4), 4)) == 24
    assert len(permutation_closure([cyclic_shift(5)], 5)) == 5
    for k in range(2, 6):
        R = catalog_get(f"cyclic_plus({k})").relations[0]
        probe = transitive_group_preserves(R, [cyclic_shift(3)])
        assert probe.transitive and probe.preserved


def test_balanced_relation_without_a_transitive_group():
    # a strongly connected digraph that is not symmetric: the swap breaks it
    R = Relation("E", 2, [(0, 1), (1, 2), (2, 0), (0, 2)])
    assert is_balanced(R) is not None
    probe = transitive_group_preserves(R, [(1, 0)])
    assert probe.transitive and not probe.preserved
    assert probe.violation[0] == (1, 0)


def test_random_digraphs_six_vertices():
    rng = random.Random(11)
    for _ in range(60):
        edges = {(rng.randrange(6), rng.randrange(6)) for _ in range(rng.randint(1, 12))}
        R = rel(edges)
        assert (is_balanced(R) is not None) == digraph_balanced_via_scc(R)

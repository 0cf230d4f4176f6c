"""Structural predicates on templates."""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from functools import reduce
from typing import Optional, Sequence

import networkx as nx

from .core import Relation, Structure
from .errors import DataError
from .linear import lp_feasible_point

INF = math.inf


@dataclass(frozen=True)
class Finding:
    """Outcome of a yes/no check, with the reason when the answer is no."""

    holds: bool
    relation: Optional[str] = None
    witness: Optional[tuple] = None

    def __bool__(self):
        return self.holds

    def to_dict(self):
        out = {"holds": self.holds}
        if self.relation is not None:
            out["relation"] = self.relation
            out["witness"] = [list(w) for w in self.witness]
        return out


def is_symmetric(S: Structure) -> Finding:
    """Closed under all coordinate permutations.  On failure the witness is
    ``(present tuple, missing permutation of it)``."""
    for rel in S.relations:
        for t in rel.tuples:
            for p in itertools.permutations(t):
                if p not in rel.tuple_set:
                    return Finding(False, rel.name, (t, p))
    return Finding(True)


def is_functional(S: Structure) -> Finding:
    """Any r-1 coordinates determine the last.  Positions are tried from the
    last one backwards; the witness is the first colliding pair found."""
    for rel in S.relations:
        for pos in reversed(range(rel.arity)):
            seen = {}
            for t in rel.tuples:
                key = t[:pos] + t[pos + 1:]
                other = seen.setdefault(key, t)
                if other != t:
                    return Finding(False, rel.name, (other, t))
    return Finding(True)


@dataclass(frozen=True)
class HypergraphMetrics:
    distances: tuple
    diameter: float
    connected: bool

    def to_dict(self):
        enc = lambda d: "inf" if d == INF else d
        return {
            "distances": [[enc(d) for d in row] for row in self.distances],
            "diameter": enc(self.diameter),
            "connected": self.connected,
        }


def hypergraph_metrics(S: Structure, relation: Optional[str] = None) -> HypergraphMetrics:
    """BFS distances in the hypergraph whose edges are the relation's tuples.

    ``relation=None`` uses the first relation of S.
    """
    if relation is None:
        if not S.relations:
            raise DataError("structure has no relations")
        rel = S.relations[0]
    else:
        rel = S.relation(relation)
    a = S.domain_size
    adj = [set() for _ in range(a)]
    for t in rel.tuples:
        for x in t:
            adj[x].update(t)
    rows = []
    for s in range(a):
        dist = [INF] * a
        dist[s] = 0
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if dist[y] == INF:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        rows.append(tuple(dist))
    diameter = max((d for row in rows for d in row), default=0)
    return HypergraphMetrics(tuple(rows), diameter, diameter != INF)


@dataclass(frozen=True)
class BalanceWitness:
    """Column multiplicities ``counts[t]``; ``matrix`` lists the rows of the
    expanded witness, or is None when it would exceed the expansion cap."""

    counts: dict
    matrix: Optional[tuple]

    @property
    def num_columns(self):
        return sum(self.counts.values())

    def row_frequencies(self, arity: int) -> list:
        freq = [dict() for _ in range(arity)]
        for t, c in self.counts.items():
            for i, v in enumerate(t):
                freq[i][v] = freq[i].get(v, 0) + c
        return freq

    def to_dict(self):
        out = {"counts": [[list(t), c] for t, c in sorted(self.counts.items())]}
        if self.matrix is not None:
            out["matrix"] = [list(r) for r in self.matrix]
        return out


def is_balanced(R: Relation, expand_cap: int = 10_000) -> Optional[BalanceWitness]:
    """Positive integer column counts that make all rows permutations of each
    other, or None.

    Decided as rational feasibility with every count at least 1, writing
    ``c_t = 1 + d_t`` with ``d_t >= 0``; the system is homogeneous in ``c``
    so clearing denominators gives integers.
    """
    if not R.tuples:
        raise DataError(f"relation {R.name!r} is empty; balancedness needs a nonempty relation")
    tuples = R.tuples
    values = sorted(R.support())
    rows, rhs = [], []
    for i in range(1, R.arity):
        for v in values:
            coef = {}
            for k, t in enumerate(tuples):
                c = (t[i] == v) - (t[0] == v)
                if c:
                    coef[k] = c
            if coef:
                rows.append(coef)
                rhs.append(-sum(coef.values()))
    point = lp_feasible_point(rows, rhs, len(tuples))
    if point is None:
        return None
    counts = [1 + d for d in point]
    scale = reduce(math.lcm, (c.denominator for c in counts), 1)
    ints = [int(c * scale) for c in counts]
    g = reduce(math.gcd, ints)
    ints = [c // g for c in ints]
    mapping = dict(zip(tuples, ints))
    matrix = None
    if sum(ints) <= expand_cap:
        cols = [t for t, c in zip(tuples, ints) for _ in range(c)]
        matrix = tuple(tuple(col[i] for col in cols) for i in range(R.arity))
    return BalanceWitness(mapping, matrix)


def check_balance_witness(R: Relation, w: BalanceWitness) -> bool:
    if set(w.counts) != R.tuple_set or any(c < 1 for c in w.counts.values()):
        return False
    freq = w.row_frequencies(R.arity)
    if any(f != freq[0] for f in freq):
        return False
    if w.matrix is not None:
        rows = [sorted(r) for r in w.matrix]
        if any(r != rows[0] for r in rows):
            return False
        cols = set(zip(*w.matrix))
        if cols != R.tuple_set:
            return False
    return True


def digraph_balanced_via_scc(R: Relation) -> bool:
    """A binary relation is balanced iff every weakly connected component of
    its edge set is strongly connected.  Vertices without edges are ignored."""
    if R.arity != 2:
        raise DataError(f"relation {R.name!r} has arity {R.arity}; the component criterion needs arity 2")
    if not R.tuples:
        raise DataError(f"relation {R.name!r} is empty")
    g = nx.DiGraph()
    g.add_edges_from(R.tuples)
    weak = nx.number_weakly_connected_components(g)
    strong = nx.number_strongly_connected_components(g)
    return weak == strong


# --------------------------------------------------------------------------
# permutation groups
# --------------------------------------------------------------------------

def _check_perm(p, r):
    p = tuple(p)
    if len(p) != r or sorted(p) != list(range(r)):
        raise DataError(f"{p} is not a permutation of 0..{r - 1}")
    return p


def permutation_closure(generators: Sequence[Sequence[int]], r: int) -> frozenset:
    identity = tuple(range(r))
    gens = [_check_perm(g, r) for g in generators]
    seen = {identity}
    queue = deque([identity])
    while queue:
        p = queue.popleft()
        for g in gens:
            q = tuple(p[g[i]] for i in range(r))
            if q not in seen:
                seen.add(q)
                queue.append(q)
    return frozenset(seen)


def adjacent_transpositions(r: int) -> list:
    out = []
    for i in range(r - 1):
        p = list(range(r))
        p[i], p[i + 1] = p[i + 1], p[i]
        out.append(tuple(p))
    return out


def cyclic_shift(r: int) -> tuple:
    return tuple((i + 1) % r for i in range(r))


@dataclass(frozen=True)
class PermutationGroupProbe:
    generators: tuple
    closure: frozenset
    transitive: bool
    preserved: bool
    violation: Optional[tuple] = None

    def to_dict(self):
        out = {
            "generators": [list(g) for g in self.generators],
            "order": len(self.closure),
            "transitive": self.transitive,
            "preserved": self.preserved,
        }
        if self.violation is not None:
            out["violation"] = [list(x) for x in self.violation]
        return out


def transitive_group_preserves(R: Relation, generators: Sequence[Sequence[int]]) -> PermutationGroupProbe:
    """Close the generators into a group, report transitivity and whether every
    group element maps R into itself (a tuple t goes to ``t[p[0]], t[p[1]], ...``)."""
    r = R.arity
    gens = tuple(_check_perm(g, r) for g in generators)
    closure = permutation_closure(gens, r)
    orbit = {p[0] for p in closure}
    transitive = len(orbit) == r
    violation = None
    # checking generators suffices: R is finite so preservation by the
    # generators gives preservation by the whole group
    for g in gens:
        for t in R.tuples:
            img = tuple(t[g[i]] for i in range(r))
            if img not in R.tuple_set:
                violation = (g, t, img)
                break
        if violation:
            break
    return PermutationGroupProbe(gens, closure, transitive, violation is None, violation)

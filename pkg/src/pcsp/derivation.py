"""Syntactic derivations over a relation, and super-connectedness.

One inference rule does all the work: if the rows ``t_1 .. t_r`` of an
``r x n`` matrix whose columns all lie in R satisfy ``t_2 .. t_r`` in D, then
``t_1`` joins D.  The derivable set is the least fixpoint above the
premises; monotonicity, reflexivity and cut hold automatically for it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import Structure
from .errors import DataError, ResourceLimitExceeded

DEFAULT_NODE_CAP = 5_000_000


def gamma(A: Structure) -> frozenset:
    """Triples ``(r, s, s)`` and ``(s, r, s)``."""
    a = A.domain_size
    out = set()
    for r in range(a):
        for s in range(a):
            out.add((r, s, s))
            out.add((s, r, s))
    return frozenset(out)


def delta(A: Structure, n: int) -> frozenset:
    """n-tuples using at most two distinct values."""
    if n < 1:
        raise DataError("tuple length must be at least 1")
    return frozenset(t for t in itertools.product(range(A.domain_size), repeat=n) if len(set(t)) <= 2)


@dataclass(frozen=True)
class DerivationContext:
    structure: Structure
    relation: str
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DataError("tuple length must be at least 1")
        self.structure.relation(self.relation)

    @property
    def tuples(self):
        return self.structure.relation(self.relation).tuples


@dataclass
class ProofTree:
    """``columns`` is None at a leaf; otherwise the matrix columns whose
    first row is ``tuple`` and whose remaining rows are the children."""

    tuple: tuple
    columns: Optional[tuple] = None
    children: list = field(default_factory=list)

    @property
    def depth(self) -> int:
        return 0 if self.columns is None else 1 + max((c.depth for c in self.children), default=0)

    def leaves(self):
        if self.columns is None:
            yield self.tuple
        for c in self.children:
            yield from c.leaves()

    def to_dict(self):
        out = {"tuple": list(self.tuple)}
        if self.columns is not None:
            out["columns"] = [list(c) for c in self.columns]
            out["children"] = [c.to_dict() for c in self.children]
        return out

    def permuted(self, pi) -> "ProofTree":
        """The same proof with tuple positions reordered: position j of the
        result is position ``pi[j]`` of the original."""
        t = tuple(self.tuple[p] for p in pi)
        if self.columns is None:
            return ProofTree(t)
        cols = tuple(self.columns[p] for p in pi)
        return ProofTree(t, cols, [c.permuted(pi) for c in self.children])


def validate_proof(tree: ProofTree, relation_tuples: Iterable[tuple], premises: Iterable[tuple]) -> bool:
    """Re-check a tree from scratch: leaves are premises, and every inner
    node is the first row of a matrix with columns in R whose other rows are
    its children, in order."""
    R = set(relation_tuples)
    P = set(premises)

    def ok(node):
        if node.columns is None:
            return node.tuple in P
        cols = node.columns
        if len(cols) != len(node.tuple) or any(c not in R for c in cols):
            return False
        r = len(cols[0]) if cols else 0
        if any(len(c) != r for c in cols):
            return False
        if tuple(c[0] for c in cols) != node.tuple or len(node.children) != r - 1:
            return False
        for i, child in enumerate(node.children, start=1):
            if child.tuple != tuple(c[i] for c in cols) or not ok(child):
                return False
        return True

    return ok(tree)


class _Saturation:
    def __init__(self, ctx: DerivationContext, premises, node_cap):
        self.R = list(ctx.tuples)
        self.r = ctx.structure.relation(ctx.relation).arity
        self.n = ctx.n
        self.a = ctx.structure.domain_size
        for t in premises:
            if len(t) != self.n or any(not 0 <= x < self.a for x in t):
                raise DataError(f"premise {t} is not a {self.n}-tuple over the domain")
        self.D = set(premises)
        self.premises = frozenset(self.D)
        self.how = {}
        self.node_cap = node_cap
        self.nodes = 0
        # masks[pos][val]: bitmask over R of tuples with that value at pos
        self.masks = [[0] * self.a for _ in range(self.r)]
        for idx, t in enumerate(self.R):
            for pos, v in enumerate(t):
                self.masks[pos][v] |= 1 << idx
        self.full = (1 << len(self.R)) - 1

    def _tick(self, k=1):
        self.nodes += k
        if self.nodes > self.node_cap:
            raise ResourceLimitExceeded(f"derivation explored more than {self.node_cap} nodes", "node_cap")

    def _round(self):
        """One round with D frozen.  Returns the newly derived tuples.

        ``suffixes(j, rows)`` is the set of first-row suffixes reachable from
        column ``j`` on, given the other rows' prefixes; it depends only on
        ``(j, rows)``, so it is memoized.
        """
        D = self.D
        nxt = {}
        for t in D:
            for j in range(self.n):
                nxt.setdefault(t[:j], set()).add(t[j])
        R, r, n, a = self.R, self.r, self.n, self.a
        masks = self.masks

        if r == 1:
            # no premises needed: any tuple over the relation's values follows
            vals = sorted({c[0] for c in R})
            self._tick(len(vals) ** n)
            found = set(itertools.product(vals, repeat=n))
        else:
            def allowed(rows):
                m = self.full
                for i in range(1, r):
                    vals = nxt.get(rows[i - 1])
                    if not vals:
                        return 0
                    om = 0
                    for v in vals:
                        om |= masks[i][v]
                    m &= om
                    if not m:
                        return 0
                return m

            memo = {}

            def suffixes(j, rows):
                key = (j, rows)
                hit = memo.get(key)
                if hit is not None:
                    return hit
                self._tick()
                m = allowed(rows)
                out = set()
                if j == n - 1:
                    for v in range(a):
                        if m & masks[0][v]:
                            out.add((v,))
                else:
                    while m:
                        low = m & -m
                        m ^= low
                        c = R[low.bit_length() - 1]
                        self._tick()
                        sub = suffixes(j + 1, tuple(rows[i - 1] + (c[i],) for i in range(1, r)))
                        head = (c[0],)
                        for s_ in sub:
                            out.add(head + s_)
                out = frozenset(out)
                memo[key] = out
                return out

            found = suffixes(0, tuple(() for _ in range(r - 1)))
        new = {}
        for t in sorted(found):
            if t not in D:
                new[t] = self._columns_for(t, nxt)
        return new

    def _columns_for(self, t, nxt):
        """Columns of one matrix deriving ``t`` from the current D."""
        R, r, n = self.R, self.r, self.n
        if r == 1:
            return tuple((v,) for v in t)
        cands = [[c for c in R if c[0] == t[j]] for j in range(n)]
        dead = set()

        def go(j, rows, cols):
            if j == n:
                return cols
            if (j, rows) in dead:
                return None
            for c in cands[j]:
                if all(c[i] in nxt.get(rows[i - 1], ()) for i in range(1, r)):
                    self._tick()
                    got = go(j + 1, tuple(rows[i - 1] + (c[i],) for i in range(1, r)), cols + (c,))
                    if got is not None:
                        return got
            dead.add((j, rows))
            return None

        cols = go(0, tuple(() for _ in range(r - 1)), ())
        assert cols is not None
        return cols

    def run(self, target=None, goal_size=None):
        while True:
            if target is not None and target in self.D:
                return
            if goal_size is not None and len(self.D) >= goal_size:
                return
            new = self._round()
            if not new:
                return
            self.how.update(new)
            self.D.update(new)

    def tree(self, t) -> ProofTree:
        cols = self.how.get(t)
        if cols is None:
            return ProofTree(t)
        children = [self.tree(tuple(c[i] for c in cols)) for i in range(1, self.r)]
        return ProofTree(t, tuple(cols), children)


def derivable_set(ctx: DerivationContext, premises, node_cap: int = DEFAULT_NODE_CAP) -> frozenset:
    """Least fixpoint of the matrix rule above ``premises``."""
    sat = _Saturation(ctx, premises, node_cap)
    sat.run()
    return frozenset(sat.D)


def derives(ctx: DerivationContext, premises, t, node_cap: int = DEFAULT_NODE_CAP) -> Optional[ProofTree]:
    """A proof tree for ``t`` or None.  Derivation proceeds in rounds, so the
    tree has the least possible depth."""
    t = tuple(t)
    sat = _Saturation(ctx, premises, node_cap)
    sat.run(target=t)
    if t not in sat.D:
        return None
    return sat.tree(t)


def is_super_connected(A: Structure, node_cap: int = DEFAULT_NODE_CAP) -> Optional[str]:
    """First relation (in declaration order) for which the triples with a
    repeated pattern derive every triple; None if no relation does."""
    goal = A.domain_size ** 3
    premises = gamma(A)
    for rel in A.relations:
        sat = _Saturation(DerivationContext(A, rel.name, 3), premises, node_cap)
        sat.run(goal_size=goal)
        if len(sat.D) == goal:
            return rel.name
    return None


def super_connected_report(A: Structure, node_cap: int = DEFAULT_NODE_CAP) -> dict:
    """Per-relation outcome: derived-set size out of a^3, or ``resource``."""
    goal = A.domain_size ** 3
    out = {}
    for rel in A.relations:
        try:
            sat = _Saturation(DerivationContext(A, rel.name, 3), gamma(A), node_cap)
            sat.run(goal_size=goal)
            out[rel.name] = {"derived": len(sat.D), "of": goal, "complete": len(sat.D) == goal}
        except ResourceLimitExceeded as exc:
            out[rel.name] = {"resource": str(exc)}
    return out


def check_sufficient_conditions(A: Structure, node_cap: int = DEFAULT_NODE_CAP) -> dict:
    """Syntactic sufficient conditions for additivity and dependency.

    ``additive_sufficient``: for some relation, every ``(p, p, q)`` follows
    from the repeated-pattern triples.  ``dependent_sufficient``: for some
    relation, the a-tuple ``(0, 1, .., a-1)`` follows from the a-tuples with
    at most two values.  A false entry means "not established", never
    "fails".  When the direct dependency search runs out of budget but some
    relation derives every triple, dependency still holds (every tuple is
    then derivable from the two-valued ones) and the route says so.
    """
    a = A.domain_size
    g = gamma(A)
    targets = {(p, p, q) for p in range(a) for q in range(a)}
    ident = tuple(range(a))
    dl = delta(A, a) if a else frozenset()
    additive = targets <= g
    dependent = a == 0 or ident in dl
    routes = {"additive": "premises" if additive else None, "dependent": "premises" if dependent else None}
    super_rel = None
    exhausted = {"additive": False, "dependent": False}
    for rel in A.relations:
        if additive and super_rel is not None:
            break
        sat = _Saturation(DerivationContext(A, rel.name, 3), g, node_cap)
        try:
            sat.run()
        except ResourceLimitExceeded:
            exhausted["additive"] = True
        if targets <= sat.D and not additive:
            additive, routes["additive"] = True, f"relation {rel.name}"
        if len(sat.D) == a ** 3 and super_rel is None:
            super_rel = rel.name
    for rel in A.relations:
        if dependent:
            break
        sat = _Saturation(DerivationContext(A, rel.name, a), dl, node_cap)
        try:
            sat.run(target=ident)
        except ResourceLimitExceeded:
            exhausted["dependent"] = True
        if ident in sat.D:
            dependent, routes["dependent"] = True, f"relation {rel.name}"
    if not dependent and super_rel is not None:
        dependent, routes["dependent"] = True, f"super-connected via {super_rel}"

    def status(ok, key):
        if ok:
            return "established"
        return "resource" if exhausted[key] else "unknown"

    return {
        "additive_sufficient": additive,
        "dependent_sufficient": dependent,
        "additive": status(additive, "additive"),
        "dependent": status(dependent, "dependent"),
        "routes": routes,
        "super_connected": super_rel,
    }

"""Finite relational structures, their algebra, and homomorphism search.

Domain elements are always ``0 .. a-1``; human-facing names live in
``Structure.labels``.  Relations are stored as sorted, duplicate-free tuples
of tuples so that equal structures serialize to identical bytes.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

import jsonschema

from .errors import DataError, ResourceLimitExceeded, SignatureMismatch

Tuple = tuple  # an r-tuple of domain indices
Homomorphism = tuple  # images indexed by source element


@dataclass(frozen=True)
class Relation:
    name: str
    arity: int
    tuples: tuple = ()

    def __post_init__(self):
        if not isinstance(self.arity, int) or self.arity < 1:
            raise DataError(f"relation {self.name!r}: arity must be a positive integer")
        tuples = tuple(sorted(tuple(t) for t in self.tuples))
        for t in tuples:
            if len(t) != self.arity:
                raise DataError(f"relation {self.name!r}: tuple {t} has length {len(t)}, expected {self.arity}")
        for prev, cur in zip(tuples, tuples[1:]):
            if prev == cur:
                raise DataError(f"relation {self.name!r}: duplicate tuple {cur}")
        object.__setattr__(self, "tuples", tuples)

    @cached_property
    def tuple_set(self) -> frozenset:
        return frozenset(self.tuples)

    def __contains__(self, t) -> bool:
        return tuple(t) in self.tuple_set

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)

    def support(self) -> set:
        return {x for t in self.tuples for x in t}


@dataclass(frozen=True)
class Structure:
    domain_size: int
    relations: tuple = ()
    labels: Optional[tuple] = None

    def __post_init__(self):
        if not isinstance(self.domain_size, int) or self.domain_size < 0:
            raise DataError("domain_size must be a non-negative integer")
        labels = self.labels
        if labels is None:
            labels = tuple(str(i) for i in range(self.domain_size))
        labels = tuple(labels)
        if len(labels) != self.domain_size:
            raise DataError(f"{len(labels)} labels for a domain of size {self.domain_size}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "relations", tuple(self.relations))
        seen = set()
        for k, rel in enumerate(self.relations):
            if rel.name in seen:
                raise DataError(f"duplicate relation name {rel.name!r}", f"relations[{k}].name")
            seen.add(rel.name)
            for j, t in enumerate(rel.tuples):
                for i, x in enumerate(t):
                    if not 0 <= x < self.domain_size:
                        raise DataError(
                            f"entry {x} outside domain of size {self.domain_size}",
                            f"relations[{k}].tuples[{j}][{i}]",
                        )

    @property
    def signature(self) -> tuple:
        """The (name, arity) descriptor; structures are similar iff equal."""
        return tuple((r.name, r.arity) for r in self.relations)

    def relation(self, name: str) -> Relation:
        for rel in self.relations:
            if rel.name == name:
                return rel
        raise KeyError(f"no relation named {name!r}")

    @property
    def max_arity(self) -> int:
        return max((r.arity for r in self.relations), default=0)

    def __repr__(self):
        rels = ", ".join(f"{r.name}/{r.arity}:{len(r)}" for r in self.relations)
        return f"Structure(a={self.domain_size}; {rels})"


def check_similar(S1: Structure, S2: Structure) -> None:
    if S1.signature != S2.signature:
        raise SignatureMismatch(f"signatures differ: {S1.signature} vs {S2.signature}")


# --------------------------------------------------------------------------
# JSON
# --------------------------------------------------------------------------

STRUCTURE_SCHEMA = {
    "type": "object",
    "required": ["domain", "relations"],
    "additionalProperties": False,
    "properties": {
        "domain": {"type": "array", "items": {"type": "string"}},
        "relations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "arity", "tuples"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "arity": {"type": "integer", "minimum": 1},
                    "tuples": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                    },
                },
            },
        },
    },
}


def _path(error) -> str:
    out = ""
    for part in error.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else part)
    return out or "<root>"


def structure_from_obj(obj) -> Structure:
    try:
        jsonschema.validate(obj, STRUCTURE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise DataError(exc.message, _path(exc)) from None
    rels = []
    for k, r in enumerate(obj["relations"]):
        for j, t in enumerate(r["tuples"]):
            if len(t) != r["arity"]:
                raise DataError(f"tuple length {len(t)} differs from arity {r['arity']}", f"relations[{k}].tuples[{j}]")
        seen = set()
        for j, t in enumerate(r["tuples"]):
            if tuple(t) in seen:
                raise DataError(f"duplicate tuple {t}", f"relations[{k}].tuples[{j}]")
            seen.add(tuple(t))
        rels.append(Relation(r["name"], r["arity"], [tuple(t) for t in r["tuples"]]))
    return Structure(len(obj["domain"]), rels, obj["domain"])


def parse_structure(text: str) -> Structure:
    """Parse the JSON structure format, validating shape, ranges and names."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return structure_from_obj(obj)


def structure_to_obj(S: Structure) -> dict:
    return {
        "domain": list(S.labels),
        "relations": [
            {"name": r.name, "arity": r.arity, "tuples": [list(t) for t in r.tuples]}
            for r in S.relations
        ],
    }


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def serialize_structure(S: Structure) -> str:
    return canonical_json(structure_to_obj(S))


# --------------------------------------------------------------------------
# homomorphisms
# --------------------------------------------------------------------------

def is_homomorphism(h: Sequence[int], X: Structure, B: Structure) -> bool:
    check_similar(X, B)
    if len(h) != X.domain_size:
        raise DataError(f"map has length {len(h)}, source domain has {X.domain_size} elements")
    if any(not 0 <= y < B.domain_size for y in h):
        return False
    for rx, rb in zip(X.relations, B.relations):
        allowed = rb.tuple_set
        for t in rx.tuples:
            if tuple(h[x] for x in t) not in allowed:
                return False
    return True


def compose(h: Sequence[int], g: Sequence[int]) -> tuple:
    """``g after h``: first apply h, then g."""
    return tuple(g[y] for y in h)


@dataclass
class SearchConfig:
    """Limits and ordering for backtracking searches.

    ``lexicographic`` assigns variables in index order with ascending values,
    so the first solution found is the lexicographically least one.
    """

    max_nodes: Optional[int] = 2_000_000
    time_limit: Optional[float] = None
    lexicographic: bool = False


class _Table:
    """Allowed tuples of one constraint relation, indexed as bitsets."""

    def __init__(self, tuples: Sequence[tuple], arity: int, num_values: int):
        self.tuples = list(tuples)
        self.arity = arity
        self.full = (1 << len(self.tuples)) - 1
        self.pos_val = [[0] * num_values for _ in range(arity)]
        for idx, t in enumerate(self.tuples):
            bit = 1 << idx
            for i, v in enumerate(t):
                self.pos_val[i][v] |= bit
        self._or_cache = {}
        self._eq_cache = {}

    def mask_for(self, i: int, dom: int) -> int:
        key = (i, dom)
        m = self._or_cache.get(key)
        if m is None:
            m = 0
            pv = self.pos_val[i]
            d, v = dom, 0
            while d:
                if d & 1:
                    m |= pv[v]
                d >>= 1
                v += 1
            self._or_cache[key] = m
        return m

    def equality_mask(self, pattern: tuple) -> int:
        """Tuples whose entries agree wherever ``pattern`` repeats a label."""
        m = self._eq_cache.get(pattern)
        if m is None:
            m = 0
            for idx, t in enumerate(self.tuples):
                first = {}
                if all(first.setdefault(p, x) == x for p, x in zip(pattern, t)):
                    m |= 1 << idx
            self._eq_cache[pattern] = m
        return m


class CSP:
    """Finite-domain CSP with table constraints, solved by GAC + backtracking.

    Every variable ranges over ``range(num_values)``; constraints are
    ``(scope, table)`` pairs where ``table`` is a :class:`_Table`.
    """

    def __init__(self, num_vars: int, num_values: int):
        self.num_vars = num_vars
        self.num_values = num_values
        self.scopes = []
        self.tables = []
        self.eq_masks = []
        self.var_cons = [[] for _ in range(num_vars)]
        self.initial = [(1 << num_values) - 1] * num_vars

    def add(self, scope: Sequence[int], table: _Table) -> None:
        scope = tuple(scope)
        cid = len(self.scopes)
        self.scopes.append(scope)
        self.tables.append(table)
        if len(set(scope)) < len(scope):
            first = {}
            pattern = tuple(first.setdefault(x, len(first)) for x in scope)
            self.eq_masks.append(table.equality_mask(pattern))
        else:
            self.eq_masks.append(table.full)
        for v in set(scope):
            self.var_cons[v].append(cid)

    def restrict(self, var: int, allowed_mask: int) -> None:
        self.initial[var] &= allowed_mask

    def _propagate(self, dom: list, queue: list) -> bool:
        in_queue = set(queue)
        scopes, tables, eqm, var_cons = self.scopes, self.tables, self.eq_masks, self.var_cons
        while queue:
            cid = queue.pop()
            in_queue.discard(cid)
            scope, table = scopes[cid], tables[cid]
            valid = eqm[cid]
            for i, x in enumerate(scope):
                valid &= table.mask_for(i, dom[x])
                if not valid:
                    return False
            pos_val = table.pos_val
            for i, x in enumerate(scope):
                d = dom[x]
                new, rest, v = 0, d, 0
                pv = pos_val[i]
                while rest:
                    if rest & 1 and pv[v] & valid:
                        new |= 1 << v
                    rest >>= 1
                    v += 1
                if new != d:
                    if not new:
                        return False
                    dom[x] = new
                    for c in var_cons[x]:
                        if c != cid and c not in in_queue:
                            in_queue.add(c)
                            queue.append(c)
        return True

    def solutions(self, config: Optional[SearchConfig] = None) -> Iterator[tuple]:
        config = config or SearchConfig()
        deadline = None if config.time_limit is None else time.monotonic() + config.time_limit
        nodes = 0
        dom = list(self.initial)
        if any(d == 0 for d in dom):
            return
        if not self._propagate(dom, list(range(len(self.scopes)))):
            return
        stack = [(dom, None, 0)]
        while stack:
            dom, var, values = stack.pop()
            if var is not None:
                if not values:
                    continue
                low = values & -values
                stack.append((dom, var, values ^ low))
                nodes += 1
                if config.max_nodes is not None and nodes > config.max_nodes:
                    raise ResourceLimitExceeded(f"search exceeded {config.max_nodes} nodes", "max_nodes")
                if deadline is not None and nodes % 256 == 0 and time.monotonic() > deadline:
                    raise ResourceLimitExceeded(f"search exceeded {config.time_limit}s", "time_limit")
                dom = list(dom)
                dom[var] = low
                if not self._propagate(dom, list(self.var_cons[var])):
                    continue
            pick = self._pick(dom, config.lexicographic)
            if pick is None:
                yield tuple(d.bit_length() - 1 for d in dom)
                continue
            stack.append((dom, pick, dom[pick]))

    def _pick(self, dom: list, lexicographic: bool) -> Optional[int]:
        best, best_key = None, None
        for x, d in enumerate(dom):
            if d & (d - 1):
                if lexicographic:
                    return x
                key = bin(d).count("1")
                if best_key is None or key < best_key:
                    best, best_key = x, key
                    if key == 2:
                        break
        return best

    def solve(self, config: Optional[SearchConfig] = None) -> Optional[tuple]:
        return next(self.solutions(config), None)


def homomorphism_csp(X: Structure, B: Structure) -> CSP:
    check_similar(X, B)
    csp = CSP(X.domain_size, B.domain_size)
    for rx, rb in zip(X.relations, B.relations):
        if not rx.tuples:
            continue
        table = _Table(rb.tuples, rb.arity, B.domain_size)
        for t in rx.tuples:
            csp.add(t, table)
    return csp


def find_homomorphism(X: Structure, B: Structure, config: Optional[SearchConfig] = None) -> Optional[tuple]:
    """A homomorphism X -> B, or None if none exists.

    Raises :class:`ResourceLimitExceeded` when the configured limits are hit;
    that outcome says nothing about existence.
    """
    if B.domain_size == 0:
        check_similar(X, B)
        return () if X.domain_size == 0 else None
    return homomorphism_csp(X, B).solve(config)


def iter_homomorphisms(X: Structure, B: Structure, config: Optional[SearchConfig] = None) -> Iterator[tuple]:
    """All homomorphisms X -> B in lexicographic order."""
    config = config or SearchConfig()
    config = SearchConfig(config.max_nodes, config.time_limit, lexicographic=True)
    if B.domain_size == 0:
        check_similar(X, B)
        if X.domain_size == 0:
            yield ()
        return
    yield from homomorphism_csp(X, B).solutions(config)


def brute_force_homomorphisms(X: Structure, B: Structure) -> Iterator[tuple]:
    """Plain enumeration of all |B|^|X| maps; an oracle for small cases."""
    for h in itertools.product(range(B.domain_size), repeat=X.domain_size):
        if is_homomorphism(h, X, B):
            yield h


# --------------------------------------------------------------------------
# constructions
# --------------------------------------------------------------------------

def product(S1: Structure, S2: Structure) -> Structure:
    """Categorical product; the pair (x, y) has index ``x * |S2| + y``."""
    check_similar(S1, S2)
    b = S2.domain_size
    labels = [f"({p},{q})" for p in S1.labels for q in S2.labels]
    rels = []
    for r1, r2 in zip(S1.relations, S2.relations):
        tuples = [tuple(x * b + y for x, y in zip(t1, t2)) for t1 in r1.tuples for t2 in r2.tuples]
        rels.append(Relation(r1.name, r1.arity, tuples))
    return Structure(S1.domain_size * b, rels, labels)


def power(S: Structure, n: int) -> Structure:
    """S^n with row-major indexing of n-tuples (first coordinate most significant)."""
    if n < 1:
        raise ValueError("power needs n >= 1")
    out = S
    for _ in range(n - 1):
        out = product(out, S)
    return out


def disjoint_union(S1: Structure, S2: Structure) -> Structure:
    check_similar(S1, S2)
    off = S1.domain_size
    rels = []
    for r1, r2 in zip(S1.relations, S2.relations):
        tuples = list(r1.tuples) + [tuple(x + off for x in t) for t in r2.tuples]
        rels.append(Relation(r1.name, r1.arity, tuples))
    return Structure(off + S2.domain_size, rels, S1.labels + S2.labels)


def induced_substructure(S: Structure, elements: Iterable[int]) -> Structure:
    elements = sorted(set(elements))
    index = {x: i for i, x in enumerate(elements)}
    rels = [
        Relation(r.name, r.arity, [tuple(index[x] for x in t) for t in r.tuples if all(x in index for x in t)])
        for r in S.relations
    ]
    return Structure(len(elements), rels, [S.labels[x] for x in elements])


def connected_components(S: Structure) -> list:
    """Components of the union of all relation hypergraphs.

    Returns ``(substructure, elements)`` pairs ordered by least element, where
    ``elements[i]`` is the original index of the substructure's element ``i``.
    """
    parent = list(range(S.domain_size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for rel in S.relations:
        for t in rel.tuples:
            root = find(t[0])
            for x in t[1:]:
                other = find(x)
                if other != root:
                    parent[other] = root
    groups = {}
    for x in range(S.domain_size):
        groups.setdefault(find(x), []).append(x)
    parts = sorted(groups.values(), key=lambda g: g[0])
    return [(induced_substructure(S, g), tuple(g)) for g in parts]


def largest_symmetric_substructure(B: Structure) -> Structure:
    rels = []
    for r in B.relations:
        keep = [t for t in r.tuples if all(p in r.tuple_set for p in itertools.permutations(t))]
        rels.append(Relation(r.name, r.arity, keep))
    return Structure(B.domain_size, rels, B.labels)


def empty_like(S: Structure) -> Structure:
    """The empty-domain structure with the signature of S."""
    return Structure(0, [Relation(r.name, r.arity, ()) for r in S.relations], ())


def planted_instance(A: Structure, num_vars: int, num_constraints: int, rng) -> tuple:
    """A random instance X together with a homomorphism X -> A.

    Every template element gets at least one preimage when ``num_vars``
    allows it; constraints pick a random template tuple and then a random
    preimage for each of its entries.  ``rng`` is a :class:`random.Random`.
    """
    a = A.domain_size
    if a == 0 or num_vars < 1:
        raise DataError("planted instances need a nonempty template and at least one variable")
    h = [i % a if i < a else rng.randrange(a) for i in range(num_vars)]
    rng.shuffle(h)
    pre = {}
    for x, v in enumerate(h):
        pre.setdefault(v, []).append(x)
    rels = {r.name: [] for r in A.relations}
    candidates = [(r, [t for t in r.tuples if all(v in pre for v in t)]) for r in A.relations]
    candidates = [(r, ts) for r, ts in candidates if ts]
    for _ in range(num_constraints if candidates else 0):
        r, ts = candidates[rng.randrange(len(candidates))]
        t = ts[rng.randrange(len(ts))]
        rels[r.name].append(tuple(rng.choice(pre[v]) for v in t))
    X = Structure(num_vars, [Relation(r.name, r.arity, sorted(set(rels[r.name]))) for r in A.relations])
    return X, tuple(h)

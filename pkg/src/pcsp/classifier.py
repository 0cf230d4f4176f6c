"""The affine structures A_m, the sandwich classifier, and solving through a
sandwich ``A -> A_m -> B``.

A_m has domain ``Z_m^a`` (vector ``v`` has row-major index, first coordinate
most significant).  Its relation for R is the coset ``t̄ + M`` where ``t̄`` is
any tuple of R written with unit vectors and M is the subgroup generated by
the differences ``p̄ - q̄``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .analysis import hypergraph_metrics, is_functional, is_symmetric
from .core import (CSP, Relation, SearchConfig, Structure, _Table, check_similar, compose,
                   connected_components, find_homomorphism, induced_substructure, is_homomorphism,
                   largest_symmetric_substructure)
from .derivation import is_super_connected
from .errors import DataError, InvalidTemplate, PromiseViolation, ResourceLimitExceeded, VerdictMismatch
from .linear import hermite_basis_mod, in_subgroup, integer_feasible, subgroup_elements, subgroup_order
from .polymorphisms import OperationTable

DEFAULT_COSET_CAP = 200_000
DEFAULT_DOMAIN_CAP = 100_000


# --------------------------------------------------------------------------
# affine structures
# --------------------------------------------------------------------------

def vector_index(v, m: int) -> int:
    i = 0
    for x in v:
        i = i * m + x % m
    return i


def index_vector(i: int, m: int, a: int) -> tuple:
    out = []
    for _ in range(a):
        out.append(i % m)
        i //= m
    return tuple(reversed(out))


def unit_vector(x: int, a: int, m: int) -> tuple:
    return tuple(int(v == x) % m for v in range(a))


def subgroup_basis(generators, m: int, d: Optional[int] = None) -> list:
    """Canonical echelon basis of the subgroup of ``Z_m^d``; rows whose pivot
    equals m add nothing and are left out."""
    generators = [tuple(g) for g in generators]
    if d is None:
        if not generators:
            return []
        d = len(generators[0])
    full = hermite_basis_mod(generators, m, d)
    return [row for j, row in enumerate(full) if row[j] != m] if m > 1 else []


@dataclass(frozen=True)
class CosetDescriptor:
    """The coset ``base_point + <basis>`` inside ``Z_m^{a r}``; tuples are
    flattened by concatenating their r vectors."""

    m: int
    a: int
    arity: int
    base_point: tuple
    basis: tuple  # full d-row echelon basis (pivot m marks an empty row)

    @property
    def generator_basis(self):
        return [row for j, row in enumerate(self.basis) if row[j] != self.m]

    @property
    def size(self) -> int:
        return subgroup_order(list(self.basis), self.m) if self.basis else 1

    def flatten(self, elements) -> tuple:
        out = []
        for e in elements:
            out.extend(index_vector(e, self.m, self.a))
        return tuple(out)

    def contains(self, elements) -> bool:
        """Membership of a tuple of A_m element indices."""
        if len(elements) != self.arity:
            return False
        v = [(x - y) % self.m for x, y in zip(self.flatten(elements), self.base_point)]
        return in_subgroup(v, list(self.basis), self.m) if self.basis else not any(v)

    def tuples(self):
        """Every member as a tuple of element indices."""
        a, m = self.a, self.m
        for g in subgroup_elements(list(self.basis), m) if self.basis else [tuple([0] * len(self.base_point))]:
            v = [(x + y) % m for x, y in zip(g, self.base_point)]
            yield tuple(vector_index(v[i * a:(i + 1) * a], m) for i in range(self.arity))

    def to_dict(self):
        return {"base_point": list(self.base_point), "generator_basis": [list(r) for r in self.generator_basis],
                "size": self.size}


@dataclass(frozen=True)
class AffineStructure:
    m: int
    base: Structure
    cosets: tuple  # per relation, None for an empty source relation

    @property
    def a(self):
        return self.base.domain_size

    @property
    def domain_size(self):
        return self.m ** self.a

    def materialize(self, cap: int = DEFAULT_COSET_CAP) -> Structure:
        rels = []
        for rel, cos in zip(self.base.relations, self.cosets):
            if cos is None:
                rels.append(Relation(rel.name, rel.arity, ()))
                continue
            if cos.size > cap:
                raise ResourceLimitExceeded(f"coset for {rel.name} has {cos.size} tuples, cap {cap}", "coset_cap")
            rels.append(Relation(rel.name, rel.arity, list(cos.tuples())))
        labels = ["(" + ",".join(map(str, index_vector(i, self.m, self.a))) + ")" for i in range(self.domain_size)]
        return Structure(self.domain_size, rels, labels)

    def contains(self, name: str, elements) -> bool:
        for rel, cos in zip(self.base.relations, self.cosets):
            if rel.name == name:
                return cos is not None and cos.contains(elements)
        raise KeyError(name)


def build_affine_structure(A: Structure, m: int) -> AffineStructure:
    if m < 1:
        raise DataError(f"modulus must be positive, got {m}")
    a = A.domain_size
    cosets = []
    for rel in A.relations:
        if not rel.tuples:
            cosets.append(None)
            continue
        flat = [sum((unit_vector(x, a, m) for x in t), ()) for t in rel.tuples]
        base = flat[0]
        d = a * rel.arity
        gens = [tuple((p - q) % m for p, q in zip(f, base)) for f in flat[1:]]
        basis = tuple(tuple(r) for r in hermite_basis_mod(gens, m, d)) if d else ()
        cosets.append(CosetDescriptor(m, a, rel.arity, base, basis))
    return AffineStructure(m, A, tuple(cosets))


def unit_embedding(A: Structure, m: int) -> tuple:
    """``x -> x̄`` as indices into A_m."""
    if m < 1:
        raise DataError(f"modulus must be positive, got {m}")
    return tuple(vector_index(unit_vector(x, A.domain_size, m), m) for x in range(A.domain_size))


def alternating_witness(affine: AffineStructure, k: int, cap: int = 2_000_000) -> OperationTable:
    """``x_1 - y_1 + .. - y_k + x_{k+1}`` coordinatewise on ``Z_m^a``, with
    the x's at even positions."""
    if k < 0:
        raise DataError("k must be nonnegative")
    n = 2 * k + 1
    size = affine.domain_size
    if size ** n > cap:
        raise ResourceLimitExceeded(f"table of {size}^{n} entries exceeds cap {cap}", "table_cap")
    m, a = affine.m, affine.a
    vecs = [index_vector(i, m, a) for i in range(size)]

    def f(*u):
        out = [0] * a
        for pos, e in enumerate(u):
            s = 1 if pos % 2 == 0 else -1
            for c, x in enumerate(vecs[e]):
                out[c] += s * x
        return vector_index(out, m)

    return OperationTable.from_function(size, size, n, f)


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassifierBounds:
    m_max: int
    N_d: int
    N_h: int
    default_m_max: int

    @classmethod
    def for_template(cls, A: Structure, B: Structure, m_max: Optional[int] = None) -> "ClassifierBounds":
        a, b = A.domain_size, B.domain_size
        r_max = A.max_arity
        default = b ** (a * a)
        N_d = max(1 + default * a ** (2 * r_max), 3)
        if m_max is not None and m_max < 1:
            raise DataError("m_max must be positive")
        return cls(default if m_max is None else m_max, N_d, default, default)

    def to_dict(self):
        return {"m_max": self.m_max, "default_m_max": self.default_m_max, "N_d": self.N_d, "N_h": self.N_h}


TRACTABLE, NP_HARD, INCONCLUSIVE = "tractable", "np_hard", "inconclusive"


@dataclass(frozen=True)
class ClassifierVerdict:
    outcome: str
    m: Optional[int] = None
    sandwich_hom: Optional[tuple] = None
    m_bound_exhausted: Optional[int] = None
    reason: Optional[str] = None
    preconditions: dict = field(default_factory=dict)
    bounds: Optional[ClassifierBounds] = None
    components: tuple = ()  # (elements of A, verdict) when assembled per component

    @property
    def tractable(self):
        return self.outcome == TRACTABLE

    def to_dict(self):
        out = {"outcome": self.outcome, "preconditions": self.preconditions}
        if self.m is not None:
            out["m"] = self.m
        if self.sandwich_hom is not None:
            out["sandwich_hom"] = list(self.sandwich_hom)
        if self.m_bound_exhausted is not None:
            out["m_bound_exhausted"] = self.m_bound_exhausted
        if self.reason is not None:
            out["reason"] = self.reason
        if self.bounds is not None:
            out["bounds"] = self.bounds.to_dict()
        if self.components:
            out["components"] = [{"elements": list(e), "verdict": v.to_dict()} for e, v in self.components]
        return out


def additivity_routes(A: Structure, node_cap: int = 5_000_000) -> dict:
    """Which sufficient conditions for additivity and dependency hold."""
    routes = {}
    diam, conn34 = [], []
    for rel in A.relations:
        if not rel.tuples:
            continue
        metrics = hypergraph_metrics(A, rel.name)
        if rel.arity >= 3 and metrics.diameter <= 1:
            diam.append(rel.name)
        if rel.arity in (3, 4) and metrics.connected:
            conn34.append(rel.name)
    routes["diameter_at_most_1"] = diam[0] if diam else None
    routes["connected_arity_3_or_4"] = conn34[0] if conn34 else None
    try:
        routes["super_connected"] = is_super_connected(A, node_cap)
    except ResourceLimitExceeded as exc:
        routes["super_connected"] = None
        routes["super_connected_resource"] = str(exc)
    return routes


def _established(routes: dict) -> Optional[str]:
    for key in ("super_connected", "diameter_at_most_1", "connected_arity_3_or_4"):
        if routes.get(key):
            return key
    return None


def sandwich_search(A: Structure, B: Structure, m: int, config: Optional[SearchConfig] = None,
                    coset_cap: int = DEFAULT_COSET_CAP, domain_cap: int = DEFAULT_DOMAIN_CAP) -> Optional[tuple]:
    """A homomorphism A_m -> B, or None.

    Cosets are generated straight into the search from their basis, so the
    relation lists are never stored twice; anything over the caps raises
    :class:`ResourceLimitExceeded`.
    """
    affine = build_affine_structure(A, m)
    if affine.domain_size > domain_cap:
        raise ResourceLimitExceeded(f"A_{m} has {affine.domain_size} elements, cap {domain_cap}", "domain_cap")
    csp = CSP(affine.domain_size, B.domain_size)
    for cos, rb in zip(affine.cosets, B.relations):
        if cos is None:
            continue
        if cos.size > coset_cap:
            raise ResourceLimitExceeded(f"coset of size {cos.size} exceeds cap {coset_cap}", "coset_cap")
        if not rb.tuples:
            return None
        table = _Table(rb.tuples, rb.arity, B.domain_size)
        for t in cos.tuples():
            csp.add(t, table)
    h = csp.solve(config)
    if h is not None:
        for cos, rb in zip(affine.cosets, B.relations):
            if cos is not None:
                assert all(tuple(h[x] for x in t) in rb.tuple_set for t in cos.tuples())
    return h


def classify(A: Structure, B: Structure, bounds: Optional[ClassifierBounds] = None,
             config: Optional[SearchConfig] = None, node_cap: int = 5_000_000,
             coset_cap: int = DEFAULT_COSET_CAP, domain_cap: int = DEFAULT_DOMAIN_CAP,
             _allow_components: bool = True) -> ClassifierVerdict:
    """Tractable with the least m such that ``A_m -> B``; NP-hard when no
    m up to the bound works and additivity/dependency is established; else
    inconclusive.  A disconnected A without an established route is assembled
    from its components."""
    check_similar(A, B)
    if find_homomorphism(A, B, config) is None:
        raise InvalidTemplate("A does not map to B")
    bounds = bounds or ClassifierBounds.for_template(A, B)
    pre = {}
    sym_b = is_symmetric(B)
    pre["B_symmetric"] = sym_b.holds
    Bs = B if sym_b.holds else largest_symmetric_substructure(B)
    pre["A_symmetric"] = is_symmetric(A).holds
    pre["B_functional"] = is_functional(Bs).holds
    if not pre["A_symmetric"]:
        return ClassifierVerdict(INCONCLUSIVE, reason="A is not symmetric", preconditions=pre, bounds=bounds)
    if not pre["B_functional"]:
        return ClassifierVerdict(INCONCLUSIVE, reason="B (symmetric part) is not functional", preconditions=pre,
                                 bounds=bounds)
    routes = additivity_routes(A, node_cap)
    pre["routes"] = routes
    pre["additive_dependent_route"] = _established(routes)

    resource = None
    last = 0
    for m in range(1, bounds.m_max + 1):
        try:
            h = sandwich_search(A, Bs, m, config, coset_cap, domain_cap)
        except ResourceLimitExceeded as exc:
            resource = f"m={m}: {exc}"
            break
        last = m
        if h is not None:
            emb = unit_embedding(A, m)
            assert is_homomorphism(compose(emb, h), A, B)
            return ClassifierVerdict(TRACTABLE, m, tuple(h), preconditions=pre, bounds=bounds)

    comps = connected_components(A)
    if pre["additive_dependent_route"] is None and _allow_components and len(comps) > 1:
        parts = []
        for sub, elems in comps:
            sub_bounds = ClassifierBounds.for_template(sub, B, min(bounds.m_max, ClassifierBounds.for_template(sub, B).m_max))
            v = classify(sub, B, sub_bounds, config, node_cap, coset_cap, domain_cap, _allow_components=False)
            parts.append((elems, v))
        pre["route"] = "components"
        if any(v.outcome == NP_HARD for _, v in parts):
            return ClassifierVerdict(NP_HARD, preconditions=pre, bounds=bounds, components=tuple(parts),
                                     reason="some component is NP-hard")
        if all(v.outcome == TRACTABLE for _, v in parts):
            return ClassifierVerdict(TRACTABLE, preconditions=pre, bounds=bounds, components=tuple(parts),
                                     reason="every component is tractable")
        return ClassifierVerdict(INCONCLUSIVE, preconditions=pre, bounds=bounds, components=tuple(parts),
                                 reason="some component is inconclusive")

    if resource is not None:
        return ClassifierVerdict(INCONCLUSIVE, m_bound_exhausted=last, reason=f"resource limit at {resource}",
                                 preconditions=pre, bounds=bounds)
    if pre["additive_dependent_route"] is None:
        return ClassifierVerdict(INCONCLUSIVE, m_bound_exhausted=last,
                                 reason="no sandwich found and additivity/dependency not established",
                                 preconditions=pre, bounds=bounds)
    if bounds.m_max < bounds.default_m_max:
        return ClassifierVerdict(INCONCLUSIVE, m_bound_exhausted=last,
                                 reason=f"m_max={bounds.m_max} is below the proof bound {bounds.default_m_max}",
                                 preconditions=pre, bounds=bounds)
    return ClassifierVerdict(NP_HARD, m_bound_exhausted=last, preconditions=pre, bounds=bounds)


# --------------------------------------------------------------------------
# solving through a sandwich
# --------------------------------------------------------------------------

def affine_assignment(X: Structure, A: Structure, m: int) -> Optional[list]:
    """Vectors in ``Z_m^a`` for the elements of X putting every constraint
    in its coset, i.e. a homomorphism X -> A_m given as element indices; None
    when the congruences have no solution.

    Unknowns: the a coordinates of each element of X, one coefficient per
    basis row per constraint, and one multiple of m per equation.
    """
    check_similar(X, A)
    affine = build_affine_structure(A, m)
    for rx, cos in zip(X.relations, affine.cosets):
        if rx.tuples and cos is None:
            return None
    if m == 1:
        return [0] * X.domain_size
    a = A.domain_size
    rows, rhs = [], []
    nvars = X.domain_size * a
    for rx, cos in zip(X.relations, affine.cosets):
        if not rx.tuples:
            continue
        gens = cos.generator_basis
        for scope in rx.tuples:
            coeffs = list(range(nvars, nvars + len(gens)))
            nvars += len(gens)
            for pos, b in enumerate(cos.base_point):
                i, coord = divmod(pos, a)
                row = {scope[i] * a + coord: 1, nvars: -m}
                nvars += 1
                for c, g in zip(coeffs, gens):
                    if g[pos]:
                        row[c] = -g[pos]
                rows.append(row)
                rhs.append(b)
    x = integer_feasible(rows, rhs, nvars)
    if x is None:
        return None
    return [vector_index([x[e * a + c] for c in range(a)], m) for e in range(X.domain_size)]


def solve_instance(X: Structure, A: Structure, B: Structure, verdict: ClassifierVerdict,
                   config: Optional[SearchConfig] = None) -> tuple:
    """Homomorphism X -> B built from a tractable verdict: map X into A_m by
    solving the coset congruences over the integers, then apply the
    sandwich homomorphism.  Component verdicts handle each connected piece of
    X with whichever component of A accepts it."""
    check_similar(X, B)
    if verdict.outcome != TRACTABLE:
        raise VerdictMismatch(f"verdict is {verdict.outcome}, not tractable")
    if verdict.components:
        h = [0] * X.domain_size
        for sub, elems in connected_components(X):
            done = False
            for comp_elems, v in verdict.components:
                Ai = induced_substructure(A, comp_elems)
                try:
                    hs = solve_instance(sub, Ai, B, v, config)
                except PromiseViolation:
                    continue
                for i, x in enumerate(elems):
                    h[x] = hs[i]
                done = True
                break
            if not done:
                raise PromiseViolation("a connected piece of the instance maps to no component of A")
        h = tuple(h)
    else:
        g = affine_assignment(X, A, verdict.m)
        if g is None:
            raise PromiseViolation(f"the coset congruences over Z_{verdict.m} have no solution, so X does not map to A")
        h = compose(g, verdict.sandwich_hom)
    if not is_homomorphism(h, X, B):
        raise VerdictMismatch("composed map is not a homomorphism into B")
    return h


"""Operation tables, minors, two-element profiles, and symmetric
polymorphism search in the multiset (factored) domain.

Block convention for odd arity ``2k+1``: 0-based positions ``0, 2, .., 2k``
form the larger block (k+1 inputs, the ``y``/plus side) and positions
``1, 3, .., 2k-1`` the smaller block (k inputs, the ``x``/minus side).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .analysis import BalanceWitness
from .core import CSP, SearchConfig, Structure, _Table, check_similar, iter_homomorphisms, power
from .errors import DataError, ResourceLimitExceeded

DEFAULT_CHECK_CAP = 50_000_000
DEFAULT_ENUM_CAP = 2_000_000
DEFAULT_STATE_CAP = 2_000_000


# --------------------------------------------------------------------------
# operation tables
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class OperationTable:
    """f : A^n -> B, values listed in row-major order of the inputs
    (the first argument is the most significant digit)."""

    a: int
    b: int
    arity: int
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if len(self.values) != self.a ** self.arity:
            raise DataError(f"table has {len(self.values)} entries, expected {self.a ** self.arity}")
        if any(not 0 <= v < self.b for v in self.values):
            raise DataError("table value outside the target domain")

    @classmethod
    def from_function(cls, a: int, b: int, n: int, fn: Callable) -> "OperationTable":
        return cls(a, b, n, [fn(*x) for x in itertools.product(range(a), repeat=n)])

    def index(self, args: Sequence[int]) -> int:
        i = 0
        for x in args:
            i = i * self.a + x
        return i

    def __call__(self, *args) -> int:
        if len(args) != self.arity:
            raise DataError(f"expected {self.arity} arguments, got {len(args)}")
        return self.values[self.index(args)]

    def inputs(self):
        return itertools.product(range(self.a), repeat=self.arity)

    def to_dict(self):
        return {"source_domain": self.a, "target_domain": self.b, "arity": self.arity,
                "order": "row-major, first argument most significant", "values": list(self.values)}


def projection(a: int, n: int, i: int) -> OperationTable:
    return OperationTable.from_function(a, a, n, lambda *x: x[i])


def linear_alternating_operation(m: int, k: int) -> OperationTable:
    """``x_1 - y_1 + x_2 - ... - y_k + x_{k+1} (mod m)`` on Z_m, with the
    x's at even 0-based positions."""
    n = 2 * k + 1
    return OperationTable.from_function(
        m, m, n, lambda *u: sum(v if i % 2 == 0 else -v for i, v in enumerate(u)) % m)


def sum_mod_operation(m: int, n: int) -> OperationTable:
    return OperationTable.from_function(m, m, n, lambda *u: sum(u) % m)


def max_operation(a: int, n: int) -> OperationTable:
    return OperationTable.from_function(a, a, n, lambda *u: max(u))


@dataclass(frozen=True)
class PolymorphismCheck:
    holds: bool
    relation: Optional[str] = None
    columns: Optional[tuple] = None

    def __bool__(self):
        return self.holds

    def to_dict(self):
        out = {"holds": self.holds}
        if not self.holds:
            out["relation"] = self.relation
            out["columns"] = [list(c) for c in self.columns]
        return out


def is_polymorphism(f: OperationTable, A: Structure, B: Structure, cap: int = DEFAULT_CHECK_CAP) -> PolymorphismCheck:
    """Check every choice of ``n`` columns from each relation of A.

    On failure the witness is the first violating column sequence in
    lexicographic order.  More than ``cap`` column choices for a single
    relation raises :class:`ResourceLimitExceeded`.
    """
    check_similar(A, B)
    if f.a != A.domain_size or f.b != B.domain_size:
        raise DataError(f"table maps {f.a} -> {f.b}, template is {A.domain_size} -> {B.domain_size}")
    n = f.arity
    values = np.asarray(f.values, dtype=np.int64)
    for ra, rb in zip(A.relations, B.relations):
        s, r = len(ra.tuples), ra.arity
        if s == 0:
            continue
        if s ** n > cap:
            raise ResourceLimitExceeded(f"{s}^{n} column choices for relation {ra.name} exceed cap {cap}", "check_cap")
        allowed = np.array(sorted(_encode(t, f.b) for t in rb.tuples), dtype=np.int64)
        Ra = np.asarray(ra.tuples, dtype=np.int64)  # (s, r)
        # rows of the matrix for all choices of the trailing n-1 columns
        tail = np.zeros((1, r), dtype=np.int64)
        for _ in range(n - 1):
            tail = (tail[:, None, :] * f.a + Ra[None, :, :]).reshape(-1, r)
        weight = f.a ** (n - 1)
        for c0 in range(s):
            rows = Ra[c0][None, :] * weight + tail
            img = values[rows]
            codes = np.zeros(len(img), dtype=np.int64)
            for i in range(r):
                codes = codes * f.b + img[:, i]
            ok = _isin_sorted(codes, allowed)
            if not ok.all():
                bad = int(np.argmin(ok))
                choice = [c0]
                rest = bad
                digits = []
                for _ in range(n - 1):
                    digits.append(rest % s)
                    rest //= s
                choice += digits[::-1]
                return PolymorphismCheck(False, ra.name, tuple(ra.tuples[c] for c in choice))
    return PolymorphismCheck(True)


def _encode(t, base):
    c = 0
    for x in t:
        c = c * base + x
    return c


def _isin_sorted(values, sorted_allowed):
    if len(sorted_allowed) == 0:
        return np.zeros(len(values), dtype=bool)
    pos = np.searchsorted(sorted_allowed, values)
    pos = np.minimum(pos, len(sorted_allowed) - 1)
    return sorted_allowed[pos] == values


def enumerate_polymorphisms(A: Structure, B: Structure, n: int, cap: int = DEFAULT_ENUM_CAP,
                            config: Optional[SearchConfig] = None) -> list:
    """All n-ary polymorphisms, lexicographically ordered by table values.

    Computed as homomorphisms from the n-th power of A, so the power's
    relations (``|R|^n`` tuples each) must stay under ``cap``.
    """
    check_similar(A, B)
    for rel in A.relations:
        if len(rel) ** n > cap:
            raise ResourceLimitExceeded(f"power relation {rel.name} would have {len(rel) ** n} tuples", "enum_cap")
    P = power(A, n)
    return [OperationTable(A.domain_size, B.domain_size, n, h) for h in iter_homomorphisms(P, B, config)]


def minor(f: OperationTable, pi: Sequence[int], m: Optional[int] = None) -> OperationTable:
    """``g(x_1..x_m) = f(x_{pi(1)}, .., x_{pi(n)})``."""
    pi = tuple(pi)
    if len(pi) != f.arity:
        raise DataError(f"map has {len(pi)} entries, operation has arity {f.arity}")
    if m is None:
        m = max(pi, default=-1) + 1
    if any(not 0 <= p < m for p in pi):
        raise DataError(f"map {pi} leaves the range 0..{m - 1}")
    return OperationTable.from_function(f.a, f.b, m, lambda *x: f(*(x[p] for p in pi)))


# --------------------------------------------------------------------------
# two-element profiles
# --------------------------------------------------------------------------

def evaluate_fp(f: OperationTable, S) -> tuple:
    """a x a matrix; entry (i, j) is f with j on the positions in S and i
    elsewhere."""
    S = set(S)
    if any(not 0 <= s < f.arity for s in S):
        raise DataError(f"set {sorted(S)} is not inside 0..{f.arity - 1}")
    return tuple(
        tuple(f(*(j if p in S else i for p in range(f.arity))) for j in range(f.a))
        for i in range(f.a)
    )


def transpose(M):
    return tuple(zip(*M))


def evaluate_fstar(f: OperationTable, parts: Sequence) -> tuple:
    parts = [set(p) for p in parts]
    seen = set()
    for p in parts:
        if p & seen:
            raise DataError("parts overlap")
        seen |= p
    if seen != set(range(f.arity)):
        raise DataError("parts do not cover all positions")
    return tuple(evaluate_fp(f, p) for p in parts)


def fstar_of_input(f: OperationTable, x: Sequence[int]) -> tuple:
    return evaluate_fstar(f, [[i for i, v in enumerate(x) if v == c] for c in range(f.a)])


def _fp_by_mask(f: OperationTable) -> list:
    n = f.arity
    out = []
    for mask in range(1 << n):
        S = [p for p in range(n) if mask >> p & 1]
        out.append(evaluate_fp(f, S))
    return out


def additivity_collisions(polys: Sequence[OperationTable]) -> list:
    """Disjoint S, T where ``f^p(S ∪ T)`` is not a function of the pair
    ``(f^p(S), f^p(T))`` across all given operations."""
    table, clashes = {}, []
    for f in polys:
        fp = _fp_by_mask(f)
        n = f.arity
        for s in range(1 << n):
            rest = ((1 << n) - 1) ^ s
            t = rest
            while True:
                key = (fp[s], fp[t])
                val = fp[s | t]
                old = table.setdefault(key, val)
                if old != val:
                    clashes.append((f, s, t))
                if t == 0:
                    break
                t = (t - 1) & rest
    return clashes


def dependency_collisions(polys: Sequence[OperationTable]) -> list:
    """Inputs where ``f(x)`` is not a function of ``f*(x)`` across all given
    operations."""
    table, clashes = {}, []
    for f in polys:
        fp = _fp_by_mask(f)
        for x in f.inputs():
            masks = [0] * f.a
            for p, v in enumerate(x):
                masks[v] |= 1 << p
            key = tuple(fp[m] for m in masks)
            val = f(*x)
            if table.setdefault(key, val) != val:
                clashes.append((f, x))
    return clashes


# --------------------------------------------------------------------------
# symmetry
# --------------------------------------------------------------------------

NONE, TWO_BLOCK, ALTERNATING = "none", "two_block_symmetric", "alternating"


def symmetry_violation(f: OperationTable) -> Optional[str]:
    """Why f is not alternating, or None if it is."""
    n = f.arity
    if n % 2 == 0:
        return f"arity {n} is even"
    for block in (range(0, n, 2), range(1, n, 2)):
        block = list(block)
        for p, q in zip(block, block[1:]):
            for x in f.inputs():
                y = list(x)
                y[p], y[q] = y[q], y[p]
                if f.values[f.index(x)] != f.values[f.index(y)]:
                    return f"not symmetric in positions {p},{q} at {x}"
    if n >= 3:
        for head in itertools.product(range(f.a), repeat=n - 2):
            v = f(*head, 0, 0)
            for c in range(1, f.a):
                if f(*head, c, c) != v:
                    return f"trailing pair changes value at {head}"
    return None


def symmetry_kind(f: OperationTable) -> str:
    reason = symmetry_violation(f)
    if reason is None:
        return ALTERNATING
    if reason.startswith("trailing"):
        return TWO_BLOCK
    return NONE


# --------------------------------------------------------------------------
# frequency vectors
# --------------------------------------------------------------------------

def compositions(total: int, parts: int) -> list:
    """All length-``parts`` nonnegative integer vectors summing to ``total``,
    in lexicographic order."""
    if parts == 0:
        return [()] if total == 0 else []
    out = []
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return sorted(out)


def difference_vectors(a: int, k: int) -> list:
    """``S_{k+1} - S_k``: vectors summing to 1 that split as y - x."""
    out = []
    for z in itertools.product(range(-k, k + 2), repeat=a):
        if sum(z) == 1 and sum(v for v in z if v > 0) <= k + 1:
            out.append(z)
    return out


def bar(t: Sequence[int], a: int) -> tuple:
    """Tuple of unit vectors."""
    return tuple(tuple(int(v == x) for v in range(a)) for x in t)


def relation_bar(R, a: int) -> frozenset:
    return frozenset(bar(t, a) for t in R)


def _add(u, v, sign=1):
    return tuple(tuple(p + sign * q for p, q in zip(x, y)) for x, y in zip(u, v))


def minkowski_power(Rbar, k: int, cap: int = DEFAULT_STATE_CAP) -> frozenset:
    """All sums of k elements of Rbar (k = 0 gives the zero tuple)."""
    Rbar = list(Rbar)
    if k < 0:
        raise DataError("k must be nonnegative")
    if not Rbar:
        return frozenset() if k else frozenset()
    r = len(Rbar[0])
    a = len(Rbar[0][0]) if r else 0
    cur = {tuple(tuple([0] * a) for _ in range(r))}
    for _ in range(k):
        cur = {_add(u, v) for u in cur for v in Rbar}
        if len(cur) > cap:
            raise ResourceLimitExceeded(f"Minkowski sum exceeded {cap} elements", "state_cap")
    return frozenset(cur)


# --------------------------------------------------------------------------
# factored search
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FactoredTable:
    """A symmetric operation stored on multiset counts.

    ``block_symmetric``: keys are ``(x, y)`` with x in S_k, y in S_{k+1}.
    ``alternating``: keys are ``z`` in S_{k+1} - S_k.
    """

    kind: str
    k: int
    a: int
    b: int
    keys: tuple
    values: tuple

    @property
    def arity(self):
        return 2 * self.k + 1

    def lookup(self) -> dict:
        return dict(zip(self.keys, self.values))

    def value_at(self, u: Sequence[int]) -> int:
        y = [0] * self.a
        x = [0] * self.a
        for i, v in enumerate(u):
            (y if i % 2 == 0 else x)[v] += 1
        table = self.lookup()
        if self.kind == "alternating":
            return table[tuple(p - q for p, q in zip(y, x))]
        return table[(tuple(x), tuple(y))]

    def expand(self) -> OperationTable:
        table = self.lookup()
        a, n = self.a, self.arity
        vals = []
        for u in itertools.product(range(a), repeat=n):
            y = [0] * a
            x = [0] * a
            for i, v in enumerate(u):
                if i % 2 == 0:
                    y[v] += 1
                else:
                    x[v] += 1
            if self.kind == "alternating":
                vals.append(table[tuple(p - q for p, q in zip(y, x))])
            else:
                vals.append(table[(tuple(x), tuple(y))])
        return OperationTable(a, self.b, n, vals)

    def to_dict(self):
        keys = [list(k) if self.kind == "alternating" else [list(k[0]), list(k[1])] for k in self.keys]
        return {"kind": self.kind, "k": self.k, "source_domain": self.a, "target_domain": self.b,
                "entries": [[key, v] for key, v in zip(keys, self.values)]}


def factored_domain(kind: str, a: int, k: int) -> list:
    if kind == "alternating":
        return sorted(difference_vectors(a, k))
    if kind == "block_symmetric":
        return [(x, y) for x in compositions(k, a) for y in compositions(k + 1, a)]
    raise DataError(f"unknown symmetry kind {kind!r}")


class _Codec:
    """Big-endian mixed-radix codes for frequency vectors, so that code order
    equals lexicographic order of the vectors."""

    def __init__(self, kind, a, k):
        self.kind, self.a, self.k = kind, a, k
        if kind == "alternating":
            self.length, self.base, self.offset = a, 2 * k + 2, k
        else:
            self.length, self.base, self.offset = 2 * a, k + 2, 0
        self.weights = [self.base ** (self.length - 1 - c) for c in range(self.length)]

    def zero(self):
        return sum(self.offset * w for w in self.weights)

    def encode_key(self, key):
        flat = key if self.kind == "alternating" else key[0] + key[1]
        return sum((v + self.offset) * w for v, w in zip(flat, self.weights))

    @property
    def limit(self):
        return self.base ** self.length


def _steps(kind, a, k):
    """(coordinate offset, sign) per added column."""
    if kind == "alternating":
        return [(0, 1)] * (k + 1) + [(0, -1)] * k
    return [(0, 1)] * k + [(a, 1)] * (k + 1)


def _unique_rows(arr, limit):
    if len(arr) == 0:
        return arr
    r = arr.shape[1]
    if limit ** r < 2 ** 62:
        packed = np.zeros(len(arr), dtype=np.int64)
        for i in range(r):
            packed = packed * limit + arr[:, i]
        _, idx = np.unique(packed, return_index=True)
        return arr[np.sort(idx)]
    return np.unique(arr, axis=0)


def factored_constraints(R, a: int, kind: str, k: int, canonical: bool, cap: int = DEFAULT_STATE_CAP) -> np.ndarray:
    """Constraint scopes as rows of codes: one row per element of
    ``kR x (k+1)R`` (block) or ``(k+1)R - kR`` (alternating).

    With ``canonical`` every row is sorted, which is exact when R is
    permutation-closed.
    """
    codec = _Codec(kind, a, k)
    Rarr = np.asarray(list(R), dtype=np.int64)
    if Rarr.size == 0:
        return np.zeros((0, 0), dtype=np.int64)
    r = Rarr.shape[1]
    w = np.asarray(codec.weights, dtype=np.int64)
    states = np.full((1, r), codec.zero(), dtype=np.int64)
    for offset, sign in _steps(kind, a, k):
        deltas = sign * w[offset + Rarr]  # (|R|, r)
        chunk = max(1, 4_000_000 // (len(Rarr) * r))
        parts = []
        for s in range(0, len(states), chunk):
            new = (states[s:s + chunk, None, :] + deltas[None, :, :]).reshape(-1, r)
            if canonical:
                new.sort(axis=1)
            parts.append(_unique_rows(new, codec.limit))
        states = _unique_rows(np.concatenate(parts), codec.limit)
        if len(states) > cap:
            raise ResourceLimitExceeded(f"factored constraint set exceeded {cap} rows", "state_cap")
    return states


def _relation_symmetric(rel) -> bool:
    return all(p in rel.tuple_set for t in rel.tuples for p in itertools.permutations(t))


def _permutation_rows(rows: np.ndarray) -> np.ndarray:
    r = rows.shape[1]
    out = np.concatenate([rows[:, list(p)] for p in itertools.permutations(range(r))])
    return np.unique(out, axis=0)


def _lazy_solve(num_vars, num_values, groups, config, batch=2000):
    """Solve a CSP given as ``(scopes array, allowed tuples)`` groups, adding
    constraints only when a candidate solution violates them.

    A relaxation's lexicographically least solution that satisfies every
    constraint is the least solution of the full problem, so with
    ``config.lexicographic`` the answer is the same as a full solve.
    """
    tables = [(_Table(allowed, scopes.shape[1], num_values) if len(allowed) else None) for scopes, allowed in groups]
    allowed_codes = [np.array(sorted(_encode(t, num_values) for t in allowed), dtype=np.int64) for _, allowed in groups]
    active = [np.zeros(len(scopes), dtype=bool) for scopes, _ in groups]
    for g, (scopes, allowed) in enumerate(groups):
        if len(scopes) and not len(allowed):
            return None
        if len(scopes):
            step = max(1, len(scopes) // batch)
            active[g][::step] = True
    while True:
        csp = CSP(num_vars, num_values)
        for g, (scopes, _) in enumerate(groups):
            for row in scopes[active[g]]:
                csp.add(tuple(int(v) for v in row), tables[g])
        sol = csp.solve(config)
        if sol is None:
            return None
        arr = np.asarray(sol, dtype=np.int64)
        added = 0
        for g, (scopes, _) in enumerate(groups):
            if not len(scopes):
                continue
            img = arr[scopes]
            codes = np.zeros(len(img), dtype=np.int64)
            for i in range(scopes.shape[1]):
                codes = codes * num_values + img[:, i]
            bad = ~_isin_sorted(codes, allowed_codes[g])
            if bad.any():
                idx = np.flatnonzero(bad)[:batch]
                active[g][idx] = True
                added += len(idx)
        if not added:
            return sol


def exists_factored_polymorphism(A: Structure, B: Structure, kind: str, k: int,
                                 config: Optional[SearchConfig] = None,
                                 state_cap: int = DEFAULT_STATE_CAP) -> Optional[FactoredTable]:
    """Least (lexicographic) symmetric operation of arity 2k+1 in the
    factored domain, or None if none exists.

    A block-symmetric g on S_k x S_{k+1} must send every aligned pair from
    kR x (k+1)R into R^B; an alternating f on S_{k+1} - S_k must send every
    element of (k+1)R - kR into R^B.
    """
    check_similar(A, B)
    if k < 0:
        raise DataError("k must be nonnegative")
    a, b = A.domain_size, B.domain_size
    keys = factored_domain(kind, a, k)
    codec = _Codec(kind, a, k)
    key_codes = np.asarray([codec.encode_key(key) for key in keys], dtype=np.int64)
    groups = []
    for ra, rb in zip(A.relations, B.relations):
        if not ra.tuples:
            continue
        sym_a = _relation_symmetric(ra)
        rows = factored_constraints(ra.tuples, a, kind, k, sym_a, state_cap)
        if sym_a and not _relation_symmetric(rb):
            rows = _permutation_rows(rows)
            if len(rows) > state_cap:
                raise ResourceLimitExceeded("expanded constraint set exceeds cap", "state_cap")
        scopes = np.searchsorted(key_codes, rows)
        assert (key_codes[np.minimum(scopes, len(keys) - 1)] == rows).all()
        groups.append((scopes, list(rb.tuples)))
    cfg = config or SearchConfig()
    cfg = SearchConfig(cfg.max_nodes, cfg.time_limit, lexicographic=True)
    sol = _lazy_solve(len(keys), b, groups, cfg)
    if sol is None:
        return None
    return FactoredTable(kind, k, a, b, tuple(keys), tuple(sol))


def check_factored(table: FactoredTable, A: Structure, B: Structure, state_cap: int = DEFAULT_STATE_CAP) -> bool:
    """Direct constraint check of a factored table, without search."""
    codec = _Codec(table.kind, table.a, table.k)
    lookup = {codec.encode_key(key): v for key, v in zip(table.keys, table.values)}
    for ra, rb in zip(A.relations, B.relations):
        if not ra.tuples:
            continue
        rows = factored_constraints(ra.tuples, table.a, table.kind, table.k, False, state_cap) \
            if not _relation_symmetric(ra) else factored_constraints(ra.tuples, table.a, table.kind, table.k, True, state_cap)
        perms = [tuple(range(ra.arity))] if _relation_symmetric(rb) or not _relation_symmetric(ra) \
            else list(itertools.permutations(range(ra.arity)))
        for row in rows.tolist():
            img = [lookup[c] for c in row]
            for p in perms:
                if tuple(img[i] for i in p) not in rb.tuple_set:
                    return False
    return True


def verify_factored(table: FactoredTable, A: Structure, B: Structure, cap: int = DEFAULT_CHECK_CAP) -> bool:
    """The expansion is a polymorphism of the claimed kind.  Falls back to
    the factored constraint check when the raw check is over ``cap``."""
    f = table.expand()
    want = ALTERNATING if table.kind == "alternating" else TWO_BLOCK
    kind = symmetry_kind(f)
    if want == TWO_BLOCK and kind == NONE:
        return False
    if want == ALTERNATING and kind != ALTERNATING:
        return False
    try:
        return is_polymorphism(f, A, B, cap).holds
    except ResourceLimitExceeded:
        return check_factored(table, A, B)


def linear_factored_table(kind: str, a: int, m: int, k: int) -> FactoredTable:
    """The table of ``sum_v v * (y_v - x_v) (mod m)`` on the factored domain."""
    keys = factored_domain(kind, a, k)
    vals = []
    for key in keys:
        if kind == "alternating":
            z = key
        else:
            z = tuple(q - p for p, q in zip(*key))
        vals.append(sum(v * c for v, c in enumerate(z)) % m)
    return FactoredTable(kind, k, a, m, tuple(keys), tuple(vals))


# --------------------------------------------------------------------------
# certificates and transformations
# --------------------------------------------------------------------------

def block_collapse_certificate(B: Structure, matrix: Sequence[Sequence[int]], block_split: Sequence[int],
                               relation: Optional[str] = None) -> bool:
    """True certifies that B has no block-symmetric polymorphism with blocks
    of the given (contiguous) sizes: every column lies in R^B, all rows have
    the same multiset on each block, and R^B has no constant tuple."""
    rel = B.relation(relation) if relation else B.relations[0]
    rows = [tuple(r) for r in matrix]
    p, q = block_split
    if len(rows) != rel.arity:
        raise DataError(f"matrix has {len(rows)} rows, relation arity is {rel.arity}")
    if any(len(r) != p + q for r in rows):
        raise DataError(f"every row needs {p + q} entries")
    if abs(p - q) != 1:
        raise DataError("block sizes must differ by one")
    if any(not 0 <= x < B.domain_size for r in rows for x in r):
        raise DataError("matrix entry outside the domain")
    for col in zip(*rows):
        if col not in rel.tuple_set:
            return False
    first = (sorted(rows[0][:p]), sorted(rows[0][p:]))
    for r in rows[1:]:
        if (sorted(r[:p]), sorted(r[p:])) != first:
            return False
    return not any(len(set(t)) == 1 for t in rel.tuples)


def row_constant_vector(witness: BalanceWitness, a: int) -> tuple:
    """The common row-frequency vector c of the witness columns."""
    if not witness.counts:
        raise DataError("empty witness")
    r = len(next(iter(witness.counts)))
    freq = witness.row_frequencies(r)
    vecs = [tuple(f.get(v, 0) for v in range(a)) for f in freq]
    if any(v != vecs[0] for v in vecs):
        raise DataError("witness rows are not permutations of each other")
    return vecs[0]


def collapse_transform(g: FactoredTable, witness: BalanceWitness, k: int) -> FactoredTable:
    """From a block-symmetric table on S_{kN} x S_{kN+1} build the
    alternating table ``z -> g(k c, z + k c)`` on S_{k+1} - S_k, where c is
    the common row-frequency vector of the N witness columns."""
    if g.kind != "block_symmetric":
        raise DataError("input must be a block-symmetric table")
    a = g.a
    c = row_constant_vector(witness, a)
    N = sum(c)
    if g.k != k * N:
        raise DataError(f"table has k={g.k}, expected k*N = {k * N}")
    if min(c) < 1:
        raise DataError("some value never occurs in the relation; the shift k*c would not be positive")
    kc = tuple(k * v for v in c)
    table = g.lookup()
    keys = factored_domain("alternating", a, k)
    vals = []
    for z in keys:
        y = tuple(p + q for p, q in zip(z, kc))
        assert min(y) >= 0
        vals.append(table[(kc, y)])
    return FactoredTable("alternating", k, a, g.b, tuple(keys), tuple(vals))


def _member_of_power(v, Rbar_list, j, symmetric, memo):
    """Is the tuple of count vectors ``v`` a sum of j elements of Rbar?"""
    if j == 0:
        return all(not any(x) for x in v)
    key = (tuple(sorted(v)) if symmetric else v, j)
    if key in memo:
        return memo[key]
    # some summand must cover the least value used at position 0
    first = next((c for c, n in enumerate(v[0]) if n), None)
    ok = False
    if first is not None:
        for t in Rbar_list:
            if t[0][first] != 1:
                continue
            w = _add(v, t, -1)
            if all(min(x) >= 0 for x in w) and _member_of_power(w, Rbar_list, j - 1, symmetric, memo):
                ok = True
                break
    memo[key] = ok
    return ok


def lemma_containment(A: Structure, witness: BalanceWitness, k: int, relation: Optional[str] = None):
    """Check ``(k+1)R - kR + k * sum_i t_i`` is inside ``(kN+1)R``.

    Returns ``(True, None)`` or ``(False, counterexample)``.
    """
    rel = A.relation(relation) if relation else A.relations[0]
    a = A.domain_size
    c = row_constant_vector(witness, a)
    N = sum(c)
    sym = _relation_symmetric(rel)
    rows = factored_constraints(rel.tuples, a, "alternating", k, sym)
    codec = _Codec("alternating", a, k)
    Rbar_list = sorted(relation_bar(rel.tuples, a))
    memo = {}
    shift = tuple(k * x for x in c)
    decode = {codec.encode_key(z): z for z in factored_domain("alternating", a, k)}
    for row in rows.tolist():
        v = tuple(tuple(p + q for p, q in zip(decode[code], shift)) for code in row)
        if not _member_of_power(v, Rbar_list, k * N + 1, sym, memo):
            return False, v
    return True, None


# --------------------------------------------------------------------------
# degeneracy
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DegeneracyReport:
    degenerate: dict  # k -> witness tuple of profiles, or None
    hard_sets: tuple

    def to_dict(self):
        return {
            "k_degenerate": {str(k): (None if w is None else [[list(r) for r in x] for x in w])
                             for k, w in self.degenerate.items()},
            "hard_sets": [list(s) for s in self.hard_sets],
        }


def degeneracy_probe(f: OperationTable, max_k: int, max_set_size: int, cap: int = 1 << 20) -> DegeneracyReport:
    """Brute-force k-degeneracy for k <= max_k and hard sets up to the given
    size, from the profile of every subset of positions."""
    n = f.arity
    if (1 << n) > cap:
        raise ResourceLimitExceeded(f"2^{n} subsets exceed cap {cap}", "subset_cap")
    fp = _fp_by_mask(f)
    by_value = {}
    for mask, val in enumerate(fp):
        by_value.setdefault(val, []).append(mask)
    rng = sorted(by_value)

    def disjoint_choice(vals, used=0):
        if not vals:
            return True
        for m in by_value[vals[0]]:
            if not m & used and disjoint_choice(vals[1:], used | m):
                return True
        return False

    degenerate = {}
    for k in range(1, max_k + 1):
        degenerate[k] = None
        for combo in itertools.combinations_with_replacement(rng, k):
            if not disjoint_choice(list(combo)):
                degenerate[k] = combo
                break
    zero = fp[0]
    zero_sets = [m for m, v in enumerate(fp) if v == zero]
    hard = []
    for size in range(max_set_size + 1):
        for S in itertools.combinations(range(n), size):
            sm = sum(1 << p for p in S)
            if not any(z & sm == sm for z in zero_sets):
                hard.append(S)
    return DegeneracyReport(degenerate, tuple(hard))

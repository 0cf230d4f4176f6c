"""Named templates.

Keys are written like function calls: ``one_in_three``, ``q_in_r(2,4)``,
``eqn(3,1)``, ``cyclic_plus(4)``, ``remark_4_4(1)``.
"""

from __future__ import annotations

import itertools
import re

from .core import Relation, Structure, disjoint_union
from .errors import DataError


def q_in_r(q: int, r: int) -> Structure:
    """Boolean r-ary relation of all tuples with exactly q ones."""
    if r < 1 or not 0 <= q <= r:
        raise DataError(f"q_in_r needs 0 <= q <= r and r >= 1, got q={q}, r={r}")
    tuples = [t for t in itertools.product((0, 1), repeat=r) if sum(t) == q]
    return Structure(2, [Relation("R", r, tuples)])


def one_in_three() -> Structure:
    return q_in_r(1, 3)


def nae(r: int = 3) -> Structure:
    """Boolean not-all-equal relation."""
    if r < 2:
        raise DataError("nae needs arity >= 2")
    tuples = [t for t in itertools.product((0, 1), repeat=r) if len(set(t)) > 1]
    return Structure(2, [Relation("R", r, tuples)])


def linear_equation(m: int, c: int, r: int = 3, labels=None) -> Structure:
    """x_1 + ... + x_r = c (mod m) over Z_m."""
    if m < 1 or r < 1:
        raise DataError(f"equation template needs m >= 1 and r >= 1, got m={m}, r={r}")
    c %= m
    tuples = [t for t in itertools.product(range(m), repeat=r) if sum(t) % m == c]
    return Structure(m, [Relation("R", r, tuples)], labels)


def eqn(m: int, c: int = 1) -> Structure:
    if m < 1:
        raise DataError(f"eqn needs m >= 1, got {m}")
    if not 0 <= c < m:
        raise DataError(f"eqn needs 0 <= c < m, got c={c}")
    return linear_equation(m, c)


def cyclic_plus(k: int) -> Structure:
    """Domain 1..k; all arrangements of (i,i,i+1) cyclically, plus every
    triple of three distinct elements."""
    if k < 2:
        raise DataError(f"cyclic_plus needs k >= 2, got {k}")
    tuples = set()
    for i in range(k):
        tuples.update(itertools.permutations((i, i, (i + 1) % k)))
    tuples.update(itertools.permutations(range(k), 3))
    return Structure(k, [Relation("R", 3, sorted(tuples))], [str(i + 1) for i in range(k)])


def parity_pair(part: int = 0) -> Structure:
    """Two six-ary sum templates and their disjoint union.

    part 1: sum = 1 (mod 2) over {0,1}; part 2: sum = 2 (mod 3) over
    {0',1',2'}; part 0: the union, with the primed elements at indices 2..4.
    """
    a1 = linear_equation(2, 1, 6)
    a2 = linear_equation(3, 2, 6, ["0'", "1'", "2'"])
    if part == 1:
        return a1
    if part == 2:
        return a2
    if part == 0:
        return disjoint_union(a1, a2)
    raise DataError(f"remark_4_4 part must be 0, 1 or 2, got {part}")


def max_closed_pair() -> Structure:
    return Structure(2, [Relation("R", 1, [(0,)]), Relation("Q", 2, [(0, 1), (1, 0), (1, 1)])])


def unbalanced_ternary() -> Structure:
    return Structure(2, [Relation("S", 3, [(0, 0, 1), (0, 1, 0), (0, 1, 1)])])


def single_edge() -> Structure:
    return Structure(2, [Relation("P", 2, [(0, 1)])])


CATALOG = {
    "one_in_three": (one_in_three, 0, 0),
    "1in3": (one_in_three, 0, 0),
    "q_in_r": (q_in_r, 2, 2),
    "nae": (nae, 0, 1),
    "eqn": (eqn, 1, 2),
    "cyclic_plus": (cyclic_plus, 1, 1),
    "remark_4_4": (parity_pair, 0, 1),
    "remark_5_1": (max_closed_pair, 0, 0),
    "remark_5_2": (unbalanced_ternary, 0, 0),
    "remark_5_3": (single_edge, 0, 0),
}

_KEY = re.compile(r"^\s*([A-Za-z0-9_]+)\s*(?:\(\s*([-0-9,\s]*)\))?\s*$")


def parse_key(key: str):
    """Split ``eqn(3,1)`` into ``("eqn", (3, 1))``."""
    match = _KEY.match(key)
    if not match:
        raise DataError(f"malformed catalog key {key!r}")
    name, args = match.group(1), match.group(2)
    params = ()
    if args and args.strip():
        try:
            params = tuple(int(x) for x in args.split(","))
        except ValueError:
            raise DataError(f"catalog parameters must be integers: {key!r}") from None
    return name, params


def catalog_get(key: str, params=None) -> Structure:
    if params is None:
        key, params = parse_key(key)
    params = tuple(params)
    if key not in CATALOG:
        raise DataError(f"unknown catalog key {key!r}; known: {', '.join(sorted(CATALOG))}")
    build, lo, hi = CATALOG[key]
    if not lo <= len(params) <= hi:
        raise DataError(f"{key} takes {lo}..{hi} parameters, got {len(params)}")
    return build(*params)


def is_catalog_key(key: str) -> bool:
    try:
        return parse_key(key)[0] in CATALOG
    except DataError:
        return False


def standard_templates() -> dict:
    """A fixed sample of parameterised entries, used for sweeps."""
    keys = ["one_in_three", "nae", "q_in_r(2,4)", "eqn(2,1)", "eqn(3,1)", "eqn(4,1)",
            "cyclic_plus(3)", "cyclic_plus(4)", "remark_4_4(1)", "remark_5_1",
            "remark_5_2", "remark_5_3"]
    return {k: catalog_get(k) for k in keys}

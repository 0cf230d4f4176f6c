"""Exact linear feasibility kernels.

* :class:`Simplex` works on ``A x = b, x >= 0`` with a fraction-free integer
  tableau (rows are scaled integer vectors, normalised by their gcd) and
  Bland's rule throughout.
* :func:`integer_feasible` solves ``M x = b`` over the integers with a
  column Hermite reduction that tracks the unimodular transform.
* :func:`hermite_basis_mod` gives the canonical echelon basis of a subgroup
  of ``Z_m^d``.

Sparse vectors are ``dict`` column -> nonzero int.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from .errors import DataError


def _as_sparse(row) -> dict:
    if isinstance(row, dict):
        return {j: v for j, v in row.items() if v}
    return {j: v for j, v in enumerate(row) if v}


def _normalise(row: dict, rhs: int):
    g = abs(rhs)
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row, rhs
    if g > 1:
        row = {j: v // g for j, v in row.items()}
        rhs //= g
    return row, rhs


def _combine(row_s, rhs_s, row_r, rhs_r, mul_s, mul_r):
    """mul_s * (row_s) - mul_r * (row_r), dropping zeros."""
    out = {j: v * mul_s for j, v in row_s.items()}
    for j, v in row_r.items():
        w = out.get(j, 0) - mul_r * v
        if w:
            out[j] = w
        else:
            out.pop(j, None)
    return _normalise(out, rhs_s * mul_s - rhs_r * mul_r)


class Simplex:
    """Feasibility and support probing for ``A x = b, x >= 0`` over Q.

    Every row keeps its basic variable with a positive coefficient ``d``, so
    the basic value is ``rhs / d``.
    """

    def __init__(self, rows: Sequence, rhs: Sequence[int], num_vars: int):
        self.n = num_vars
        self.rows = []
        self.rhs = []
        for row, b in zip(rows, rhs):
            row = _as_sparse(row)
            if any(not 0 <= j < num_vars for j in row):
                raise DataError("constraint references an undeclared variable")
            if b < 0:
                row = {j: -v for j, v in row.items()}
                b = -b
            if not row:
                if b != 0:
                    self.rows = None
                    break
                continue
            self.rows.append(row)
            self.rhs.append(int(b))
        self.basis = []
        self.feasible = False
        self.pivots = 0
        if self.rows is not None:
            self.feasible = self._phase_one()

    # -- tableau primitives ----------------------------------------------

    def _pivot(self, r: int, c: int, obj) -> Optional[tuple]:
        row_r, rhs_r = self.rows[r], self.rhs[r]
        a = row_r[c]
        if a < 0:
            row_r = {j: -v for j, v in row_r.items()}
            rhs_r = -rhs_r
            a = -a
            self.rows[r], self.rhs[r] = row_r, rhs_r
        for s, row_s in enumerate(self.rows):
            if s == r:
                continue
            e = row_s.get(c)
            if e:
                self.rows[s], self.rhs[s] = _combine(row_s, self.rhs[s], row_r, rhs_r, a, e)
        self.basis[r] = c
        self.pivots += 1
        if obj is not None:
            o_row, o_rhs, o_d = obj
            e = o_row.get(c)
            if e:
                g = gcd(a, e)
                mul_o, mul_r = a // g, e // g
                o_row = {j: v * mul_o for j, v in o_row.items()}
                for j, v in row_r.items():
                    w = o_row.get(j, 0) - mul_r * v
                    if w:
                        o_row[j] = w
                    else:
                        o_row.pop(j, None)
                o_rhs = o_rhs * mul_o - rhs_r * mul_r
                o_d *= mul_o
                g = gcd(o_d, o_rhs)
                for v in o_row.values():
                    g = gcd(g, v)
                if g > 1:
                    o_row = {j: v // g for j, v in o_row.items()}
                    o_rhs //= g
                    o_d //= g
            return o_row, o_rhs, o_d
        return None

    def _ratio_row(self, c: int) -> Optional[int]:
        best, best_num, best_den = None, None, None
        for r, row in enumerate(self.rows):
            a = row.get(c, 0)
            if a > 0:
                num = self.rhs[r]
                if best is None:
                    best, best_num, best_den = r, num, a
                    continue
                lhs, rhs = num * best_den, best_num * a
                if lhs < rhs or (lhs == rhs and self.basis[r] < self.basis[best]):
                    best, best_num, best_den = r, num, a
        return best

    def _optimise(self, obj, allowed: int, stop=None):
        """Bland's-rule descent.  ``obj = (g, g0, d)`` encodes
        ``d z + sum g_j x_j = g0``; columns with ``g_j > 0`` improve z.

        Returns ``(obj, status)`` with status ``optimal``, ``unbounded:<col>``
        or ``stopped``.
        """
        while True:
            if stop is not None and stop():
                return obj, "stopped"
            entering = None
            for j, v in obj[0].items():
                if v > 0 and j < allowed and (entering is None or j < entering):
                    entering = j
            if entering is None:
                return obj, "optimal"
            r = self._ratio_row(entering)
            if r is None:
                return obj, f"unbounded:{entering}"
            obj = self._pivot(r, entering, obj)

    def _phase_one(self) -> bool:
        n, m = self.n, len(self.rows)
        for i in range(m):
            self.rows[i] = dict(self.rows[i])
            self.rows[i][n + i] = 1
        self.basis = [n + i for i in range(m)]
        g = {}
        for row in self.rows:
            for j, v in row.items():
                if j < n:
                    g[j] = g.get(j, 0) + v
        g = {j: v for j, v in g.items() if v}
        obj = (g, sum(self.rhs), 1)
        obj, _ = self._optimise(obj, n)
        if obj[1] != 0:
            return False
        # drive remaining artificials out of the basis; drop redundant rows
        r = 0
        while r < len(self.rows):
            if self.basis[r] >= n:
                cols = [j for j in self.rows[r] if j < n]
                if cols:
                    self._pivot(r, min(cols), None)
                else:
                    del self.rows[r], self.rhs[r], self.basis[r]
                    continue
            r += 1
        for i, row in enumerate(self.rows):
            self.rows[i] = {j: v for j, v in row.items() if j < n}
        return True

    # -- queries ------------------------------------------------------------

    def point(self) -> list:
        x = [Fraction(0)] * self.n
        for r, b in enumerate(self.basis):
            x[b] = Fraction(self.rhs[r], self.rows[r][b])
        return x

    def _objective_for(self, cost: dict):
        """Objective row for minimising ``cost . x`` in the current basis."""
        o_row = {j: -v for j, v in cost.items() if v}
        obj = (o_row, 0, 1)
        for r, b in enumerate(self.basis):
            e = obj[0].get(b)
            if e:
                row_r, rhs_r = self.rows[r], self.rhs[r]
                a = row_r[b]
                g = gcd(a, e)
                mul_o, mul_r = a // g, e // g
                o_row = {j: v * mul_o for j, v in obj[0].items()}
                for j, v in row_r.items():
                    w = o_row.get(j, 0) - mul_r * v
                    if w:
                        o_row[j] = w
                    else:
                        o_row.pop(j, None)
                obj = (o_row, obj[1] * mul_o - rhs_r * mul_r, obj[2] * mul_o)
        return obj

    def positive_point(self, j: int) -> Optional[list]:
        """A feasible point with ``x_j > 0``, or None if ``x_j`` is forced to 0."""
        return self.positive_any([j])

    def positive_any(self, js, greedy: bool = True) -> Optional[list]:
        """A feasible point with ``x_j > 0`` for some j in ``js``, or None if
        all of them are forced to 0.

        Maximises the sum over ``js``, stopping as soon as the current vertex
        has one of them positive; follows an improving ray when the objective
        is unbounded (the ray then raises the sum, so some ``x_j`` is positive).
        """
        if not self.feasible:
            raise ValueError("system is infeasible")
        js = set(js)

        def positive_now():
            for r, b in enumerate(self.basis):
                if b in js and self.rhs[r] > 0:
                    return True
            return False

        if positive_now():
            return self.point()
        obj = self._objective_for({j: -1 for j in js})
        obj, status = self._optimise(obj, self.n, positive_now if greedy else None)
        if status == "stopped":
            return self.point()
        if status.startswith("unbounded"):
            e = int(status.split(":")[1])
            x = self.point()
            x[e] += 1
            for r, b in enumerate(self.basis):
                x[b] -= Fraction(self.rows[r].get(e, 0), self.rows[r][b])
            return x
        return self.point() if positive_now() else None


    def edge_points(self, js) -> list:
        """Feasible points one pivot away from the current vertex that make a
        nonbasic ``x_j`` (j in ``js``) positive, found without pivoting:
        they exist exactly when the ratio test allows a positive step."""
        if not self.feasible:
            raise ValueError("system is infeasible")
        basic = set(self.basis)
        base = self.point()
        out = []
        for j in js:
            if j in basic:
                continue
            step = None
            for r, row in enumerate(self.rows):
                a = row.get(j, 0)
                if a > 0:
                    q = Fraction(self.rhs[r], a)
                    if step is None or q < step:
                        step = q
                        if not step:
                            break
            if step == 0:
                continue
            if step is None:
                step = Fraction(1)
            x = list(base)
            x[j] += step
            for r, b in enumerate(self.basis):
                a = self.rows[r].get(j, 0)
                if a:
                    x[b] -= step * Fraction(a, self.rows[r][b])
            out.append(x)
        return out


def lp_feasible_point(rows: Sequence, rhs: Sequence[int], num_vars: int) -> Optional[list]:
    """A rational point with ``A x = b, x >= 0``, or None."""
    lp = Simplex(rows, rhs, num_vars)
    return lp.point() if lp.feasible else None


# --------------------------------------------------------------------------
# integer systems
# --------------------------------------------------------------------------

def integer_feasible(M: Sequence, b: Sequence[int], num_vars: Optional[int] = None) -> Optional[list]:
    """An integer solution of ``M x = b`` or None.

    ``M`` is a sequence of rows (lists or sparse dicts).  With dict rows,
    ``num_vars`` gives the number of columns.
    """
    rows = [_as_sparse(r) for r in M]
    if len(rows) != len(b):
        raise DataError(f"matrix has {len(rows)} rows but right-hand side has {len(b)} entries")
    if num_vars is None:
        lengths = {len(r) for r in M if not isinstance(r, dict)}
        if any(isinstance(r, dict) for r in M) or len(lengths) > 1:
            if len(lengths) > 1:
                raise DataError("rows have different lengths")
            num_vars = 1 + max((j for r in rows for j in r), default=-1)
        else:
            num_vars = lengths.pop() if lengths else 0
    n = num_vars
    cols = [dict() for _ in range(n)]
    for i, row in enumerate(rows):
        for j, v in row.items():
            if not 0 <= j < n:
                raise DataError("column index out of range")
            cols[j][i] = v
    trans = [{j: 1} for j in range(n)]

    def sub(k, l, q):
        # column k -= q * column l
        for src, dst in ((cols[l], cols[k]), (trans[l], trans[k])):
            for i, v in src.items():
                w = dst.get(i, 0) - q * v
                if w:
                    dst[i] = w
                else:
                    dst.pop(i, None)

    pivots = []  # (row, column position)
    p = 0
    for i in range(len(rows)):
        active = [j for j in range(p, n) if cols[j].get(i)]
        if not active:
            continue
        while len(active) > 1:
            active.sort(key=lambda j: (abs(cols[j][i]), j))
            lead = active[0]
            keep = [lead]
            for j in active[1:]:
                sub(j, lead, cols[j][i] // cols[lead][i])
                if cols[j].get(i):
                    keep.append(j)
            active = keep
        lead = active[0]
        cols[p], cols[lead] = cols[lead], cols[p]
        trans[p], trans[lead] = trans[lead], trans[p]
        if cols[p][i] < 0:
            cols[p] = {k: -v for k, v in cols[p].items()}
            trans[p] = {k: -v for k, v in trans[p].items()}
        pivots.append((i, p))
        p += 1
        if p == n:
            break

    residual = {i: v for i, v in enumerate(b) if v}
    y = {}
    for i, c in pivots:
        v = residual.get(i, 0)
        if v % cols[c][i]:
            return None
        q = v // cols[c][i]
        if q:
            y[c] = q
            for k, w in cols[c].items():
                z = residual.get(k, 0) - q * w
                if z:
                    residual[k] = z
                else:
                    residual.pop(k, None)
    if residual:
        return None
    x = [0] * n
    for c, q in y.items():
        for k, w in trans[c].items():
            x[k] += q * w
    return x


def check_integer_solution(M: Sequence, b: Sequence[int], x: Sequence[int]) -> bool:
    for row, rhs in zip(M, b):
        items = row.items() if isinstance(row, dict) else enumerate(row)
        if sum(v * x[j] for j, v in items) != rhs:
            return False
    return True


# --------------------------------------------------------------------------
# subgroups of Z_m^d
# --------------------------------------------------------------------------

def _egcd(a: int, b: int):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hermite_basis_mod(generators: Sequence[Sequence[int]], m: int, d: int) -> list:
    """Canonical echelon basis of the subgroup of ``Z_m^d`` spanned by
    ``generators``.

    Returns ``d`` rows; row ``j`` is zero before column ``j`` and has pivot
    ``g_j`` dividing ``m`` at column ``j`` (``g_j = m`` means the subgroup
    contributes nothing new there).  Entries right of a pivot are reduced
    modulo the pivot below them, which makes the basis unique.  The subgroup
    has order ``prod(m // g_j)``.
    """
    if m < 1:
        raise ValueError("modulus must be positive")
    rows = []
    for v in generators:
        if len(v) != d:
            raise DataError(f"generator of length {len(v)}, expected {d}")
        w = [x % m for x in v]
        if any(w):
            rows.append(w)
    basis = []
    for j in range(d):
        pivot = None
        rest = []
        for row in rows:
            if row[j] == 0:
                rest.append(row)
            elif pivot is None:
                pivot = row
            else:
                g, s, t = _egcd(pivot[j], row[j])
                u, w = row[j] // g, pivot[j] // g
                new_pivot = [(s * x + t * y) % m for x, y in zip(pivot, row)]
                other = [(u * x - w * y) % m for x, y in zip(pivot, row)]
                pivot = new_pivot
                if any(other):
                    rest.append(other)
        if pivot is None:
            pivot = [0] * d
            pivot[j] = m
        else:
            g, s, _ = _egcd(pivot[j], m)
            other = [(m // g) * x % m for x in pivot]
            pivot = [s * x % m for x in pivot]
            pivot[j] = g
            if any(other):
                rest.append(other)
        basis.append(pivot)
        rows = rest
    # canonical form: reduce entries above each pivot
    for j in range(1, d):
        g = basis[j][j]
        for i in range(j):
            q = basis[i][j] // g
            if q:
                pivot_i = basis[i][i]
                basis[i] = [(x - q * y) % m for x, y in zip(basis[i], basis[j])]
                basis[i][i] = pivot_i
    return basis


def reduce_mod_basis(v: Sequence[int], basis: list, m: int) -> tuple:
    """Canonical representative of ``v`` modulo the subgroup."""
    w = [x % m for x in v]
    for j, row in enumerate(basis):
        g = row[j]
        q = w[j] // g
        if q:
            w = [(x - q * y) % m for x, y in zip(w, row)]
    return tuple(w)


def in_subgroup(v: Sequence[int], basis: list, m: int) -> bool:
    return not any(reduce_mod_basis(v, basis, m))


def subgroup_order(basis: list, m: int) -> int:
    order = 1
    for j, row in enumerate(basis):
        order *= m // row[j]
    return order


def subgroup_elements(basis: list, m: int):
    """Every element exactly once, as ``sum c_j row_j`` with ``0 <= c_j < m/g_j``."""
    d = len(basis)
    active = [(row, m // row[j]) for j, row in enumerate(basis) if row[j] != m]
    out = [tuple([0] * d)]
    for row, count in active:
        nxt = []
        for v in out:
            for c in range(count):
                nxt.append(tuple((x + c * y) % m for x, y in zip(v, row)))
        out = nxt
    return out

"""BLP, AIP and BLP+AIP over the standard marginal formulation.

Variables are ``mu[x][a]`` (x an instance element, a a template element) and
``lambda[C][t]`` (C a constraint occurrence, t a template tuple), with

* ``sum_a mu[x][a] = 1`` for every x,
* ``sum_t lambda[C][t] = 1`` for every C,
* ``sum_{t : t_i = a} lambda[C][t] = mu[s_i][a]`` for every C with scope s,
  position i and value a.

BLP asks for a nonnegative rational point, AIP for an integer point.
Everything is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import Structure, check_similar
from .linear import Simplex, check_integer_solution, integer_feasible

__all__ = [
    "LinearSystem", "RelaxationVerdict", "build_relaxation_system", "solve_blp", "solve_aip",
    "solve_blp_aip", "relative_interior_solution", "integer_feasible",
]


@dataclass
class LinearSystem:
    variables: list  # names, e.g. ("mu", x, a) or ("lambda", c, t)
    rows: list  # sparse dicts column -> coefficient
    rhs: list
    nonnegative: bool = True
    infeasible: bool = False  # some constraint uses an empty template relation
    index: dict = field(default_factory=dict)

    @property
    def num_vars(self):
        return len(self.variables)

    def satisfied_by(self, x) -> bool:
        if len(x) != self.num_vars:
            return False
        if self.nonnegative and any(v < 0 for v in x):
            return False
        return all(sum(c * x[j] for j, c in row.items()) == b for row, b in zip(self.rows, self.rhs))

    def with_zeros(self, zero_vars) -> "LinearSystem":
        """The same system with ``x_j = 0`` added for each j given."""
        rows = list(self.rows) + [{j: 1} for j in sorted(zero_vars)]
        rhs = list(self.rhs) + [0] * len(zero_vars)
        return LinearSystem(self.variables, rows, rhs, self.nonnegative, self.infeasible, self.index)


@dataclass(frozen=True)
class RelaxationVerdict:
    method: str
    accepted: bool
    certificate: Optional[tuple] = None
    rejected_reason: Optional[str] = None

    def __bool__(self):
        return self.accepted

    def to_dict(self, system: Optional[LinearSystem] = None):
        out = {"method": self.method, "accepted": self.accepted}
        if self.certificate is not None:
            vals = [_num(v) for v in self.certificate]
            if system is not None:
                out["certificate"] = [[_name(n), v] for n, v in zip(system.variables, vals)]
            else:
                out["certificate"] = vals
        if self.rejected_reason is not None:
            out["rejected_reason"] = self.rejected_reason
        return out


def _num(v):
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(v)


def _name(n):
    kind, i, j = n
    if kind == "mu":
        return f"mu[{i}][{j}]"
    return f"lambda[{i}][{','.join(map(str, j))}]"


def build_relaxation_system(X: Structure, A: Structure) -> LinearSystem:
    check_similar(X, A)
    names, index = [], {}

    def var(name):
        index[name] = len(names)
        names.append(name)
        return index[name]

    mu = [[var(("mu", x, a)) for a in range(A.domain_size)] for x in range(X.domain_size)]
    rows, rhs = [], []
    for x in range(X.domain_size):
        rows.append({j: 1 for j in mu[x]})
        rhs.append(1)
    infeasible = False
    c = 0
    for rx, ra in zip(X.relations, A.relations):
        for scope in rx.tuples:
            if not ra.tuples:
                infeasible = True
            lam = [var(("lambda", c, t)) for t in ra.tuples]
            rows.append({j: 1 for j in lam})
            rhs.append(1)
            for i, x in enumerate(scope):
                for a in range(A.domain_size):
                    row = {j: 1 for j, t in zip(lam, ra.tuples) if t[i] == a}
                    row[mu[x][a]] = row.get(mu[x][a], 0) - 1
                    rows.append(row)
                    rhs.append(0)
            c += 1
    return LinearSystem(names, rows, rhs, True, infeasible, index)


def solve_blp(X: Structure, A: Structure) -> RelaxationVerdict:
    system = build_relaxation_system(X, A)
    if system.infeasible:
        return RelaxationVerdict("blp", False, rejected_reason="a constraint uses an empty template relation")
    lp = Simplex(system.rows, system.rhs, system.num_vars)
    if not lp.feasible:
        return RelaxationVerdict("blp", False, rejected_reason="no nonnegative rational solution")
    point = tuple(lp.point())
    assert system.satisfied_by(point)
    return RelaxationVerdict("blp", True, point)


def solve_aip(X: Structure, A: Structure) -> RelaxationVerdict:
    system = build_relaxation_system(X, A)
    if system.infeasible:
        return RelaxationVerdict("aip", False, rejected_reason="a constraint uses an empty template relation")
    x = integer_feasible(system.rows, system.rhs, system.num_vars)
    if x is None:
        return RelaxationVerdict("aip", False, rejected_reason="no integer solution")
    assert check_integer_solution(system.rows, system.rhs, x)
    return RelaxationVerdict("aip", True, tuple(x))


def relative_interior_solution(system: LinearSystem) -> Optional[tuple]:
    """A feasible point whose support is as large as possible, or None if the
    system has no nonnegative solution.

    Each LP pushes up the sum of the variables not yet seen positive and
    stops at the first vertex where one of them is; when the sum is stuck at
    0 the rest are zero in every feasible point.  Neighbouring points along
    non-degenerate edges of each vertex are collected for free.  The output
    is the average of the points found.
    """
    lp = Simplex(system.rows, system.rhs, system.num_vars)
    if not lp.feasible or system.infeasible:
        return None
    points = [lp.point()]
    positive = {j for j, v in enumerate(points[0]) if v > 0}
    while True:
        rest = [j for j in range(system.num_vars) if j not in positive]
        for p in lp.edge_points(rest):
            if any(p[j] > 0 for j in rest if j not in positive):
                points.append(p)
                positive.update(j for j, v in enumerate(p) if v > 0)
        rest = [j for j in rest if j not in positive]
        p = lp.positive_any(rest) if rest else None
        if p is None:
            break
        points.append(p)
        positive.update(j for j, v in enumerate(p) if v > 0)
    n = len(points)
    avg = tuple(sum((p[j] for p in points), Fraction(0)) / n for j in range(system.num_vars))
    assert system.satisfied_by(avg)
    return avg


def solve_blp_aip(X: Structure, A: Structure) -> RelaxationVerdict:
    """Integer feasibility restricted to the support of a relative-interior
    BLP solution."""
    system = build_relaxation_system(X, A)
    if system.infeasible:
        return RelaxationVerdict("blp+aip", False, rejected_reason="a constraint uses an empty template relation")
    point = relative_interior_solution(system)
    if point is None:
        return RelaxationVerdict("blp+aip", False, rejected_reason="no nonnegative rational solution")
    zeros = [j for j, v in enumerate(point) if v == 0]
    restricted = system.with_zeros(zeros)
    x = integer_feasible(restricted.rows, restricted.rhs, restricted.num_vars)
    if x is None:
        return RelaxationVerdict("blp+aip", False,
                                 rejected_reason="no integer solution on the relative-interior support")
    assert check_integer_solution(restricted.rows, restricted.rhs, x)
    return RelaxationVerdict("blp+aip", True, tuple(x))

"""A small exact linear-programming solver (two-phase simplex, Bland's rule).

Problems have the form::

    maximise  c.x   subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0

with every coefficient a Fraction. Bland's smallest-index rule guarantees
termination; sizes in this toolkit are a few dozen variables at most.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

_Z = Fraction(0)


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    x: tuple | None = None

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"


def _pivot(T, r, col):
    piv = T[r][col]
    row = [v / piv for v in T[r]]
    T[r] = row
    for k, other in enumerate(T):
        if k != r and other[col]:
            f = other[col]
            T[k] = [a - f * b for a, b in zip(other, row)]


def _run(T, basis, cost, columns):
    m = len(T)
    while True:
        in_basis = set(basis)
        enter = None
        for j in columns:
            if j in in_basis:
                continue
            rj = cost[j] - sum((cost[basis[i]] * T[i][j] for i in range(m)), _Z)
            if rj > 0:
                enter = j
                break
        if enter is None:
            return "optimal"
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return "unbounded"
        _pivot(T, best[1], enter)
        basis[best[1]] = enter


def solve(c: Sequence, A_ub: Sequence = (), b_ub: Sequence = (),
          A_eq: Sequence = (), b_eq: Sequence = ()) -> LpResult:
    """Maximise ``c.x``; see the module docstring for the constraint form."""
    n = len(c)
    rows = [([Fraction(v) for v in a], Fraction(b), True) for a, b in zip(A_ub, b_ub)]
    rows += [([Fraction(v) for v in a], Fraction(b), False) for a, b in zip(A_eq, b_eq)]
    for a, _, _ in rows:
        if len(a) != n:
            raise ValueError("constraint row length does not match the objective")
    m = len(rows)
    n_slack = sum(1 for _, _, ub in rows if ub)
    width = n + n_slack + m  # originals, slacks, artificials
    T, basis = [], []
    slack = n
    for k, (a, b, ub) in enumerate(rows):
        line = a + [_Z] * (n_slack + m) + [b]
        if ub:
            line[slack] = Fraction(1)
        if b < 0:
            line = [-v for v in line]
        art = n + n_slack + k
        if ub and line[slack] == 1:
            basis.append(slack)
        else:
            line[art] = Fraction(1)
            basis.append(art)
        if ub:
            slack += 1
        T.append(line)

    artificial = set(range(n + n_slack, width))
    if any(b in artificial for b in basis):
        phase1 = [_Z] * width
        for j in artificial:
            phase1[j] = Fraction(-1)
        _run(T, basis, phase1, range(width))
        if sum((T[i][-1] for i in range(m) if basis[i] in artificial), _Z) > 0:
            return LpResult("infeasible")
        # Drive zero-level artificials out of the basis, dropping redundant rows.
        i = 0
        while i < len(T):
            if basis[i] in artificial:
                col = next((j for j in range(n + n_slack) if T[i][j] != 0), None)
                if col is None:
                    del T[i]
                    del basis[i]
                    continue
                _pivot(T, i, col)
                basis[i] = col
            i += 1

    real = range(n + n_slack)
    cost = [Fraction(v) for v in c] + [_Z] * (n_slack + m)
    status = _run(T, basis, cost, real)
    if status == "unbounded":
        return LpResult("unbounded")
    x = [_Z] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = T[i][-1]
    value = sum((cv * xv for cv, xv in zip(cost, x)), _Z)
    return LpResult("optimal", value, tuple(x))


def feasible_point(n: int, A_ub: Sequence = (), b_ub: Sequence = (),
                   A_eq: Sequence = (), b_eq: Sequence = ()) -> tuple | None:
    """A point of ``{x >= 0 : A_ub x <= b_ub, A_eq x = b_eq}``, or ``None`` if empty."""
    res = solve([_Z] * n, A_ub, b_ub, A_eq, b_eq)
    return res.x if res.status == "optimal" else None

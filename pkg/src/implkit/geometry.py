"""Lower contour sets and the polytopes they live in.

Every contour object here is a face of the lottery simplex, possibly cut by a
single half-space ``c.y <= b``. Such a polytope is the convex hull of a short,
explicit vertex list: the unit lotteries that satisfy the cut plus one point
on every simplex edge that crosses the cutting hyperplane. Containment in a
half-space and linear maximisation therefore reduce to scanning vertices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping

from .environment import ZERO, Environment, Lottery, expected_utility
from .errors import EmptyPolytope, EmptySet, NotInteriorLottery


@dataclass(frozen=True)
class ContourPolytope:
    """``{y in simplex(ground) : c.y <= b}``; without a cut, the whole face.

    ``ground`` is an ordered tuple of outcomes and ``cut`` is ``None`` or a
    pair ``(c, b)`` with ``c`` a tuple aligned with ``ground``.
    """

    ground: tuple
    cut: tuple | None = None

    def __post_init__(self):
        if not self.ground:
            raise EmptySet("a contour polytope needs a nonempty ground set")

    @classmethod
    def simplex(cls, ground: Iterable) -> "ContourPolytope":
        return cls(tuple(ground))

    @classmethod
    def with_cut(cls, ground: Iterable, c: Mapping, b) -> "ContourPolytope":
        ground = tuple(ground)
        return cls(ground, (tuple(Fraction(c[z]) for z in ground), Fraction(b)))

    def contains(self, y: Lottery) -> bool:
        if not y.support() <= set(self.ground):
            return False
        if self.cut is None:
            return True
        c, b = self.cut
        return sum((y.prob(z) * cz for z, cz in zip(self.ground, c)), ZERO) <= b

    def support_union(self) -> frozenset:
        """Outcomes that some member lottery puts positive weight on."""
        out = set()
        for v in vertices(self):
            out |= v.support()
        return frozenset(out)


@lru_cache(maxsize=1 << 16)
def vertices(P: ContourPolytope) -> tuple:
    """Vertex list: feasible unit lotteries in ground order, then edge points.

    An edge ``(z, w)`` contributes the point where it meets ``c.y = b`` when
    exactly one endpoint is infeasible. Pairs are scanned in lexicographic
    ground-index order.
    """
    if P.cut is None:
        return tuple(Lottery.degenerate(z) for z in P.ground)
    c, b = P.cut
    out = [Lottery.degenerate(z) for z, cz in zip(P.ground, c) if cz <= b]
    if not out:
        raise EmptyPolytope("no outcome of the ground set satisfies the cut")
    seen = set(out)
    for (k, z), (l, w) in combinations(enumerate(P.ground), 2):
        lo, hi = (z, w) if c[k] <= b < c[l] else (w, z) if c[l] <= b < c[k] else (None, None)
        if lo is None:
            continue
        c_lo = c[k] if lo == z else c[l]
        c_hi = c[l] if lo == z else c[k]
        lam = (b - c_lo) / (c_hi - c_lo)
        v = Lottery({lo: 1 - lam, hi: lam})
        if v not in seen:
            seen.add(v)
            out.append(v)
    return tuple(out)


def _dot(c: Mapping, y: Lottery) -> Fraction:
    return sum((p * Fraction(c[z]) for z, p in y.items()), ZERO)


def contains_in_halfspace(P: ContourPolytope, c: Mapping, b) -> tuple[bool, Lottery | None]:
    """Is ``P`` inside ``{y : c.y <= b}``? Returns ``(verdict, violating vertex)``."""
    b = Fraction(b)
    for v in vertices(P):
        if _dot(c, v) > b:
            return False, v
    return True, None


def argmax_linear(P: ContourPolytope, c: Mapping) -> tuple[Fraction, Lottery]:
    """Maximum of ``c.y`` over ``P``; ties go to the earliest vertex."""
    best_val, best = None, None
    for v in vertices(P):
        val = _dot(c, v)
        if best_val is None or val > best_val:
            best_val, best = val, v
    return best_val, best


# --- contour sets ----------------------------------------------------------

def argmax_set(env: Environment, i: int, state, E: Iterable | None = None) -> frozenset:
    E = env.outcomes if E is None else tuple(E)
    if not E:
        raise EmptySet("argmax over an empty set")
    top = max(env.utility(i, state, z) for z in E)
    return frozenset(z for z in E if env.utility(i, state, z) == top)


def argmin_set(env: Environment, i: int, state, E: Iterable | None = None) -> frozenset:
    E = env.outcomes if E is None else tuple(E)
    if not E:
        raise EmptySet("argmin over an empty set")
    low = min(env.utility(i, state, z) for z in E)
    return frozenset(z for z in E if env.utility(i, state, z) == low)


def lower_contour_Z(env: Environment, i: int, state, a) -> frozenset:
    ua = env.utility(i, state, a)
    return frozenset(z for z in env.outcomes if env.utility(i, state, z) <= ua)


def strict_lower_contour_Z(env: Environment, i: int, state, a) -> frozenset:
    ua = env.utility(i, state, a)
    return frozenset(z for z in env.outcomes if env.utility(i, state, z) < ua)


def strict_upper_contour_Z(env: Environment, i: int, state, a) -> frozenset:
    ua = env.utility(i, state, a)
    return frozenset(z for z in env.outcomes if env.utility(i, state, z) > ua)


def lower_contour_Z_of_set(env: Environment, i: int, state, E: Iterable) -> frozenset:
    """Outcomes weakly worse than every member of ``E``."""
    E = tuple(E)
    if not E:
        raise EmptySet("lower contour of an empty set")
    low = min(env.utility(i, state, z) for z in E)
    return frozenset(z for z in env.outcomes if env.utility(i, state, z) <= low)


def lower_contour_Y(env: Environment, i: int, state, alpha: Lottery | str,
                    ground: Iterable | None = None) -> ContourPolytope:
    """Lotteries on ``ground`` that agent ``i`` weakly disprefers to ``alpha``."""
    if not isinstance(alpha, Lottery):
        alpha = Lottery.degenerate(alpha)
    ground = env.outcomes if ground is None else env.ordered(ground)
    if not alpha.support() <= set(ground):
        raise ValueError("the reference lottery must live on the ground set")
    return ContourPolytope.with_cut(ground, env.u_map(i, state),
                                    expected_utility(env, i, state, alpha))


def within_lower_contour(env: Environment, P: ContourPolytope, i: int, state,
                         alpha: Lottery | str) -> tuple[bool, Lottery | None]:
    """Is every lottery of ``P`` weakly worse than ``alpha`` for ``i`` at ``state``?"""
    if not isinstance(alpha, Lottery):
        alpha = Lottery.degenerate(alpha)
    return contains_in_halfspace(P, env.u_map(i, state), expected_utility(env, i, state, alpha))


# --- interior decomposition ------------------------------------------------

def decompose_interior(gamma: Lottery, eta: Lottery, E: Iterable) -> tuple[Fraction, Lottery]:
    """Write ``gamma = beta*eta + (1-beta)*mu`` with ``beta`` in (0, 1) and ``mu`` on ``E``.

    ``gamma`` must have full support on ``E``. The mixing weight is half of
    the largest step away from ``eta`` that keeps ``mu`` nonnegative, which
    keeps ``mu`` interior as well.
    """
    E = frozenset(E)
    if not E or gamma.support() != E:
        raise NotInteriorLottery("gamma must put positive weight on exactly E")
    if not eta.support() <= E:
        raise ValueError("eta must live on E")
    ratios = [gamma.prob(z) / (eta.prob(z) - gamma.prob(z))
              for z in E if eta.prob(z) > gamma.prob(z)]
    step = min(ratios) / 2 if ratios else Fraction(1)
    mu = Lottery({z: (1 + step) * gamma.prob(z) - step * eta.prob(z) for z in E})
    return step / (1 + step), mu


def level_slice_points(env: Environment, i: int, state, E: Iterable) -> tuple:
    """Finite family of lotteries on ``E`` that decides "for every eta in simplex(E)".

    For each utility level ``t`` of agent ``i`` at ``state`` that lies between
    the worst and best members of ``E``, take the vertices of the slice
    ``{eta in simplex(E) : U(eta) = t}``. A contour-containment statement that
    is linear in the slice and piecewise linear in ``t`` with kinks only at
    these levels holds for all of ``simplex(E)`` iff it holds on this family.
    """
    E = env.ordered(E)
    if not E:
        raise EmptySet("slice family of an empty set")
    u = {z: env.utility(i, state, z) for z in E}
    lo, hi = min(u.values()), max(u.values())
    levels = sorted({env.utility(i, state, z) for z in env.outcomes if lo <= env.utility(i, state, z) <= hi})
    out, seen = [], set()

    def push(y):
        if y not in seen:
            seen.add(y)
            out.append(y)

    for t in levels:
        for z in E:
            if u[z] == t:
                push(Lottery.degenerate(z))
        for z, w in combinations(E, 2):
            a, b = (z, w) if u[z] < u[w] else (w, z)
            if u[a] < t < u[b]:
                lam = (t - u[a]) / (u[b] - u[a])
                push(Lottery({a: 1 - lam, b: lam}))
    return tuple(out)

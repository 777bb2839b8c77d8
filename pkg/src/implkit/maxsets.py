"""Max sets, the effective outcome universe Z*, the Xi family and refined contour sets.

All functions are pure and memoised on their (hashable) arguments, so the
memo tables always agree with recomputation from the definitions.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable

from .environment import Environment, Scc, Scf, expected_utility, unif
from .errors import EmptyPolytope, EmptySet, InternalMismatch, NotSubsetOfZstar, ThetaSetTooLarge
from .geometry import (
    ContourPolytope,
    argmax_set,
    argmin_set,
    lower_contour_Y,
    lower_contour_Z,
    lower_contour_Z_of_set,
    strict_lower_contour_Z,
)

DEFAULT_XI_CAP = 12
_MEMO = 1 << 16


def xi_cap(cap: int | None = None) -> int:
    """Explicit cap, else ``IMPLKIT_XI_CAP`` from the environment, else 12."""
    if cap is not None:
        return cap
    raw = os.environ.get("IMPLKIT_XI_CAP")
    return int(raw) if raw else DEFAULT_XI_CAP


def _constant_on(env, i, state, E) -> bool:
    return len({env.utility(i, state, z) for z in E}) == 1


# --- i-max sets ------------------------------------------------------------

@lru_cache(maxsize=_MEMO)
def _theta_max(env: Environment, E: frozenset, i: int, state, universe: frozenset) -> bool:
    if not _constant_on(env, i, state, E):
        return False
    return all(E <= argmax_set(env, j, state, env.ordered(universe))
               for j in env.agent_ids if j != i)


def is_i_theta_max_set(env: Environment, E: Iterable, i: int, state) -> bool:
    """``i`` is indifferent on ``E`` and every other agent ranks all of ``E`` top in Z."""
    E = frozenset(E)
    if not E:
        raise EmptySet("max-set test on an empty set")
    return _theta_max(env, E, i, state, frozenset(env.outcomes))


def is_i_max_set(env: Environment, E: Iterable, i: int) -> bool:
    E = frozenset(E)
    return any(is_i_theta_max_set(env, E, i, s) for s in env.states)


@lru_cache(maxsize=_MEMO)
def z_star(env: Environment, F: Scc) -> frozenset:
    """``F``'s range when Z is somebody's max set, otherwise all of Z."""
    Z = frozenset(env.outcomes)
    if any(is_i_max_set(env, Z, i) for i in env.agent_ids):
        return F.union()
    return Z


def is_i_zstar_theta_max_set(env: Environment, F: Scc, E: Iterable, i: int, state) -> bool:
    E = frozenset(E)
    if not E:
        raise EmptySet("max-set test on an empty set")
    zs = z_star(env, F)
    if not E <= zs:
        raise NotSubsetOfZstar(f"{sorted(E - zs)} lie outside Z*")
    return _theta_max(env, E, i, state, zs)


def is_i_zstar_max_set(env: Environment, F: Scc, E: Iterable, i: int) -> bool:
    E = frozenset(E)
    return any(is_i_zstar_theta_max_set(env, F, E, i, s) for s in env.states)


@lru_cache(maxsize=_MEMO)
def lambda_states(env: Environment, F: Scc, E: frozenset, i: int) -> tuple:
    """States at which ``E`` is an i-Z*-max set, in declared order."""
    E = frozenset(E)
    return tuple(s for s in env.states if is_i_zstar_theta_max_set(env, F, E, i, s))


# --- Theta sets and the Xi family ------------------------------------------

@lru_cache(maxsize=_MEMO)
def theta_i_theta(env: Environment, F: Scc, i: int, state) -> tuple:
    """States where ``F(state)`` is i-Z*-max and weakly included in ``F`` there."""
    E = F[state]
    return tuple(t for t in env.states
                 if is_i_zstar_theta_max_set(env, F, E, i, t) and E <= F[t])


@lru_cache(maxsize=_MEMO)
def theta_i_theta_cd(env: Environment, F: Scc, i: int, state) -> tuple:
    """Like :func:`theta_i_theta`, keyed on the members of ``F(state)`` that ``i`` ranks lowest in Z*."""
    G = cd_core(env, F, i, state)
    if not G:
        return ()
    return tuple(t for t in env.states
                 if is_i_zstar_theta_max_set(env, F, G, i, t) and G <= F[t])


def cd_core(env: Environment, F: Scc, i: int, state) -> frozenset:
    zs = env.ordered(z_star(env, F))
    return F[state] & argmin_set(env, i, state, zs)


def base_set(env: Environment, F: Scc, i: int, state) -> frozenset:
    """``Z* intersect L_i^Z(F(state), state)``."""
    return z_star(env, F) & lower_contour_Z_of_set(env, i, state, F[state])


def _intersect_values(F: Scc, K: Iterable, start: frozenset) -> frozenset:
    out = start
    for t in K:
        out = out & F[t]
    return out


@dataclass(frozen=True)
class XiFamily:
    """Members of the family plus the candidates skipped because their base set is empty."""

    members: tuple
    empty_base: tuple

    def union_of_intersections(self, F: Scc, start: frozenset) -> frozenset:
        out = frozenset()
        for K in self.members:
            out |= _intersect_values(F, K, start)
        return out


@lru_cache(maxsize=_MEMO)
def _xi(env: Environment, F: Scc, i: int, state, pool: tuple, cap: int) -> XiFamily:
    if len(pool) > cap:
        raise ThetaSetTooLarge(
            f"{len(pool)} candidate states for agent {i} at {state!r} exceed the cap {cap}",
            agent=i, state=state)
    B = base_set(env, F, i, state)
    members, skipped = [], []
    pool_set = frozenset(pool)
    for size in range(1, len(pool) + 1):
        for K in combinations(pool, size):
            E = _intersect_values(F, K, B)
            if not E:
                skipped.append(K)
                continue
            hit = tuple(t for t in lambda_states(env, F, E, i) if t in pool_set)
            if hit == K:
                members.append(K)
    return XiFamily(tuple(members), tuple(skipped))


def xi_analysis(env: Environment, F: Scc, i: int, state, cap: int | None = None) -> XiFamily:
    return _xi(env, F, i, state, theta_i_theta(env, F, i, state), xi_cap(cap))


def xi_family(env: Environment, F: Scc, i: int, state, cap: int | None = None) -> tuple:
    """All nonempty K in Theta_i^state that reproduce themselves through Lambda."""
    return xi_analysis(env, F, i, state, cap).members


def xi_analysis_cd(env: Environment, F: Scc, i: int, state, cap: int | None = None) -> XiFamily:
    return _xi(env, F, i, state, theta_i_theta_cd(env, F, i, state), xi_cap(cap))


def xi_iterative_member(env: Environment, F: Scc, i: int, state) -> tuple | None:
    """One member of the Xi family found by the shrinking-intersection iteration.

    Starts from the states where the base set is i-Z*-max and repeatedly
    re-selects the states where the current intersection is i-Z*-max, stopping
    once the intersection stops changing. ``None`` when the first step is
    empty or the iteration leaves the well-defined region.
    """
    pool = theta_i_theta(env, F, i, state)
    B = base_set(env, F, i, state)

    def select(E):
        if not E:
            return None
        return tuple(t for t in pool if is_i_zstar_theta_max_set(env, F, E, i, t))

    K = select(B)
    if not K:
        return None
    seen = set()
    while True:
        E = _intersect_values(F, K, B)
        nxt = select(E)
        if not nxt:
            return None
        if _intersect_values(F, nxt, B) == E:
            return nxt
        if nxt in seen:
            return None
        seen.add(nxt)
        K = nxt


# --- refined lower contour sets --------------------------------------------

@dataclass(frozen=True)
class LhatSet:
    """A refined lower contour set: its polytope, variant tag and which branch produced it."""

    polytope: ContourPolytope
    variant: str
    branch: str

    def support_union(self) -> frozenset:
        return self.polytope.support_union()


def _is_bottom(env, i, state, a, universe) -> bool:
    return a in argmin_set(env, i, state, env.ordered(universe))


def lhat_scf(env: Environment, f: Scf, i: int, state) -> LhatSet:
    a = f[state]
    if _is_bottom(env, i, state, a, env.outcomes) and is_i_max_set(env, lower_contour_Z(env, i, state, a), i):
        return LhatSet(ContourPolytope.simplex((a,)), "SCF", "singleton")
    return LhatSet(lower_contour_Y(env, i, state, a), "SCF", "contour")


def gamma_hat(env: Environment, f: Scf, i: int, state) -> frozenset:
    """Outcomes reachable inside the refined contour set, computed two ways."""
    by_vertices = lhat_scf(env, f, i, state).support_union()
    a = f[state]
    if not _is_bottom(env, i, state, a, env.outcomes):
        closed = frozenset(env.outcomes)
    else:
        L = lower_contour_Z(env, i, state, a)
        closed = frozenset({a}) if is_i_max_set(env, L, i) else L
    if by_vertices != closed:
        raise InternalMismatch(f"support union {sorted(by_vertices)} != closed form {sorted(closed)}")
    return closed


def lhat_scc_EF(env: Environment, F: Scc, i: int, state, a) -> LhatSet:
    if a in F[state] and _is_bottom(env, i, state, a, env.outcomes) \
            and is_i_max_set(env, lower_contour_Z(env, i, state, a), i):
        return LhatSet(ContourPolytope.simplex((a,)), "EF", "singleton")
    return LhatSet(lower_contour_Y(env, i, state, a), "EF", "contour")


@dataclass(frozen=True)
class _FirstBranch:
    applies: bool
    ground: frozenset


def _first_branch(env, F, i, state, key_ok: bool, analysis) -> _FirstBranch:
    if not key_ok:
        return _FirstBranch(False, frozenset())
    B = base_set(env, F, i, state)
    if not is_i_zstar_max_set(env, F, B, i):
        return _FirstBranch(False, frozenset())
    fam = analysis()
    if not fam.members:
        return _FirstBranch(False, frozenset())
    ground = fam.union_of_intersections(F, B)
    if not ground:
        raise EmptyPolytope(f"first-branch ground set is empty for agent {i} at {state!r}")
    return _FirstBranch(True, ground)


def _ab_first(env, F, i, state, cap):
    zs = env.ordered(z_star(env, F))
    key_ok = F[state] <= argmin_set(env, i, state, zs)
    return _first_branch(env, F, i, state, key_ok, lambda: xi_analysis(env, F, i, state, cap))


def lhat_AB(env: Environment, F: Scc, i: int, state, cap: int | None = None) -> LhatSet:
    """Refined contour set of the uniform lottery on ``F(state)``."""
    fb = _ab_first(env, F, i, state, cap)
    if fb.applies:
        return LhatSet(ContourPolytope.simplex(env.ordered(fb.ground)), "AB", "xi")
    return LhatSet(lower_contour_Y(env, i, state, unif(env.ordered(F[state])), z_star(env, F)),
                   "AB", "contour")


def gamma_hat_AB(env: Environment, F: Scc, i: int, state, cap: int | None = None) -> frozenset:
    by_vertices = lhat_AB(env, F, i, state, cap).support_union()
    zs = z_star(env, F)
    fb = _ab_first(env, F, i, state, cap)
    if fb.applies:
        closed = fb.ground
    elif F[state] <= argmin_set(env, i, state, env.ordered(zs)):
        closed = base_set(env, F, i, state)
    else:
        closed = zs
    if by_vertices != closed:
        raise InternalMismatch(f"support union {sorted(by_vertices)} != closed form {sorted(closed)}")
    return closed


def lhat_CD(env: Environment, F: Scc, i: int, state, a, cap: int | None = None) -> LhatSet:
    key_ok = a in cd_core(env, F, i, state)
    fb = _first_branch(env, F, i, state, key_ok, lambda: xi_analysis_cd(env, F, i, state, cap))
    if fb.applies:
        return LhatSet(ContourPolytope.simplex(env.ordered(fb.ground)), "CD", "xi")
    return LhatSet(lower_contour_Y(env, i, state, a, z_star(env, F)), "CD", "contour")


def lhat_zstar_AB(env: Environment, F: Scc, i: int, state, a, cap: int | None = None) -> frozenset:
    """Outcome-set analogue of :func:`lhat_AB` used by the ordinal conditions."""
    fb = _ab_first(env, F, i, state, cap)
    if fb.applies:
        return fb.ground
    return z_star(env, F) & lower_contour_Z(env, i, state, a)


def slhat_zstar_AB(env: Environment, F: Scc, i: int, state, a, cap: int | None = None) -> frozenset:
    return lhat_zstar_AB(env, F, i, state, a, cap) & strict_lower_contour_Z(env, i, state, a)


def uniform_value(env: Environment, F: Scc, i: int, state, at=None) -> object:
    """Expected utility of ``UNIF(F(state))`` for ``i`` evaluated at ``at`` (default ``state``)."""
    return expected_utility(env, i, state if at is None else at, unif(env.ordered(F[state])))

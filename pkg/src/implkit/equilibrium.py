"""Finite mechanisms: pure Nash equilibria, implemented correspondences and rationalizability."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import prod

from .environment import Environment, Lottery, Scc, expected_utility, lottery_from_json, lottery_to_json
from .errors import MechanismTooLarge, ParseError
from .geometry import argmin_set
from .lp import feasible_point
from .maxsets import base_set, is_i_zstar_max_set, xi_analysis, z_star

PROFILE_LIMIT = 10 ** 6


class Mechanism:
    """Per-agent message lists and an outcome function into lotteries."""

    messages: tuple

    def outcome(self, profile: tuple) -> Lottery:
        raise NotImplementedError

    def profile_count(self) -> int:
        return prod(len(M) for M in self.messages)

    def profiles(self):
        return product(*self.messages)


class TableMechanism(Mechanism):
    def __init__(self, messages, table: Mapping):
        self.messages = tuple(tuple(M) for M in messages)
        self.table = dict(table)
        missing = next((p for p in self.profiles() if p not in self.table), None)
        if missing is not None:
            raise ValueError(f"outcome function undefined at {missing}")

    def outcome(self, profile):
        return self.table[tuple(profile)]


def _guard(mech: Mechanism, limit: int):
    n = mech.profile_count()
    if n > limit:
        raise MechanismTooLarge(f"{n} message profiles exceed the limit {limit}")


def _payoffs(mech: Mechanism, env: Environment, state) -> dict:
    agents = tuple(env.agent_ids)
    cache: dict = {}
    out = {}
    for m in mech.profiles():
        y = mech.outcome(m)
        vals = cache.get(y)
        if vals is None:
            vals = tuple(expected_utility(env, i, state, y) for i in agents)
            cache[y] = vals
        out[m] = vals
    return out


def _replace(profile: tuple, k: int, msg) -> tuple:
    return profile[:k] + (msg,) + profile[k + 1:]


def pure_ne(mech: Mechanism, env: Environment, state, limit: int = PROFILE_LIMIT) -> tuple:
    """Every pure profile from which no agent gains by a unilateral deviation."""
    _guard(mech, limit)
    pay = _payoffs(mech, env, state)
    best = [dict() for _ in mech.messages]
    for m, vals in pay.items():
        for k in range(len(mech.messages)):
            key = m[:k] + m[k + 1:]
            cur = best[k].get(key)
            if cur is None or vals[k] > cur:
                best[k][key] = vals[k]
    return tuple(m for m, vals in pay.items()
                 if all(vals[k] == best[k][m[:k] + m[k + 1:]] for k in range(len(mech.messages))))


def profitable_deviation(mech: Mechanism, env: Environment, state, profile: tuple):
    """First ``(agent, message)`` that strictly improves on ``profile``, else ``None``."""
    profile = tuple(profile)
    for k, M in enumerate(mech.messages):
        i = k + 1
        here = expected_utility(env, i, state, mech.outcome(profile))
        for alt in M:
            if alt != profile[k] and expected_utility(env, i, state, mech.outcome(_replace(profile, k, alt))) > here:
                return i, alt
    return None


def is_pne(mech: Mechanism, env: Environment, state, profile: tuple) -> bool:
    return profitable_deviation(mech, env, state, profile) is None


@dataclass(frozen=True)
class NonImplementing:
    """Returned instead of a correspondence when some state has no pure equilibrium."""

    states: tuple


def implemented_correspondence(mech: Mechanism, env: Environment,
                               limit: int = PROFILE_LIMIT) -> Scc | NonImplementing:
    values, empty = {}, []
    for s in env.states:
        support = set()
        for m in pure_ne(mech, env, s, limit):
            support |= mech.outcome(m).support()
        if not support:
            empty.append(s)
        values[s] = support
    if empty:
        return NonImplementing(tuple(empty))
    return Scc(values)


# --- rationalizability -----------------------------------------------------

def _best_reply_exists(vals_own: list, vals_alt: list) -> bool:
    """Is there a belief over opponent profiles making ``own`` a best reply?

    ``vals_own[k]`` is the payoff of the candidate against opponent profile k,
    ``vals_alt[a][k]`` that of alternative ``a``.
    """
    n = len(vals_own)
    for k in range(n):
        if all(vals_own[k] >= alt[k] for alt in vals_alt):
            return True
    A_ub = [[alt[k] - vals_own[k] for k in range(n)] for alt in vals_alt]
    return feasible_point(n, A_ub, [Fraction(0)] * len(A_ub), [[1] * n], [1]) is not None


def best_replies(mech: Mechanism, env: Environment, state, surviving: tuple,
                 pay: dict | None = None) -> tuple:
    """Apply the best-reply-to-some-belief operator once.

    Candidates are drawn from the full message sets; beliefs range over
    joint distributions on the opponents' surviving profiles.
    """
    pay = _payoffs(mech, env, state) if pay is None else pay
    out = []
    for k, M in enumerate(mech.messages):
        opp = list(product(*(surviving[j] for j in range(len(surviving)) if j != k)))

        def full(msg, o):
            return o[:k] + (msg,) + o[k:]

        table = {msg: [pay[full(msg, o)][k] for o in opp] for msg in M}
        out.append(tuple(msg for msg in M
                         if _best_reply_exists(table[msg], [table[a] for a in M if a != msg])))
    return tuple(out)


@dataclass(frozen=True)
class RationalizableSet:
    sets: tuple
    rounds: tuple = field(default=())


def rationalizable_set(mech: Mechanism, env: Environment, state,
                       limit: int = PROFILE_LIMIT) -> RationalizableSet:
    """Largest fixed point of the best-reply operator, reached from the full message space."""
    _guard(mech, limit)
    pay = _payoffs(mech, env, state)
    S = tuple(tuple(M) for M in mech.messages)
    rounds = [S]
    while True:
        nxt = best_replies(mech, env, state, S, pay)
        if nxt == S:
            return RationalizableSet(S, tuple(rounds))
        S = nxt
        rounds.append(S)


def rationalizable_correspondence(mech: Mechanism, env: Environment,
                                  limit: int = PROFILE_LIMIT) -> Scc:
    values = {}
    for s in env.states:
        S = rationalizable_set(mech, env, s, limit).sets
        support = set()
        for m in product(*S):
            support |= mech.outcome(m).support()
        values[s] = support
    return Scc(values)


# --- deviation-support check -----------------------------------------------

@dataclass(frozen=True)
class DeviationCheck:
    holds: bool
    skipped: bool
    allowed: frozenset = frozenset()
    offending: tuple = ()


def deviation_support_check(mech: Mechanism, env: Environment, F: Scc, i: int, state,
                            profile: tuple, cap: int | None = None) -> DeviationCheck:
    """Unilateral deviations of ``i`` from an equilibrium stay inside the refined set.

    Applies when ``F(state)`` sits at the bottom of Z* for ``i``, the base
    set is an i-Z*-max set and the Xi family is nonempty; otherwise the check
    is skipped and reported as holding.
    """
    zs = z_star(env, F)
    B = base_set(env, F, i, state)
    if not (F[state] <= argmin_set(env, i, state, env.ordered(zs)) and is_i_zstar_max_set(env, F, B, i)):
        return DeviationCheck(True, True)
    fam = xi_analysis(env, F, i, state, cap)
    if not fam.members:
        return DeviationCheck(True, True)
    allowed = fam.union_of_intersections(F, B)
    k = i - 1
    bad = []
    for alt in mech.messages[k]:
        m = _replace(tuple(profile), k, alt)
        extra = mech.outcome(m).support() - allowed
        if extra:
            bad.append((alt, tuple(env.ordered(extra))))
    return DeviationCheck(not bad, False, allowed, tuple(bad))


# --- JSON ------------------------------------------------------------------

SEP = "|"


def mechanism_from_json(data) -> TableMechanism:
    if not isinstance(data, Mapping) or "messages" not in data or "outcomes" not in data:
        raise ParseError("a mechanism needs 'messages' and 'outcomes'")
    messages = data["messages"]
    if not isinstance(messages, list) or not all(isinstance(M, list) and M for M in messages):
        raise ParseError("must be a list of nonempty message lists", "messages")
    table = {}
    for key, lot in data["outcomes"].items():
        table[tuple(key.split(SEP))] = lottery_from_json(lot, f"outcomes.{key}")
    try:
        return TableMechanism(messages, table)
    except ValueError as exc:
        raise ParseError(str(exc), "outcomes") from None


def mechanism_to_json(env: Environment | None, mech: Mechanism, limit: int = PROFILE_LIMIT) -> dict:
    _guard(mech, limit)
    return {
        "messages": [list(M) for M in mech.messages],
        "outcomes": {SEP.join(m): lottery_to_json(env, mech.outcome(m)) for m in mech.profiles()},
    }

"""Ordinal environments and rational utility representations of them."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .environment import Environment
from .errors import AgentCountTooSmall, ExtremeOutcome, ParseError, ValidationError, VerificationFailed
from .geometry import lower_contour_Y, strict_lower_contour_Z, strict_upper_contour_Z, within_lower_contour


@dataclass(frozen=True)
class OrdinalEnvironment:
    """Weak orders given as indifference classes, best class first.

    ``orders[i-1][s]`` is the tuple of classes (tuples of outcomes) of agent
    ``i`` at the ``s``-th state.
    """

    agents: int
    states: tuple
    outcomes: tuple
    orders: tuple

    @classmethod
    def from_orders(cls, agents: int, states, outcomes, orders) -> "OrdinalEnvironment":
        states, outcomes = tuple(states), tuple(outcomes)
        rows = []
        for i in range(1, agents + 1):
            per_agent = orders.get(i, orders.get(str(i)))
            if per_agent is None:
                raise ValidationError("no orders given", f"orders.{i}")
            rows.append(tuple(
                tuple(tuple(cls_) for cls_ in per_agent[s]) if s in per_agent else None
                for s in states))
        oenv = cls(agents, states, outcomes, tuple(rows))
        oenv.validate()
        return oenv

    def classes(self, i: int, state) -> tuple:
        return self.orders[i - 1][self.states.index(state)]

    def validate(self):
        if self.agents < 3:
            raise AgentCountTooSmall(f"need at least 3 agents, got {self.agents}", "agents")
        Z = sorted(self.outcomes)
        for i in range(1, self.agents + 1):
            for s in self.states:
                cl = self.classes(i, s)
                if cl is None:
                    raise ValidationError("no order given", f"orders.{i}.{s}")
                flat = [z for c in cl for z in c]
                if sorted(flat) != Z or any(not c for c in cl):
                    raise ValidationError("indifference classes must partition the outcomes",
                                          f"orders.{i}.{s}")


def ranks(oenv: OrdinalEnvironment, i: int, state) -> dict:
    """``1 +`` the number of strictly worse indifference classes."""
    cl = oenv.classes(i, state)
    return {z: len(cl) - k for k, c in enumerate(cl) for z in c}


def rank_representation(oenv: OrdinalEnvironment) -> Environment:
    util = {i: {s: ranks(oenv, i, s) for s in oenv.states} for i in range(1, oenv.agents + 1)}
    return Environment.from_utility(oenv.agents, oenv.states, oenv.outcomes, util)


def ordinalize(env: Environment) -> OrdinalEnvironment:
    """Weak orders induced by a cardinal environment (classes keep declared order)."""
    orders = {}
    for i in env.agent_ids:
        orders[i] = {}
        for s in env.states:
            levels = sorted(set(env.u(i, s)), reverse=True)
            orders[i][s] = [[z for z in env.outcomes if env.utility(i, s, z) == v] for v in levels]
    return OrdinalEnvironment.from_orders(env.agents, env.states, env.outcomes, orders)


def represents(env: Environment, oenv: OrdinalEnvironment) -> bool:
    """Does ``u(z) >= u(z')`` hold exactly when ``z`` is weakly preferred to ``z'``?"""
    if (env.agents, env.states, env.outcomes) != (oenv.agents, oenv.states, oenv.outcomes):
        return False
    for i in env.agent_ids:
        for s in env.states:
            r = ranks(oenv, i, s)
            for z in env.outcomes:
                for w in env.outcomes:
                    if (r[z] >= r[w]) != (env.utility(i, s, z) >= env.utility(i, s, w)):
                        return False
    return True


def rho_bounds(env: Environment, i: int, state, z) -> tuple[Fraction, Fraction]:
    """``(rho_low, rho_high)`` for an outcome strictly between ``i``'s best and worst.

    ``rho_low`` measures ``z`` against the best of the strictly worse and the
    strictly better outcomes, ``rho_high`` against the worst of each. The
    share of probability on strictly better outcomes (among non-indifferent
    ones) is at most ``rho_high`` on the lower contour set of ``z``, and any
    lottery whose share is at most ``rho_low`` is in it.
    """
    SL = strict_lower_contour_Z(env, i, state, z)
    SU = strict_upper_contour_Z(env, i, state, z)
    if not SL or not SU:
        raise ExtremeOutcome(f"{z!r} is a top or bottom outcome of agent {i} at {state!r}")
    uz = env.utility(i, state, z)
    lo_vals = [env.utility(i, state, w) for w in SL]
    hi_vals = [env.utility(i, state, w) for w in SU]
    rho_low = (uz - max(lo_vals)) / (max(hi_vals) - max(lo_vals))
    rho_high = (uz - min(lo_vals)) / (min(hi_vals) - min(lo_vals))
    return rho_low, rho_high


def _interior_triples(env: Environment) -> Iterable:
    for i in env.agent_ids:
        for s in env.states:
            for z in env.outcomes:
                if strict_lower_contour_Z(env, i, s, z) and strict_upper_contour_Z(env, i, s, z):
                    yield i, s, z


def power_representation(oenv: OrdinalEnvironment, n: int) -> Environment:
    """Utilities ``r * 10**(r*n)`` built from the ranks ``r``."""
    util = {i: {s: {z: Fraction(r * 10 ** (r * n)) for z, r in ranks(oenv, i, s).items()}
                for s in oenv.states}
            for i in range(1, oenv.agents + 1)}
    return Environment.from_utility(oenv.agents, oenv.states, oenv.outcomes, util)


def inverse_power_representation(oenv: OrdinalEnvironment, n: int) -> Environment:
    """Utilities ``-1 / (r * 10**(r*n))``."""
    hat = power_representation(oenv, n)
    return hat.with_utility(lambda i, s, z, v: -1 / v)


def lower_contours_nested(inner: Environment, outer: Environment) -> tuple | None:
    """First ``(i, state, z, vertex)`` where ``L(z, inner)`` escapes ``L(z, outer)``, else ``None``."""
    for i in inner.agent_ids:
        for s in inner.states:
            for z in inner.outcomes:
                ok, v = within_lower_contour(outer, lower_contour_Y(inner, i, s, z), i, s, z)
                if not ok:
                    return i, s, z, v
    return None


@dataclass(frozen=True)
class Bracketing:
    hat: Environment
    tilde: Environment
    n_hat: int
    n_tilde: int


def bracketing_reps(oenv: OrdinalEnvironment, target: Environment, max_n: int = 64) -> Bracketing:
    """Rational representations whose lower contour sets sandwich the target's.

    Searches ``n = 1, 2, ...`` separately for each side until the ratio
    bounds separate, then confirms both containments on vertices.
    """
    if not represents(target, oenv):
        raise ValidationError("target utilities do not represent the ordinal environment")
    triples = list(_interior_triples(target))

    def search(build, ok):
        for n in range(1, max_n + 1):
            cand = build(oenv, n)
            if all(ok(cand, i, s, z) for i, s, z in triples):
                return n, cand
        raise VerificationFailed("no exponent up to max_n separates the ratio bounds")

    n_hat, hat = search(power_representation,
                        lambda c, i, s, z: rho_bounds(c, i, s, z)[1] < rho_bounds(target, i, s, z)[0])
    n_tilde, tilde = search(inverse_power_representation,
                            lambda c, i, s, z: rho_bounds(target, i, s, z)[1] < rho_bounds(c, i, s, z)[0])
    if lower_contours_nested(hat, target) is not None or lower_contours_nested(target, tilde) is not None:
        raise VerificationFailed("bracketing containment failed on a vertex")
    return Bracketing(hat, tilde, n_hat, n_tilde)


# --- JSON ------------------------------------------------------------------

def ordinal_from_json(data) -> OrdinalEnvironment:
    if not isinstance(data, Mapping):
        raise ParseError("top level must be an object")
    for key in ("agents", "states", "outcomes", "orders"):
        if key not in data:
            raise ParseError("missing field", key)
    return OrdinalEnvironment.from_orders(data["agents"], data["states"], data["outcomes"], data["orders"])


def ordinal_to_json(oenv: OrdinalEnvironment) -> dict:
    return {
        "agents": oenv.agents,
        "states": list(oenv.states),
        "outcomes": list(oenv.outcomes),
        "orders": {
            str(i): {s: [list(c) for c in oenv.classes(i, s)] for s in oenv.states}
            for i in range(1, oenv.agents + 1)
        },
    }

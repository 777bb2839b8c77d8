"""Canonical three-case mechanisms, truncated to integers ``1..K``.

A message is ``(state, k2, k3, gamma, b)``. ``gamma`` picks one outcome from
each of the reachable sets the outcome function ever consults, in a fixed
order, and ``b`` is an outcome used by the integer game.

* consensus on ``(state, 1)``: the rule's outcome at that state;
* a single dissenter ``j``: a compound lottery built from the challenge
  lottery, ``gamma_j``'s pick, the uniform lottery on the reachable set and
  a safe fallback ``y``;
* anything else: the agent with the largest ``k2`` (largest index on ties)
  gets ``b`` with probability ``1 - 1/k2``, otherwise a uniform draw.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .checks import check_lhat_scf, lhat_scf_antecedent
from .environment import Environment, Lottery, Scc, Scf, expected_utility, mix, unif
from .equilibrium import PROFILE_LIMIT, Mechanism, TableMechanism, _guard
from .errors import TruncationTooSmall, VerificationFailed
from .geometry import argmax_linear, argmin_set
from .maxsets import gamma_hat, gamma_hat_AB, is_i_max_set, is_i_theta_max_set, lhat_AB, lhat_scf, z_star

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Challenge:
    lottery: Lottery
    value: Fraction


@dataclass(frozen=True)
class EpsilonY:
    epsilon: Fraction
    y: Lottery


def build_phi(env: Environment, f: Scf) -> dict:
    """``(j, s, t) -> Challenge``: j's favourite lottery at t inside its refined set at s."""
    out = {}
    for j in env.agent_ids:
        for s in env.states:
            P = lhat_scf(env, f, j, s).polytope
            for t in env.states:
                val, arg = argmax_linear(P, env.u_map(j, t))
                out[j, s, t] = Challenge(arg, val)
    return out


def build_psi(env: Environment, F: Scc, cap: int | None = None) -> dict:
    out = {}
    for j in env.agent_ids:
        for s in env.states:
            P = lhat_AB(env, F, j, s, cap).polytope
            for t in env.states:
                val, arg = argmax_linear(P, env.u_map(j, t))
                out[j, s, t] = Challenge(arg, val)
    return out


def _verify_mixtures(P, reach, eps: Fraction, y: Lottery):
    for z in reach:
        if not P.contains(mix([(eps, Lottery.degenerate(z)), (1 - eps, y)])):
            raise VerificationFailed(f"mixing {z!r} with weight {eps} leaves the refined set")


def _epsilon_for(env, j, s, ref_value: Fraction, universe: tuple) -> EpsilonY:
    low = argmin_set(env, j, s, universe)
    y = Lottery.degenerate(next(z for z in universe if z in low))
    uy = expected_utility(env, j, s, y)
    top = max(env.utility(j, s, z) for z in universe)
    return EpsilonY(HALF * (ref_value - uy) / (top - uy), y)


def build_epsilon_y(env: Environment, f: Scf, j: int, s) -> EpsilonY:
    """Weight and fallback lottery keeping every mixture with the reachable set inside the refined set."""
    a = f[s]
    if a in argmin_set(env, j, s):
        ey = EpsilonY(HALF, Lottery.degenerate(a))
    else:
        ey = _epsilon_for(env, j, s, env.utility(j, s, a), env.outcomes)
    _verify_mixtures(lhat_scf(env, f, j, s).polytope, gamma_hat(env, f, j, s), ey.epsilon, ey.y)
    return ey


def build_epsilon_y_AB(env: Environment, F: Scc, j: int, s, cap: int | None = None) -> EpsilonY:
    zs = env.ordered(z_star(env, F))
    target = unif(env.ordered(F[s]))
    if F[s] <= argmin_set(env, j, s, zs):
        ey = EpsilonY(HALF, target)
    else:
        ey = _epsilon_for(env, j, s, expected_utility(env, j, s, target), zs)
    _verify_mixtures(lhat_AB(env, F, j, s, cap).polytope, gamma_hat_AB(env, F, j, s, cap),
                     ey.epsilon, ey.y)
    return ey


def message_label(msg: tuple) -> str:
    s, k2, k3, gamma, b = msg
    return f"{s};{k2};{k3};{','.join(gamma)};{b}"


class CanonicalMechanism(Mechanism):
    def __init__(self, env: Environment, variant: str, K: int, consensus: dict, challenge: dict,
                 eps: dict, reach: dict, integer_ground: tuple):
        if K < 2:
            raise TruncationTooSmall(f"K must be at least 2, got {K}")
        self.env = env
        self.variant = variant
        self.K = K
        self.consensus = consensus
        self.challenge = challenge
        self.eps = eps
        self.reach = reach
        self.integer_ground = integer_ground
        relevant = []
        for j in env.agent_ids:
            for s in env.states:
                R = env.ordered(reach[j, s])
                if R not in relevant:
                    relevant.append(R)
        self.relevant = tuple(relevant)
        self._slot = {R: k for k, R in enumerate(self.relevant)}
        ks = range(1, K + 1)
        one_agent = tuple(
            (s, k2, k3, g, b)
            for s in env.states for k2 in ks for k3 in ks
            for g in product(*self.relevant) for b in integer_ground)
        self.messages = tuple(one_agent for _ in env.agent_ids)
        self._uniform_reach = {key: unif(env.ordered(R)) for key, R in reach.items()}
        self._uniform_ground = unif(integer_ground)

    def truth_profile(self, s) -> tuple:
        g = tuple(R[0] for R in self.relevant)
        return tuple((s, 1, 1, g, self.integer_ground[0]) for _ in self.env.agent_ids)

    def case_of(self, profile: tuple):
        """``(1, state)``, ``(2, state, dissenter)`` or ``(3, winner)``."""
        keys = [(m[0], m[1]) for m in profile]
        if all(k == keys[0] for k in keys) and keys[0][1] == 1:
            return (1, keys[0][0])
        n = len(keys)
        for j in range(n):
            rest = keys[:j] + keys[j + 1:]
            if rest[0][1] == 1 and all(k == rest[0] for k in rest) and keys[j] != rest[0]:
                return (2, rest[0][0], j + 1)
        top = max(m[1] for m in profile)
        return (3, max(k + 1 for k, m in enumerate(profile) if m[1] == top))

    def outcome(self, profile: tuple) -> Lottery:
        case = self.case_of(profile)
        if case[0] == 1:
            return self.consensus[case[1]]
        if case[0] == 2:
            _, s, j = case
            t, k2, k3, g, _b = profile[j - 1]
            R = self.env.ordered(self.reach[j, s])
            pick = Lottery.degenerate(g[self._slot[R]])
            ey = self.eps[j, s]
            w = Fraction(1, k2)
            v = Fraction(1, k3)
            return mix([
                (1 - w, self.challenge[j, s, t].lottery),
                (w * ey.epsilon * (1 - v), pick),
                (w * ey.epsilon * v, self._uniform_reach[j, s]),
                (w * (1 - ey.epsilon), ey.y),
            ])
        j = case[1]
        _, k2, _, _, b = profile[j - 1]
        w = Fraction(1, k2)
        return mix([(1 - w, Lottery.degenerate(b)), (w, self._uniform_ground)])

    def to_table(self, limit: int = PROFILE_LIMIT) -> TableMechanism:
        _guard(self, limit)
        labels = tuple(tuple(message_label(m) for m in M) for M in self.messages)
        table = {tuple(message_label(x) for x in m): self.outcome(m) for m in self.profiles()}
        return TableMechanism(labels, table)


def build_canonical_scf(env: Environment, f: Scf, K: int = 3) -> CanonicalMechanism:
    if K < 2:
        raise TruncationTooSmall(f"K must be at least 2, got {K}")
    phi = build_phi(env, f)
    eps = {(j, s): build_epsilon_y(env, f, j, s) for j in env.agent_ids for s in env.states}
    reach = {(j, s): gamma_hat(env, f, j, s) for j in env.agent_ids for s in env.states}
    consensus = {s: Lottery.degenerate(f[s]) for s in env.states}
    return CanonicalMechanism(env, "scf", K, consensus, phi, eps, reach, env.outcomes)


def build_canonical_AB(env: Environment, F: Scc, K: int = 3, cap: int | None = None) -> CanonicalMechanism:
    if K < 2:
        raise TruncationTooSmall(f"K must be at least 2, got {K}")
    psi = build_psi(env, F, cap)
    eps = {(j, s): build_epsilon_y_AB(env, F, j, s, cap) for j in env.agent_ids for s in env.states}
    reach = {(j, s): gamma_hat_AB(env, F, j, s, cap) for j in env.agent_ids for s in env.states}
    consensus = {s: unif(env.ordered(F[s])) for s in env.states}
    return CanonicalMechanism(env, "ab", K, consensus, psi, eps, reach, env.ordered(z_star(env, F)))


# --- certificates ----------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    """Facts that make the canonical mechanism implement ``f`` for large integers.

    ``whistle_blowers[(s, t)] = (j, y)``: at true state ``t`` with everyone
    else claiming ``s``, agent ``j`` strictly prefers ``y`` (available in
    its refined set at ``s``) to ``f(s)``.
    """

    whistle_blowers: dict


@dataclass(frozen=True)
class Refutation:
    clause: str
    witness: dict


def certify_scf(env: Environment, f: Scf) -> Certificate | Refutation:
    rep = check_lhat_scf(env, f)
    if not rep.holds:
        return Refutation("C1", rep.witness)
    Z = frozenset(env.outcomes)
    for i in env.agent_ids:
        if is_i_max_set(env, Z, i):
            return Refutation("C2", {"agent": i})
    blowers = {}
    for s in env.states:
        for t in env.states:
            if f[s] == f[t]:
                continue
            ok, found = lhat_scf_antecedent(env, f, s, t)
            if ok:
                return Refutation("C3", {"theta": s, "theta_prime": t})
            blowers[s, t] = found
    for j in env.agent_ids:
        for s in env.states:
            R = gamma_hat(env, f, j, s)
            for t in env.states:
                if is_i_theta_max_set(env, R, j, t) and R != {f[t]}:
                    return Refutation("C4", {"agent": j, "theta": s, "theta_prime": t,
                                             "reachable": list(env.ordered(R))})
    return Certificate(blowers)

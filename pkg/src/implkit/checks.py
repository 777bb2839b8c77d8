"""Monotonicity conditions on choice rules, each returning a verdict and a witness.

Every pairwise condition is scanned over ordered state pairs in declared
order. The first failing pair is the reported witness; ``all_witnesses=True``
collects every failing pair instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

from .environment import Environment, Lottery, Scc, Scf, expected_utility, lottery_to_json, unif
from .errors import ThetaSetTooLarge
from .geometry import (
    argmax_set,
    lower_contour_Y,
    lower_contour_Z,
    lower_contour_Z_of_set,
    strict_lower_contour_Z,
    within_lower_contour,
)
from .lp import solve
from .maxsets import (
    is_i_max_set,
    lhat_AB,
    lhat_CD,
    lhat_scc_EF,
    lhat_scf,
    lhat_zstar_AB,
    slhat_zstar_AB,
    z_star,
)
from .ordinal import OrdinalEnvironment, rank_representation


@dataclass
class CheckReport:
    condition: str
    verdict: str
    witness: dict | None = None
    witnesses: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"


def _report(condition: str, violations: Iterator[dict], all_witnesses: bool, stats: dict,
            notes=()) -> CheckReport:
    found = []
    for w in violations:
        found.append(w)
        if not all_witnesses:
            break
    rep = CheckReport(condition, "fails" if found else "holds",
                      witness=found[0] if found else None,
                      witnesses=found if all_witnesses else [], stats=stats, notes=list(notes))
    return rep


def _pairs(env: Environment, stats: dict):
    for s in env.states:
        for t in env.states:
            stats["pairs_checked"] = stats.get("pairs_checked", 0) + 1
            yield s, t


def _all_agents_contained(env, polytope_of: Callable, t, alpha_of: Callable):
    """Check ``P_i within L_i(alpha_i, t)`` for every agent; return the first escape."""
    for i in env.agent_ids:
        ok, v = within_lower_contour(env, polytope_of(i), i, t, alpha_of(i))
        if not ok:
            return False, (i, v)
    return True, None


# --- SCF conditions --------------------------------------------------------

def maskin_antecedent(env: Environment, f: Scf, s, t):
    return _all_agents_contained(env, lambda i: lower_contour_Y(env, i, s, f[s]), t, lambda i: f[s])


def lhat_scf_antecedent(env: Environment, f: Scf, s, t):
    return _all_agents_contained(env, lambda i: lhat_scf(env, f, i, s).polytope, t, lambda i: f[s])


def check_maskin(env: Environment, f: Scf, all_witnesses: bool = False) -> CheckReport:
    """For every pair: if ``f(s)``'s lower contour sets only grow from s to t, ``f(t) = f(s)``."""
    stats = {}

    def gen():
        for s, t in _pairs(env, stats):
            if f[s] != f[t] and maskin_antecedent(env, f, s, t)[0]:
                yield {"theta": s, "theta_prime": t, "outcome": f[s]}

    return _report("maskin", gen(), all_witnesses, stats)


def check_no_veto(env: Environment, f: Scf, all_witnesses: bool = False) -> CheckReport:
    """An outcome top-ranked by at least ``I - 1`` agents must be chosen."""
    stats = {"cells_checked": 0}

    def gen():
        for s in env.states:
            tops = [argmax_set(env, i, s) for i in env.agent_ids]
            for a in env.outcomes:
                stats["cells_checked"] += 1
                if sum(a in T for T in tops) >= env.agents - 1 and f[s] != a:
                    yield {"theta": s, "outcome": a, "chosen": f[s]}

    return _report("no-veto", gen(), all_witnesses, stats)


def check_lhat_scf(env: Environment, f: Scf, all_witnesses: bool = False) -> CheckReport:
    """Maskin's condition with each agent's lower contour set replaced by its refinement."""
    stats = {}

    def gen():
        for s, t in _pairs(env, stats):
            if f[s] != f[t] and lhat_scf_antecedent(env, f, s, t)[0]:
                yield {"theta": s, "theta_prime": t, "outcome": f[s]}

    return _report("lhat-scf", gen(), all_witnesses, stats)


# --- SCC conditions --------------------------------------------------------

def check_lhat_EF(env: Environment, F: Scc, all_witnesses: bool = False) -> CheckReport:
    """Z is nobody's max set, and the refined condition holds outcome by outcome."""
    stats = {}

    def gen():
        Z = frozenset(env.outcomes)
        for i in env.agent_ids:
            if is_i_max_set(env, Z, i):
                yield {"conjunct": "z-not-i-max", "agent": i}
                if not all_witnesses:
                    return
        for s, t in _pairs(env, stats):
            for a in env.ordered(F[s]):
                if a in F[t]:
                    continue
                ok, _ = _all_agents_contained(
                    env, lambda i: lhat_scc_EF(env, F, i, s, a).polytope, t, lambda i: a)
                if ok:
                    yield {"conjunct": "monotonicity", "theta": s, "theta_prime": t, "outcome": a}

    return _report("lhat-ef", gen(), all_witnesses, stats)


def lhat_AB_antecedent(env: Environment, F: Scc, s, t, cap=None):
    target = unif(env.ordered(F[s]))

    def poly(i):
        try:
            return lhat_AB(env, F, i, s, cap).polytope
        except ThetaSetTooLarge as exc:
            raise ThetaSetTooLarge(str(exc), agent=i, state=s) from None

    return _all_agents_contained(env, poly, t, lambda i: target)


def check_lhat_AB_uniform(env: Environment, F: Scc, all_witnesses: bool = False,
                          cap: int | None = None) -> CheckReport:
    """If every refined contour set of ``UNIF(F(s))`` stays inside the contour set at t, ``F(s)`` is in ``F(t)``."""
    stats = {}

    def gen():
        for s, t in _pairs(env, stats):
            if F[s] <= F[t]:
                continue
            if lhat_AB_antecedent(env, F, s, t, cap)[0]:
                yield {"theta": s, "theta_prime": t, "missing": list(env.ordered(F[s] - F[t]))}

    return _report("lhat-ab", gen(), all_witnesses, stats)


def check_lhat_CD(env: Environment, F: Scc, all_witnesses: bool = False,
                  cap: int | None = None) -> CheckReport:
    stats = {}

    def gen():
        for s, t in _pairs(env, stats):
            for a in env.ordered(F[s]):
                if a in F[t]:
                    continue
                ok, _ = _all_agents_contained(
                    env, lambda i: lhat_CD(env, F, i, s, a, cap).polytope, t, lambda i: a)
                if ok:
                    yield {"theta": s, "theta_prime": t, "outcome": a}

    return _report("lhat-cd", gen(), all_witnesses, stats)


# --- ordinal conditions ----------------------------------------------------

def _set_clause(env, F, i, s, t) -> bool:
    if frozenset(env.outcomes) <= lower_contour_Z_of_set(env, i, t, F[s]):
        return True
    return all(lower_contour_Z(env, i, s, a) <= lower_contour_Z(env, i, t, a)
               and strict_lower_contour_Z(env, i, s, a) <= strict_lower_contour_Z(env, i, t, a)
               for a in F[s])


def _strong_clause(env, F, i, s, t, cap) -> bool:
    if z_star(env, F) <= lower_contour_Z_of_set(env, i, t, F[s]):
        return True
    return all(lhat_zstar_AB(env, F, i, s, a, cap) <= lower_contour_Z(env, i, t, a)
               and slhat_zstar_AB(env, F, i, s, a, cap) <= strict_lower_contour_Z(env, i, t, a)
               for a in F[s])


def _ordinal_scan(name, oenv: OrdinalEnvironment, F: Scc, clause, all_witnesses, notes=()):
    env = rank_representation(oenv)
    stats = {}

    def gen():
        for s, t in _pairs(env, stats):
            if F[s] <= F[t]:
                continue
            if all(clause(env, F, i, s, t) for i in env.agent_ids):
                yield {"theta": s, "theta_prime": t, "missing": list(env.ordered(F[s] - F[t]))}

    return _report(name, gen(), all_witnesses, stats, notes)


def check_set_monotonicity(oenv: OrdinalEnvironment, F: Scc, all_witnesses: bool = False) -> CheckReport:
    return _ordinal_scan("set-mono", oenv, F, _set_clause, all_witnesses)


def check_strong_set_monotonicity(oenv: OrdinalEnvironment, F: Scc, all_witnesses: bool = False,
                                  cap: int | None = None) -> CheckReport:
    """Set-monotonicity with Z* and the refined outcome sets, evaluated on ranks."""
    return _ordinal_scan("strong-set-mono", oenv, F,
                         lambda env, F_, i, s, t: _strong_clause(env, F_, i, s, t, cap),
                         all_witnesses, ["evaluated on the rank representation"])


def check_LY_uniform(oenv: OrdinalEnvironment, F: Scc, all_witnesses: bool = False) -> CheckReport:
    """Uniform lower-contour monotonicity over all representations; equivalent to set-monotonicity."""
    rep = check_set_monotonicity(oenv, F, all_witnesses)
    rep.condition = "ly-uniform"
    rep.notes.append("decided through its equivalence with set-monotonicity")
    return rep


# --- independent witness re-check ------------------------------------------

def _lp_max(env: Environment, P, i, t):
    """Maximum of agent i's utility at t over P, by exact LP rather than vertex scan."""
    ground = P.ground
    c = [env.utility(i, t, z) for z in ground]
    A_ub, b_ub = [], []
    if P.cut is not None:
        A_ub.append(list(P.cut[0]))
        b_ub.append(P.cut[1])
    res = solve(c, A_ub, b_ub, [[1] * len(ground)], [1])
    return res.value


def _contained_lp(env, P, i, t, alpha) -> bool:
    if not isinstance(alpha, Lottery):
        alpha = Lottery.degenerate(alpha)
    return _lp_max(env, P, i, t) <= expected_utility(env, i, t, alpha)


def recheck_witness(env: Environment, choice, report: CheckReport) -> bool:
    """Re-evaluate a "fails" witness through LP-based containment.

    Returns True when the witness pair satisfies the antecedent and violates
    the consequent. Only cardinal conditions are supported.
    """
    w = report.witness
    if w is None:
        return False
    cond = report.condition
    if cond == "no-veto":
        a, s = w["outcome"], w["theta"]
        tops = sum(a in argmax_set(env, i, s) for i in env.agent_ids)
        return tops >= env.agents - 1 and choice[s] != a
    if cond == "lhat-ef" and w.get("conjunct") == "z-not-i-max":
        return is_i_max_set(env, env.outcomes, w["agent"])
    s, t = w["theta"], w["theta_prime"]
    if cond in ("maskin", "lhat-scf"):
        f = choice
        make = (lambda i: lower_contour_Y(env, i, s, f[s])) if cond == "maskin" \
            else (lambda i: lhat_scf(env, f, i, s).polytope)
        return f[s] != f[t] and all(_contained_lp(env, make(i), i, t, f[s]) for i in env.agent_ids)
    if cond == "lhat-ab":
        F = choice
        target = unif(env.ordered(F[s]))
        return not F[s] <= F[t] and all(
            _contained_lp(env, lhat_AB(env, F, i, s).polytope, i, t, target) for i in env.agent_ids)
    if cond in ("lhat-ef", "lhat-cd"):
        F, a = choice, w["outcome"]
        make = (lambda i: lhat_scc_EF(env, F, i, s, a).polytope) if cond == "lhat-ef" \
            else (lambda i: lhat_CD(env, F, i, s, a).polytope)
        return a in F[s] and a not in F[t] and all(
            _contained_lp(env, make(i), i, t, a) for i in env.agent_ids)
    raise ValueError(f"no re-check path for condition {cond!r}")


def report_to_json(env: Environment, rep: CheckReport) -> dict:
    def conv(x):
        if isinstance(x, dict):
            return {k: conv(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [conv(v) for v in x]
        if isinstance(x, Lottery):
            return lottery_to_json(env, x)
        return x

    out = {"condition": rep.condition, "verdict": rep.verdict, "stats": rep.stats}
    if rep.witness is not None:
        out["witness"] = conv(rep.witness)
    if rep.witnesses:
        out["witnesses"] = conv(rep.witnesses)
    if rep.notes:
        out["notes"] = list(rep.notes)
    return out

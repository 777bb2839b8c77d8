"""Command-line interface: ``implkit <subcommand> ...``.

Every subcommand prints one JSON report. Exit status is 0 when the condition
holds or the task succeeded, 1 when the condition fails (the witness is in
the report) and 2 on malformed input or configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

from . import canonical, checks, equilibrium, maxsets, ordinal
from .environment import (
    Scc,
    Scf,
    environment_from_json,
    environment_to_json,
    format_rational,
    load_json,
    lottery_to_json,
    validate,
)
from .errors import ImplkitError, ValidationError
from .fuzz import FuzzConfig, necessity_fuzz
from .geometry import vertices

CARDINAL_SCF = {"maskin", "no-veto", "lhat-scf"}
CARDINAL_SCC = {"lhat-ef", "lhat-ab", "lhat-cd"}
ORDINAL = {"set-mono", "strong-set-mono", "ly-uniform"}


@dataclass
class RunConfig:
    command: str
    inputs: dict = field(default_factory=dict)
    xi_cap: int = maxsets.DEFAULT_XI_CAP
    K: int = 3
    count: int = 200
    seed: int = 0
    max_msgs: int = 3
    max_outcomes: int = 3
    max_states: int = 3
    out: str | None = None
    witness_mode: str = "first"
    options: dict = field(default_factory=dict)


class _Usage(Exception):
    pass


def _load_env(path, need=None):
    env, choice = environment_from_json(load_json(path))
    if need == "scf":
        if not isinstance(choice, Scf):
            raise ValidationError("this condition needs an 'scf' field", "scf")
    elif need == "scc":
        if isinstance(choice, Scf):
            choice = choice.as_scc()
        if not isinstance(choice, Scc):
            raise ValidationError("this condition needs an 'scc' (or 'scf') field", "scc")
    validate(env, choice).raise_if_failed()
    return env, choice


def _load_ordinal(path):
    data = load_json(path)
    if isinstance(data, dict) and "orders" in data:
        oenv = ordinal.ordinal_from_json(data)
        oenv.validate()
        raw = data.get("scc")
        if raw is None and "scf" in data:
            raw = {s: [z] for s, z in data["scf"].items()}
        if raw is None:
            raise ValidationError("ordinal conditions need an 'scc' field", "scc")
        F = Scc(raw)
        for s in oenv.states:
            if not F.get(s):
                raise ValidationError("missing or empty value", f"scc.{s}")
        return oenv, F
    env, F = _load_env(path, "scc")
    return ordinal.ordinalize(env), F


def _check(cfg: RunConfig):
    cond = cfg.options["condition"]
    path = cfg.inputs["in"]
    allw = cfg.witness_mode == "all"
    if cond in CARDINAL_SCF:
        env, f = _load_env(path, "scf")
        fn = {"maskin": checks.check_maskin, "no-veto": checks.check_no_veto,
              "lhat-scf": checks.check_lhat_scf}[cond]
        rep = fn(env, f, all_witnesses=allw)
    elif cond in CARDINAL_SCC:
        env, F = _load_env(path, "scc")
        if cond == "lhat-ef":
            rep = checks.check_lhat_EF(env, F, all_witnesses=allw)
        elif cond == "lhat-ab":
            rep = checks.check_lhat_AB_uniform(env, F, all_witnesses=allw, cap=cfg.xi_cap)
        else:
            rep = checks.check_lhat_CD(env, F, all_witnesses=allw, cap=cfg.xi_cap)
    elif cond in ORDINAL:
        oenv, F = _load_ordinal(path)
        env = ordinal.rank_representation(oenv)
        if cond == "set-mono":
            rep = checks.check_set_monotonicity(oenv, F, all_witnesses=allw)
        elif cond == "strong-set-mono":
            rep = checks.check_strong_set_monotonicity(oenv, F, all_witnesses=allw, cap=cfg.xi_cap)
        else:
            rep = checks.check_LY_uniform(oenv, F, all_witnesses=allw)
    else:
        raise _Usage(f"unknown condition {cond!r}")
    return checks.report_to_json(env, rep), (0 if rep.holds else 1)


def _certify(cfg: RunConfig):
    env, f = _load_env(cfg.inputs["in"], "scf")
    res = canonical.certify_scf(env, f)
    if isinstance(res, canonical.Refutation):
        w = checks.report_to_json(env, checks.CheckReport("certify", "fails", res.witness))
        return {"task": "certify", "verdict": "refuted", "clause": res.clause,
                "witness": w["witness"]}, 1
    table = [{"theta": s, "theta_prime": t, "agent": j, "lottery": lottery_to_json(env, y)}
             for (s, t), (j, y) in res.whistle_blowers.items()]
    return {"task": "certify", "verdict": "certified", "clauses": ["C1", "C2", "C3", "C4"],
            "whistle_blowers": table}, 0


def _mechanism(cfg: RunConfig):
    variant = cfg.options.get("variant", "scf")
    if variant == "scf":
        env, f = _load_env(cfg.inputs["in"], "scf")
        mech = canonical.build_canonical_scf(env, f, cfg.K)
    else:
        env, F = _load_env(cfg.inputs["in"], "scc")
        mech = canonical.build_canonical_AB(env, F, cfg.K, cap=cfg.xi_cap)
    out = equilibrium.mechanism_to_json(env, mech.to_table())
    out = {"task": "build-canonical", "variant": variant, "K": cfg.K, **out}
    return out, 0


def _enumerate_ne(cfg: RunConfig):
    env, _ = _load_env(cfg.inputs["in"])
    mech = equilibrium.mechanism_from_json(load_json(cfg.inputs["mech"]))
    if len(mech.messages) != env.agents:
        raise ValidationError("mechanism has a different number of agents", "messages")
    for m in mech.profiles():
        if not mech.outcome(m).support() <= set(env.outcomes):
            raise ValidationError("outcome outside the environment", "outcomes")
    states = [cfg.options["state"]] if cfg.options.get("state") else list(env.states)
    for s in states:
        if s not in env.states:
            raise ValidationError(f"unknown state {s!r}", "state")
    result = {s: [list(m) for m in equilibrium.pure_ne(mech, env, s)] for s in states}
    return {"task": "enumerate-ne", "equilibria": result}, 0


def _fuzz(cfg: RunConfig):
    conf = FuzzConfig(count=cfg.count, seed=cfg.seed, max_msgs=cfg.max_msgs,
                      max_outcomes=cfg.max_outcomes, max_states=cfg.max_states)
    rep = necessity_fuzz(conf).to_json()
    rep["config"]["grid"] = list(rep["config"]["grid"])
    return rep, (0 if rep["verdict"] == "holds" else 1)


def _outcome_list(env, E):
    return list(env.ordered(E))


def _inspect(cfg: RunConfig):
    what = cfg.options["what"]
    env, choice = _load_env(cfg.inputs["in"])
    F = choice.as_scc() if isinstance(choice, Scf) else choice
    i, s, a = cfg.options.get("agent"), cfg.options.get("state"), cfg.options.get("outcome")
    cap = cfg.xi_cap

    def need(*names):
        for n in names:
            if cfg.options.get(n) in (None, ""):
                raise _Usage(f"inspect {what} needs --{n}")
        if "agent" in names and i not in env.agent_ids:
            raise ValidationError(f"unknown agent {i}", "agent")
        if "state" in names and s not in env.states:
            raise ValidationError(f"unknown state {s!r}", "state")

    out = {"task": "inspect", "what": what}
    if what == "zstar":
        if F is None:
            raise ValidationError("needs an scf or scc", "scc")
        out["zstar"] = _outcome_list(env, maxsets.z_star(env, F))
    elif what == "imax":
        E = frozenset(cfg.options.get("set") or env.outcomes)
        out["set"] = _outcome_list(env, E)
        out["max_at"] = [{"agent": j, "state": t} for j in env.agent_ids for t in env.states
                         if maxsets.is_i_theta_max_set(env, E, j, t)]
    elif what in ("theta", "xi"):
        need("agent", "state")
        if F is None:
            raise ValidationError("needs an scf or scc", "scc")
        out["theta"] = list(maxsets.theta_i_theta(env, F, i, s))
        if what == "xi":
            fam = maxsets.xi_analysis(env, F, i, s, cap)
            out["xi"] = [list(K) for K in fam.members]
            out["empty_base_candidates"] = [list(K) for K in fam.empty_base]
            it = maxsets.xi_iterative_member(env, F, i, s)
            out["iterative_member"] = None if it is None else list(it)
    elif what in ("gamma-hat", "lhat"):
        need("agent", "state")
        variant = cfg.options.get("variant") or "scf"
        if variant in ("scf",) and not isinstance(choice, Scf):
            raise ValidationError("the scf variant needs an 'scf' field", "scf")
        if F is None:
            raise ValidationError("needs an scf or scc", "scc")
        if what == "gamma-hat":
            if variant == "scf":
                R = maxsets.gamma_hat(env, choice, i, s)
            elif variant == "ab":
                R = maxsets.gamma_hat_AB(env, F, i, s, cap)
            else:
                raise _Usage("gamma-hat supports --variant scf or ab")
            out["gamma_hat"] = _outcome_list(env, R)
        else:
            if variant == "scf":
                L = maxsets.lhat_scf(env, choice, i, s)
            elif variant == "ab":
                L = maxsets.lhat_AB(env, F, i, s, cap)
            elif variant in ("ef", "cd"):
                need("outcome")
                L = (maxsets.lhat_scc_EF(env, F, i, s, a) if variant == "ef"
                     else maxsets.lhat_CD(env, F, i, s, a, cap))
            else:
                raise _Usage(f"unknown variant {variant!r}")
            out["variant"] = L.variant
            out["branch"] = L.branch
            out["ground"] = list(L.polytope.ground)
            if L.polytope.cut is not None:
                c, b = L.polytope.cut
                out["cut"] = {"c": {z: format_rational(v) for z, v in zip(L.polytope.ground, c)},
                              "b": format_rational(b)}
            out["vertices"] = [lottery_to_json(env, v) for v in vertices(L.polytope)]
    else:
        raise _Usage(f"unknown inspect target {what!r}")
    return out, 0


def _ordinalize(cfg: RunConfig):
    env, choice = _load_env(cfg.inputs["in"])
    out = ordinal.ordinal_to_json(ordinal.ordinalize(env))
    if isinstance(choice, Scf):
        out["scf"] = dict(choice)
    elif isinstance(choice, Scc):
        out["scc"] = {t: _outcome_list(env, choice[t]) for t in env.states}
    return out, 0


def _read_ordinal(path):
    oenv = ordinal.ordinal_from_json(load_json(path))
    oenv.validate()
    return oenv


def _represent(cfg: RunConfig):
    if cfg.options.get("mode") == "rank":
        oenv = _read_ordinal(cfg.inputs["in"])
        env = ordinal.rank_representation(oenv)
        return {"task": "represent", "mode": "rank", "environment": environment_to_json(env)}, 0
    target, _ = _load_env(cfg.inputs["target"])
    if cfg.inputs.get("in"):
        oenv = _read_ordinal(cfg.inputs["in"])
    else:
        oenv = ordinal.ordinalize(target)
    br = ordinal.bracketing_reps(oenv, target)
    return {"task": "represent", "mode": "bracket", "n_hat": br.n_hat, "n_tilde": br.n_tilde,
            "hat": environment_to_json(br.hat), "tilde": environment_to_json(br.tilde),
            "verified": True}, 0


DISPATCH = {
    "check": _check, "certify": _certify, "mechanism": _mechanism, "enumerate-ne": _enumerate_ne,
    "fuzz": _fuzz, "inspect": _inspect, "ordinalize": _ordinalize, "represent": _represent,
}


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    try:
        report, code = DISPATCH[cfg.command](cfg)
    except (_Usage, ImplkitError, ValueError) as exc:
        kind = type(exc).__name__ if not isinstance(exc, _Usage) else "UsageError"
        report = {"error": kind, "message": str(exc)}
        loc = getattr(exc, "location", None)
        if loc is not None:
            report["location"] = loc
        print(f"implkit: {kind}: {exc}", file=sys.stderr)
        code = 2
    text = json.dumps(report, ensure_ascii=False, indent=2)
    if cfg.out and code != 2:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        stdout.write(text + "\n")
    return code


def _parser() -> argparse.ArgumentParser:
    default_cap = int(os.environ.get("IMPLKIT_XI_CAP", maxsets.DEFAULT_XI_CAP))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--xi-cap", type=int, default=default_cap)

    p = argparse.ArgumentParser(prog="implkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="decide a monotonicity condition")
    c.add_argument("condition", choices=sorted(CARDINAL_SCF | CARDINAL_SCC | ORDINAL))
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--all-witnesses", action="store_true")

    c = sub.add_parser("certify", parents=[common], help="certificate for the canonical SCF mechanism")
    c.add_argument("--in", dest="inp", required=True)

    c = sub.add_parser("mechanism", parents=[common], help="build a canonical mechanism")
    c.add_argument("action", choices=["build-canonical"])
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--variant", choices=["scf", "ab"], default="scf")
    c.add_argument("--K", type=int, default=3)

    c = sub.add_parser("enumerate-ne", parents=[common], help="pure Nash equilibria of a mechanism")
    c.add_argument("--mech", required=True)
    c.add_argument("--in", dest="inp", required=True, help="environment providing utilities")
    c.add_argument("--state")

    c = sub.add_parser("fuzz", parents=[common], help="necessity fuzz over random mechanisms")
    c.add_argument("--count", type=int, default=200)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--max-msgs", type=int, default=3)
    c.add_argument("--max-outcomes", type=int, default=3)
    c.add_argument("--max-states", type=int, default=3)

    c = sub.add_parser("inspect", parents=[common], help="show max sets, Z*, Theta, Xi, reachable and refined sets")
    c.add_argument("what", choices=["zstar", "imax", "theta", "xi", "gamma-hat", "lhat"])
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--agent", type=int)
    c.add_argument("--state")
    c.add_argument("--outcome")
    c.add_argument("--set", type=lambda t: [x for x in t.split(",") if x])
    c.add_argument("--variant", choices=["scf", "ef", "ab", "cd"])

    c = sub.add_parser("ordinalize", parents=[common], help="weak orders of a cardinal environment")
    c.add_argument("--in", dest="inp", required=True)

    c = sub.add_parser("represent", parents=[common], help="rational representations of an ordinal environment")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--rank", action="store_const", dest="mode", const="rank")
    g.add_argument("--bracket", action="store_const", dest="mode", const="bracket")
    c.add_argument("--in", dest="inp")
    c.add_argument("--target")
    return p


def config_from_args(argv=None) -> RunConfig:
    ns = _parser().parse_args(argv)
    cfg = RunConfig(command=ns.command, out=ns.out, xi_cap=ns.xi_cap)
    cfg.inputs = {k: v for k, v in (("in", getattr(ns, "inp", None)), ("mech", getattr(ns, "mech", None)),
                                    ("target", getattr(ns, "target", None))) if v}
    if ns.command == "check":
        cfg.options["condition"] = ns.condition
        cfg.witness_mode = "all" if ns.all_witnesses else "first"
    elif ns.command == "mechanism":
        cfg.options["variant"] = ns.variant
        cfg.K = ns.K
    elif ns.command == "enumerate-ne":
        cfg.options["state"] = ns.state
    elif ns.command == "fuzz":
        cfg.count, cfg.seed = ns.count, ns.seed
        cfg.max_msgs, cfg.max_outcomes, cfg.max_states = ns.max_msgs, ns.max_outcomes, ns.max_states
    elif ns.command == "inspect":
        cfg.options.update(what=ns.what, agent=ns.agent, state=ns.state, outcome=ns.outcome,
                           set=ns.set, variant=ns.variant)
    elif ns.command == "represent":
        cfg.options["mode"] = ns.mode
        if ns.mode == "rank" and not ns.inp:
            raise SystemExit(_usage_exit("represent --rank needs --in"))
        if ns.mode == "bracket" and not ns.target:
            raise SystemExit(_usage_exit("represent --bracket needs --target"))
    return cfg


def _usage_exit(msg):
    print(f"implkit: {msg}", file=sys.stderr)
    return 2


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on usage errors
        return exc.code if isinstance(exc.code, int) else 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

from fractions import Fraction

import pytest

import oracle
from implkit import Environment
from implkit.errors import ExtremeOutcome, ValidationError
from implkit.maxsets import is_i_max_set, theta_i_theta, xi_family, z_star
from implkit.ordinal import (
    OrdinalEnvironment,
    bracketing_reps,
    ordinal_from_json,
    ordinal_to_json,
    ordinalize,
    rank_representation,
    ranks,
    represents,
    rho_bounds,
)
from support import random_orders, random_scc, rng_for

F = Fraction


def chain_env(orders_by_state):
    orders = {i: dict(orders_by_state) for i in (1, 2, 3)}
    states = tuple(orders_by_state)
    outcomes = sorted({z for cl in next(iter(orders_by_state.values())) for z in cl})
    return OrdinalEnvironment.from_orders(3, states, outcomes, orders)


def test_rank_examples():
    flat = chain_env({"s": [["a", "b", "c"]]})
    assert ranks(flat, 1, "s") == {"a": 1, "b": 1, "c": 1}
    strict = chain_env({"s": [["a"], ["b"], ["c"]]})
    assert ranks(strict, 2, "s") == {"a": 3, "b": 2, "c": 1}
    tied = chain_env({"s": [["a", "b"], ["c"]]})
    assert ranks(tied, 3, "s") == {"a": 2, "b": 2, "c": 1}
    assert represents(rank_representation(tied), tied)


def test_validation():
    with pytest.raises(ValidationError):
        chain_env({"s": [["a", "b"], ["b"]]})
    with pytest.raises(ValidationError):
        OrdinalEnvironment.from_orders(3, ("s",), "ab", {1: {"s": [["a", "b"]]}})


def one_state(u):
    return Environment.from_utility(3, ("s",), tuple(u), {i: {"s": dict(u)} for i in (1, 2, 3)})


def test_rho_examples():
    env = one_state({"a": 0, "b": 1, "c": 2})
    assert rho_bounds(env, 1, "s", "b") == (F(1, 2), F(1, 2))
    env = one_state({"a": 0, "b": 1, "c": 2, "d": 4})
    assert rho_bounds(env, 1, "s", "b") == (F(1, 4), F(1, 2))
    with pytest.raises(ExtremeOutcome):
        rho_bounds(env, 1, "s", "d")
    with pytest.raises(ExtremeOutcome):
        rho_bounds(env, 1, "s", "a")


def random_target(rng, oenv):
    """Random rational utilities increasing along each order."""
    util = {}
    for i in range(1, oenv.agents + 1):
        util[i] = {}
        for s in oenv.states:
            level, vals = F(rng.randint(-5, 5)), {}
            for cl in reversed(oenv.classes(i, s)):
                for z in cl:
                    vals[z] = level
                level += F(rng.randint(1, 9), rng.randint(1, 4))
            util[i][s] = vals
    return Environment.from_utility(oenv.agents, oenv.states, oenv.outcomes, util)


@pytest.mark.parametrize("seed", range(60))
def test_rho_sandwich(seed):
    rng = rng_for("rho", seed)
    oenv, _ = random_orders(rng, n_outcomes=rng.randint(3, 4))
    env = random_target(rng, oenv)
    s, i = rng.choice(env.states), rng.randint(1, 3)
    for z in env.outcomes:
        uz = env.utility(i, s, z)
        SL = [w for w in env.outcomes if env.utility(i, s, w) < uz]
        SU = [w for w in env.outcomes if env.utility(i, s, w) > uz]
        if not SL or not SU:
            continue
        lo, hi = rho_bounds(env, i, s, z)
        for _ in range(30):
            y = {w: F(rng.randint(0, 4)) for w in env.outcomes}
            tot = sum(y.values())
            if not tot:
                continue
            y = {w: p / tot for w, p in y.items()}
            p, q = sum(y[w] for w in SU), sum(y[w] for w in SL)
            if not p + q:
                continue
            share = p / (p + q)
            member = oracle.U(env, i, s, y) <= uz
            if member:
                assert share <= hi
            if share <= lo:
                assert member


def _nested(inner, outer, i, s, z):
    return oracle.inside(outer, oracle.contour(inner, i, s, oracle.deg(z)), i, s, oracle.deg(z))


def _all_nested(inner, outer):
    return all(_nested(inner, outer, i, s, z)
               for i in inner.agent_ids for s in inner.states for z in inner.outcomes)


@pytest.mark.parametrize("seed", range(40))
def test_bracketing_contains(seed):
    rng = rng_for("bracket", seed)
    oenv, _ = random_orders(rng)
    target = random_target(rng, oenv)
    br = bracketing_reps(oenv, target)
    assert represents(br.hat, oenv) and represents(br.tilde, oenv)
    assert _all_nested(br.hat, target)
    assert _all_nested(target, br.tilde)


def test_bracketing_all_indifferent():
    oenv = chain_env({"s": [["a", "b", "c"]], "t": [["a", "b", "c"]]})
    target = random_target(rng_for("flat"), oenv)
    br = bracketing_reps(oenv, target)
    for a, b in ((br.hat, target), (target, br.hat), (target, br.tilde), (br.tilde, target)):
        assert _all_nested(a, b)


def test_bracketing_chain():
    oenv = chain_env({"s": [["a"], ["b"], ["c"]]})
    target = one_state({"a": 10, "b": 9, "c": 0})
    br = bracketing_reps(oenv, target)
    assert br.n_hat >= 1 and br.n_tilde >= 1
    assert _all_nested(br.hat, target) and _all_nested(target, br.tilde)
    # b's contour set strictly grows along the sandwich
    assert not _nested(target, br.hat, 1, "s", "b")
    assert not _nested(br.tilde, target, 1, "s", "b")


def test_bracketing_rejects_foreign_target():
    oenv = chain_env({"s": [["a"], ["b"], ["c"]]})
    with pytest.raises(ValidationError):
        bracketing_reps(oenv, one_state({"a": 0, "b": 9, "c": 10}))


@pytest.mark.parametrize("seed", range(30))
def test_max_sets_are_ordinal(seed):
    rng = rng_for("invariance", seed)
    oenv, _ = random_orders(rng, single_top=seed % 3 == 0)
    target = random_target(rng, oenv)
    br = bracketing_reps(oenv, target)
    ranked = rank_representation(oenv)
    F_ = random_scc(rng, ranked)
    for env in (br.hat, br.tilde, target):
        assert z_star(env, F_) == z_star(ranked, F_)
        for i in env.agent_ids:
            assert is_i_max_set(env, env.outcomes, i) == is_i_max_set(ranked, ranked.outcomes, i)
            for s in env.states:
                assert theta_i_theta(env, F_, i, s) == theta_i_theta(ranked, F_, i, s)
                assert xi_family(env, F_, i, s) == xi_family(ranked, F_, i, s)


def test_ordinalize_round_trip():
    oenv, _ = random_orders(rng_for("json"))
    back = ordinal_from_json(ordinal_to_json(oenv))
    assert back == oenv
    assert represents(rank_representation(oenv), ordinalize(rank_representation(oenv)))

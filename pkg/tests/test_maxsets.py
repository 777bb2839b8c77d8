from fractions import Fraction

import pytest

import oracle
from implkit import Environment, Lottery, Scc, Scf
from implkit.errors import EmptySet, NotSubsetOfZstar, ThetaSetTooLarge
from implkit.geometry import argmin_set, vertices
from implkit.maxsets import (
    base_set,
    gamma_hat,
    gamma_hat_AB,
    is_i_max_set,
    is_i_theta_max_set,
    is_i_zstar_max_set,
    is_i_zstar_theta_max_set,
    lambda_states,
    lhat_AB,
    lhat_CD,
    lhat_scc_EF,
    lhat_scf,
    lhat_zstar_AB,
    slhat_zstar_AB,
    theta_i_theta,
    xi_analysis,
    xi_family,
    xi_iterative_member,
    z_star,
)
from support import random_env, random_scc, random_scf, rng_for


def make(states, outcomes, rows):
    """``rows[s]`` is a list of per-agent utility tuples aligned with ``outcomes``."""
    util = {i: {s: dict(zip(outcomes, rows[s][i - 1])) for s in states} for i in (1, 2, 3)}
    return Environment.from_utility(3, tuple(states), tuple(outcomes), util)


ENV_C = make(["α"], "ab", {"α": [(0, 1), (1, 1), (1, 1)]})


def test_singleton_top_for_others():
    env = make(["s"], "abc", {"s": [(0, 1, 2), (5, 1, 0), (3, 3, 1)]})
    assert is_i_theta_max_set(env, {"a"}, 1, "s")
    assert not is_i_theta_max_set(env, {"b"}, 1, "s")


def test_full_set_not_max_when_someone_cares():
    env = make(["s"], "ab", {"s": [(1, 1), (1, 1), (1, 0)]})
    assert [is_i_theta_max_set(env, "ab", i, "s") for i in (1, 2, 3)] == [False, False, False]
    with pytest.raises(EmptySet):
        is_i_theta_max_set(env, set(), 1, "s")


def test_env_c_max_set():
    assert is_i_theta_max_set(ENV_C, {"a"}, 1, "α")
    assert is_i_max_set(ENV_C, {"a"}, 1)


def test_zstar_examples():
    env = make(["α", "β"], "abc", {"α": [(2, 1, 0), (0, 1, 2), (1, 2, 0)], "β": [(1, 1, 1)] * 3})
    F = Scc({"α": ["a"], "β": ["b"]})
    assert z_star(env, F) == {"a", "b"}
    env2 = make(["α", "β"], "abc", {"α": [(2, 1, 0), (0, 1, 2), (1, 2, 0)], "β": [(0, 1, 2), (2, 1, 0), (1, 2, 0)]})
    assert z_star(env2, F) == {"a", "b", "c"}


@pytest.mark.parametrize("seed", range(100))
def test_zstar_bounds_and_oracle(seed):
    rng = rng_for("zstar", seed)
    env = random_env(rng, flat_rate=0.3)
    F = random_scc(rng, env)
    zs = z_star(env, F)
    assert F.union() <= zs <= set(env.outcomes)
    assert zs == oracle.zstar(env, F)


def test_zstar_theta_max_examples():
    env = make(["α", "β"], "abc", {"α": [(2, 1, 0), (0, 1, 2), (1, 2, 0)], "β": [(1, 1, 1)] * 3})
    F = Scc({"α": ["a"], "β": ["b"]})
    zs = z_star(env, F)
    assert is_i_zstar_theta_max_set(env, F, zs, 1, "β")
    assert "β" in lambda_states(env, F, zs, 1)
    assert not is_i_zstar_theta_max_set(env, F, {"a", "b"}, 1, "α")
    with pytest.raises(NotSubsetOfZstar):
        is_i_zstar_theta_max_set(env, F, {"c"}, 1, "α")
    Fc = Scc({"α": ["a"]})
    assert z_star(ENV_C, Fc) == {"a", "b"}
    assert lambda_states(ENV_C, Fc, frozenset("a"), 1) == ("α",)


def test_theta_set_examples():
    env = make(["α", "β"], "ab", {"α": [(1, 0), (1, 1), (1, 1)], "β": [(1, 1)] * 3})
    F = Scc({"α": ["a", "b"], "β": ["a", "b"]})
    assert theta_i_theta(env, F, 1, "α") == ("β",)
    flat = make(["θ"], "ab", {"θ": [(1, 1)] * 3})
    G = Scc({"θ": ["a", "b"]})
    assert z_star(flat, G) == {"a", "b"}
    assert theta_i_theta(flat, G, 1, "θ") == ("θ",)


@pytest.mark.parametrize("seed", range(120))
def test_theta_and_xi_against_brute_force(seed):
    rng = rng_for("xi", seed)
    env = random_env(rng, flat_rate=0.25, copy_rate=0.3)
    F = random_scc(rng, env)
    for i in env.agent_ids:
        for s in env.states:
            assert list(theta_i_theta(env, F, i, s)) == oracle.theta_set(env, F, i, s)
            fam = xi_family(env, F, i, s)
            assert list(fam) == oracle.xi_brute(env, F, i, s)
            B = base_set(env, F, i, s)
            pool = set(theta_i_theta(env, F, i, s))
            for K in fam:
                E = B
                for t in K:
                    E = E & F[t]
                assert tuple(t for t in lambda_states(env, F, E, i) if t in pool) == K
            member = xi_iterative_member(env, F, i, s)
            if member is not None:
                assert member in fam


def test_xi_empty_pool_and_single_state():
    env = make(["α", "β"], "ab", {"α": [(1, 0), (0, 1), (1, 0)], "β": [(0, 1), (1, 0), (0, 1)]})
    F = Scc({"α": ["a", "b"], "β": ["b"]})
    assert theta_i_theta(env, F, 1, "α") == ()
    assert xi_family(env, F, 1, "α") == ()
    assert xi_iterative_member(env, F, 1, "α") is None
    flat = make(["θ"], "ab", {"θ": [(1, 1)] * 3})
    G = Scc({"θ": ["a", "b"]})
    assert xi_family(flat, G, 1, "θ") == (("θ",),)
    assert xi_iterative_member(flat, G, 1, "θ") == ("θ",)


def test_xi_cap():
    states = [f"s{k}" for k in range(4)]
    env = make(states, "ab", {s: [(1, 1)] * 3 for s in states})
    F = Scc({s: ["a", "b"] for s in states})
    assert len(xi_family(env, F, 1, "s0")) > 0
    with pytest.raises(ThetaSetTooLarge) as exc:
        xi_analysis(env, F, 1, "s0", cap=3)
    assert exc.value.agent == 1 and exc.value.state == "s0"


def test_xi_env_var(monkeypatch):
    states = [f"s{k}" for k in range(3)]
    env = make(states, "ab", {s: [(1, 1)] * 3 for s in states})
    F = Scc({s: ["a", "b"] for s in states})
    monkeypatch.setenv("IMPLKIT_XI_CAP", "2")
    with pytest.raises(ThetaSetTooLarge):
        xi_analysis(env, F, 2, "s1")


def test_lhat_scf_branches():
    f = Scf({"α": "a"})
    L = lhat_scf(ENV_C, f, 1, "α")
    assert L.branch == "singleton" and vertices(L.polytope) == (Lottery.degenerate("a"),)
    assert gamma_hat(ENV_C, f, 1, "α") == {"a"}
    env = make(["α", "β"], "abc", {"α": [(2, 1, 0), (0, 1, 2), (1, 2, 0)], "β": [(0, 1, 2)] * 3})
    g = Scf({"α": "a", "β": "c"})
    L = lhat_scf(env, g, 1, "α")
    assert L.branch == "contour" and set(vertices(L.polytope)) == {Lottery.degenerate(z) for z in "abc"}
    assert gamma_hat(env, g, 1, "α") == {"a", "b", "c"}


def test_lhat_scf_all_indifferent_state():
    env = make(["α", "β"], "ab", {"α": [(1, 1)] * 3, "β": [(1, 0), (0, 1), (1, 0)]})
    f = Scf({"α": "a", "β": "b"})
    # Z is 1-max at α, so the singleton branch applies
    assert lhat_scf(env, f, 1, "α").branch == "singleton"
    env2 = make(["α", "β"], "ab", {"α": [(1, 1), (1, 0), (1, 1)], "β": [(1, 0), (0, 1), (1, 0)]})
    # Z = L^Z(a) is not 1-max anywhere since agent 2 always separates a and b
    assert not is_i_max_set(env2, "ab", 1)
    L = lhat_scf(env2, f, 1, "α")
    assert L.branch == "contour"
    assert gamma_hat(env2, f, 1, "α") == {"a", "b"}


def test_gamma_hat_second_case():
    # a is 1's bottom, L^Z(a) = {a, b} is not a 1-max set
    env = make(["α", "β"], "abc", {"α": [(0, 0, 1), (0, 1, 2), (2, 1, 0)], "β": [(1, 0, 0), (1, 0, 0), (1, 0, 0)]})
    f = Scf({"α": "a", "β": "b"})
    assert a_is_bottom(env, 1, "α", "a")
    assert gamma_hat(env, f, 1, "α") == {"a", "b"}


def a_is_bottom(env, i, s, a):
    return a in argmin_set(env, i, s)


@pytest.mark.parametrize("seed", range(150))
def test_refined_sets_against_oracle(seed):
    rng = rng_for("lhat", seed)
    env = random_env(rng, flat_rate=0.2, copy_rate=0.3)
    f = random_scf(rng, env)
    F = random_scc(rng, env)
    for i in env.agent_ids:
        for s in env.states:
            L = lhat_scf(env, f, i, s)
            og, oc = oracle.lhat_scf_poly(env, f, i, s)
            assert list(L.polytope.ground) == og
            assert gamma_hat(env, f, i, s) == oracle.reachable((og, oc))
            # single-valued correspondences reproduce the SCF refinement
            E = lhat_scc_EF(env, f.as_scc(), i, s, f[s])
            assert E.polytope == L.polytope
            A = lhat_AB(env, F, i, s)
            og, oc = oracle.lhat_AB_poly(env, F, i, s)
            assert list(A.polytope.ground) == og
            if oc is None:
                assert A.polytope.cut is None
            else:
                assert A.polytope.cut[1] == oc[1]
            assert gamma_hat_AB(env, F, i, s) == oracle.reachable((og, oc))


def test_lhat_AB_second_branch():
    env = make(["α", "β"], "abc", {"α": [(2, 1, 0), (0, 1, 2), (1, 2, 0)], "β": [(0, 1, 2), (2, 1, 0), (1, 2, 0)]})
    F = Scc({"α": ["a", "b"], "β": ["c"]})
    L = lhat_AB(env, F, 1, "α")
    assert L.branch == "contour"
    assert L.polytope.ground == ("a", "b", "c")
    assert L.polytope.cut == ((2, 1, 0), Fraction(3, 2))
    assert gamma_hat_AB(env, F, 1, "α") == z_star(env, F)


def test_lhat_AB_env_c_first_branch():
    F = Scc({"α": ["a"]})
    L = lhat_AB(ENV_C, F, 1, "α")
    assert L.branch == "xi" and L.polytope.ground == ("a",)
    assert gamma_hat_AB(ENV_C, F, 1, "α") == {"a"}
    assert lhat_zstar_AB(ENV_C, F, 1, "α", "a") == {"a"}
    assert slhat_zstar_AB(ENV_C, F, 1, "α", "a") == frozenset()


def test_lhat_AB_bottom_but_base_not_max():
    # F(α) = {a} is 1's bottom but no other agent ranks {a, b} top anywhere
    env = make(["α", "β"], "abc", {"α": [(0, 0, 1), (0, 1, 2), (2, 1, 0)], "β": [(1, 0, 0), (1, 0, 2), (1, 0, 0)]})
    F = Scc({"α": ["a"], "β": ["b"]})
    assert gamma_hat_AB(env, F, 1, "α") == base_set(env, F, 1, "α") == {"a", "b"}


def test_lhat_CD_agrees_with_AB_when_F_is_bottom():
    env = make(["α", "β"], "abc", {"α": [(0, 0, 1), (1, 1, 0), (1, 1, 0)], "β": [(0, 0, 1), (1, 1, 0), (1, 1, 0)]})
    F = Scc({"α": ["a", "b"], "β": ["a", "b"]})
    for a in "ab":
        assert lhat_CD(env, F, 1, "α", a).polytope == lhat_AB(env, F, 1, "α").polytope
    assert lhat_CD(env, F, 1, "α", "c").branch == "contour"


def test_lhat_CD_differs_when_F_not_bottom():
    # F(α) = {a, c}; only a is 1's bottom, so C-D keys on a while A-B falls to the contour branch
    env = make(["α", "β"], "abc", {"α": [(0, 1, 2), (1, 0, 0), (1, 0, 0)], "β": [(0, 1, 2), (1, 0, 0), (1, 0, 0)]})
    F = Scc({"α": ["a", "c"], "β": ["a", "c"]})
    assert lhat_AB(env, F, 1, "α").branch == "contour"
    assert lhat_CD(env, F, 1, "α", "a").branch == "xi"
    assert lhat_CD(env, F, 1, "α", "c").branch == "contour"


@pytest.mark.parametrize("seed", range(80))
def test_strict_refined_never_contains_a(seed):
    rng = rng_for("slhat", seed)
    env = random_env(rng, flat_rate=0.2, copy_rate=0.3)
    F = random_scc(rng, env)
    zs = z_star(env, F)
    for i in env.agent_ids:
        for s in env.states:
            for a in F[s]:
                assert a not in slhat_zstar_AB(env, F, i, s, a)
                assert lhat_zstar_AB(env, F, i, s, a) <= zs


@pytest.mark.parametrize("seed", range(60))
def test_order_only_definitions_are_invariant(seed):
    rng = rng_for("ordinv", seed)
    env = random_env(rng, flat_rate=0.2, copy_rate=0.3)
    F = random_scc(rng, env)
    bumped = env.with_utility(lambda i, s, z, v: 3 * v ** 3 + i + 7)
    for i in env.agent_ids:
        for s in env.states:
            assert theta_i_theta(env, F, i, s) == theta_i_theta(bumped, F, i, s)
            assert xi_family(env, F, i, s) == xi_family(bumped, F, i, s)
            for E in ({"a"}, set(env.outcomes)):
                assert is_i_theta_max_set(env, E, i, s) == is_i_theta_max_set(bumped, E, i, s)
            assert is_i_zstar_max_set(env, F, zs := z_star(env, F), i) == is_i_zstar_max_set(bumped, F, zs, i)
    assert z_star(env, F) == z_star(bumped, F)


def test_iterative_chain_is_monotone():
    hits = 0
    for seed in range(300):
        rng = rng_for("chain", seed)
        env = random_env(rng, flat_rate=0.3, copy_rate=0.4)
        F = random_scc(rng, env)
        zs = z_star(env, F)
        for i in env.agent_ids:
            for s in env.states:
                B = base_set(env, F, i, s)
                if not (F[s] <= argmin_set(env, i, s, env.ordered(zs)) and is_i_zstar_max_set(env, F, B, i)):
                    continue
                pool = theta_i_theta(env, F, i, s)
                K = [t for t in pool if is_i_zstar_theta_max_set(env, F, B, i, t)]
                chain = [K]
                for _ in range(len(env.states) + 1):
                    E = B
                    for t in K:
                        E = E & F[t]
                    if not E:
                        break
                    K = [t for t in pool if is_i_zstar_theta_max_set(env, F, E, i, t)]
                    chain.append(K)
                for a, b in zip(chain, chain[1:]):
                    assert set(a) <= set(b)
                hits += 1
    assert hits > 20

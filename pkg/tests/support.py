"""Seeded generators for random test instances."""

import random
from fractions import Fraction

from implkit import Environment, Scc, Scf
from implkit.ordinal import OrdinalEnvironment

GRID = (0, 1, 2, 3)


def rng_for(*key):
    return random.Random(repr(key))


def random_env(rng, n_states=None, n_outcomes=None, agents=3, flat_rate=0.1, copy_rate=0.15):
    """Grid utilities; some states are made all-indifferent, some copy an earlier state."""
    n_states = n_states or rng.randint(2, 3)
    n_outcomes = n_outcomes or rng.randint(2, 4)
    states = tuple(f"s{k}" for k in range(1, n_states + 1))
    outcomes = tuple("abcd"[:n_outcomes])
    util = {i: {} for i in range(1, agents + 1)}
    for n, s in enumerate(states):
        roll = rng.random()
        for i in util:
            if roll < flat_rate:
                util[i][s] = dict.fromkeys(outcomes, 1)
            elif roll < flat_rate + copy_rate and n:
                util[i][s] = dict(util[i][states[rng.randrange(n)]])
            else:
                util[i][s] = {z: rng.choice(GRID) for z in outcomes}
    return Environment.from_utility(agents, states, outcomes, util)


def random_scf(rng, env):
    while True:
        f = {s: rng.choice(env.outcomes) for s in env.states}
        if len(set(f.values())) > 1:
            return Scf(f)


def random_scc(rng, env):
    vals = {}
    for s in env.states:
        k = rng.randint(1, len(env.outcomes))
        vals[s] = rng.sample(env.outcomes, k)
    return Scc(vals)


def random_lottery_on(rng, E, interior=False, den=6):
    E = list(E)
    while True:
        w = [rng.randint(1 if interior else 0, den) for _ in E]
        if sum(w):
            tot = sum(w)
            return {z: Fraction(x, tot) for z, x in zip(E, w) if x}


def random_orders(rng, n_states=None, n_outcomes=None, agents=3, single_top=False):
    n_states = n_states or rng.randint(2, 3)
    n_outcomes = n_outcomes or rng.randint(2, 4)
    states = tuple(f"s{k}" for k in range(1, n_states + 1))
    outcomes = tuple("abcd"[:n_outcomes])
    orders = {}
    for i in range(1, agents + 1):
        orders[i] = {}
        for s in states:
            perm = list(outcomes)
            rng.shuffle(perm)
            classes = [[perm[0]]]
            for z in perm[1:]:
                if rng.random() < 0.35 and not (single_top and len(classes) == 1):
                    classes[-1].append(z)
                else:
                    classes.append([z])
            orders[i][s] = classes
    return OrdinalEnvironment.from_orders(agents, states, outcomes, orders), orders


def monotone_scf_cases(tag, count, limit=5000):
    """Random (env, f) pairs passing the refined monotonicity check."""
    from implkit.checks import check_lhat_scf

    found = []
    for seed in range(limit):
        rng = rng_for(tag, seed)
        env = random_env(rng, flat_rate=0.0, copy_rate=0.0)
        f = random_scf(rng, env)
        if check_lhat_scf(env, f).holds:
            found.append((env, f))
            if len(found) == count:
                break
    return found

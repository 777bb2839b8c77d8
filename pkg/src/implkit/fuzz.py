"""Random small mechanisms checked against the necessary conditions for implementation.

Each sampled mechanism defines the correspondence it implements in pure
equilibrium (when every state has one) and the one it implements in
rationalizable messages. Implementation theory says these correspondences
must satisfy the refined monotonicity conditions; any failure is recorded
with the seed and index that reproduce it.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import product

from .checks import check_lhat_AB_uniform, check_lhat_scf
from .environment import Environment, Lottery, environment_to_json
from .equilibrium import (
    NonImplementing,
    TableMechanism,
    implemented_correspondence,
    deviation_support_check,
    mechanism_to_json,
    pure_ne,
    rationalizable_correspondence,
)
from .maxsets import z_star


@dataclass(frozen=True)
class FuzzConfig:
    count: int = 200
    seed: int = 0
    agents: int = 3
    max_msgs: int = 3
    max_outcomes: int = 3
    max_states: int = 3
    grid: tuple = (0, 1, 2, 3)
    max_denominator: int = 4
    indifferent_state_rate: float = 0.15


@dataclass
class FuzzReport:
    config: dict
    sampled: int = 0
    implementing: int = 0
    single_valued: int = 0
    rationalizable_checked: int = 0
    deviation_checks: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "task": "fuzz",
            "config": self.config,
            "sampled": self.sampled,
            "implementing": self.implementing,
            "single_valued": self.single_valued,
            "rationalizable_checked": self.rationalizable_checked,
            "deviation_checks": self.deviation_checks,
            "violations": self.violations,
            "verdict": "holds" if self.ok else "fails",
        }


def random_lottery(rng: random.Random, outcomes: tuple, max_denominator: int) -> Lottery:
    d = rng.randint(1, max_denominator)
    counts = dict.fromkeys(outcomes, 0)
    for _ in range(d):
        counts[rng.choice(outcomes)] += 1
    return Lottery({z: Fraction(c, d) for z, c in counts.items()})


def random_environment(rng: random.Random, agents: int, n_states: int, n_outcomes: int,
                       grid: tuple, indifferent_state_rate: float = 0.0) -> Environment:
    """Grid utilities; each state is made fully indifferent with the given probability."""
    states = tuple(f"s{k}" for k in range(1, n_states + 1))
    outcomes = tuple("abcdefgh"[k] for k in range(n_outcomes))
    util = {i: {} for i in range(1, agents + 1)}
    for s in states:
        flat = rng.random() < indifferent_state_rate
        for i in util:
            if flat:
                v = Fraction(rng.choice(grid))
                util[i][s] = dict.fromkeys(outcomes, v)
            else:
                util[i][s] = {z: Fraction(rng.choice(grid)) for z in outcomes}
    return Environment.from_utility(agents, states, outcomes, util)


def sample_instance(config: FuzzConfig, index: int) -> tuple[Environment, TableMechanism]:
    """The ``index``-th instance of the run with ``config.seed``; fully reproducible."""
    rng = random.Random(config.seed * 1_000_003 + index)
    n_states = rng.randint(min(2, config.max_states), config.max_states)
    n_outcomes = rng.randint(min(2, config.max_outcomes), config.max_outcomes)
    env = random_environment(rng, config.agents, n_states, n_outcomes, config.grid,
                             config.indifferent_state_rate)
    messages = [tuple(f"m{k}" for k in range(1, rng.randint(1, config.max_msgs) + 1))
                for _ in range(config.agents)]
    table = {m: random_lottery(rng, env.outcomes, config.max_denominator) for m in product(*messages)}
    return env, TableMechanism(messages, table)


def check_instance(config: FuzzConfig, index: int, report: FuzzReport):
    env, mech = sample_instance(config, index)
    report.sampled += 1

    def violation(clause, detail):
        report.violations.append({
            "seed": config.seed, "index": index, "clause": clause, "detail": detail,
            "environment": environment_to_json(env), "mechanism": mechanism_to_json(env, mech),
        })

    F = implemented_correspondence(mech, env)
    if not isinstance(F, NonImplementing):
        report.implementing += 1
        rep = check_lhat_AB_uniform(env, F)
        if not rep.holds:
            violation("lhat-ab", rep.witness)
        if F.is_single_valued():
            report.single_valued += 1
            rep = check_lhat_scf(env, F.as_scf())
            if not rep.holds:
                violation("lhat-scf", rep.witness)
        zs = z_star(env, F)
        for m in mech.profiles():
            if not mech.outcome(m).support() <= zs:
                violation("zstar-support", {"profile": list(m)})
                break
        for s in env.states:
            for m in pure_ne(mech, env, s):
                for i in env.agent_ids:
                    res = deviation_support_check(mech, env, F, i, s, m)
                    if not res.skipped:
                        report.deviation_checks += 1
                    if not res.holds:
                        violation("deviation-support", {"state": s, "agent": i, "profile": list(m)})
    R = rationalizable_correspondence(mech, env)
    report.rationalizable_checked += 1
    rep = check_lhat_AB_uniform(env, R)
    if not rep.holds:
        violation("rationalizable-lhat-ab", rep.witness)


def necessity_fuzz(config: FuzzConfig = FuzzConfig()) -> FuzzReport:
    report = FuzzReport(asdict(config))
    for index in range(config.count):
        check_instance(config, index, report)
    return report

"""Cardinal environments, choice rules and lotteries over a finite outcome set.

Every number is a :class:`fractions.Fraction`; nothing in the toolkit rounds.
Identifiers are strings, and the order in which states and outcomes are
declared is the order used for every tie-break and every report.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import (
    AgentCountTooSmall,
    EmptySccValue,
    EmptySet,
    MissingUtility,
    ParseError,
    TrivialScf,
    ValidationError,
)

ZERO = Fraction(0)
ONE = Fraction(1)


def parse_rational(value, location=None) -> Fraction:
    """Read a rational from a ``"p/q"`` string (or a plain integer)."""
    if isinstance(value, bool):
        raise ParseError(f"expected a rational, got {value!r}", location)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if not isinstance(value, str):
        raise ParseError(f"expected a 'p/q' string, got {value!r}", location)
    text = value.strip()
    num, sep, den = text.partition("/")
    try:
        p = int(num)
        q = int(den) if sep else 1
    except ValueError:
        raise ParseError(f"not a rational: {value!r}", location) from None
    if q <= 0:
        raise ParseError(f"denominator must be positive: {value!r}", location)
    return Fraction(p, q)


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


class Lottery(Mapping):
    """A probability distribution over outcomes, stored on its support.

    Probabilities must be nonnegative and sum to exactly one. Outcomes with
    zero probability are dropped, so ``support()`` is just the key set.
    """

    __slots__ = ("_p", "_hash")

    def __init__(self, probs: Mapping | Iterable):
        items = probs.items() if isinstance(probs, Mapping) else probs
        p = {}
        for z, w in items:
            w = Fraction(w)
            if w < 0:
                raise ValueError(f"negative probability {w} on {z!r}")
            if w:
                p[z] = p.get(z, ZERO) + w
        if sum(p.values(), ZERO) != 1:
            raise ValueError(f"probabilities sum to {sum(p.values(), ZERO)}, not 1")
        self._p = p
        self._hash = None

    @classmethod
    def degenerate(cls, z) -> "Lottery":
        return cls({z: ONE})

    def prob(self, z) -> Fraction:
        return self._p.get(z, ZERO)

    def support(self) -> frozenset:
        return frozenset(self._p)

    def __getitem__(self, z):
        return self._p[z]

    def __iter__(self):
        return iter(self._p)

    def __len__(self):
        return len(self._p)

    def __eq__(self, other):
        if isinstance(other, Lottery):
            return self._p == other._p
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._p.items()))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{z}:{format_rational(w)}" for z, w in sorted(self._p.items()))
        return f"Lottery({body})"


def mix(parts: Iterable[tuple[Fraction, Lottery]]) -> Lottery:
    """Flatten a compound lottery ``sum_k w_k * y_k`` into a single lottery."""
    acc: dict = {}
    for w, y in parts:
        w = Fraction(w)
        if not w:
            continue
        for z, p in y.items():
            acc[z] = acc.get(z, ZERO) + w * p
    return Lottery(acc)


def unif(E: Iterable) -> Lottery:
    """Uniform lottery on ``E``; its support is exactly ``E``."""
    E = list(dict.fromkeys(E))
    if not E:
        raise EmptySet("unif of an empty set")
    w = Fraction(1, len(E))
    return Lottery({z: w for z in E})


@dataclass(frozen=True)
class Environment:
    """Agents ``1..agents``, ordered states and outcomes, and a utility table.

    ``table[i-1][s][k]`` is agent ``i``'s utility at the ``s``-th state for
    the ``k``-th outcome, or ``None`` when the input left it out (reported by
    :func:`validate`).
    """

    agents: int
    states: tuple
    outcomes: tuple
    table: tuple
    _sidx: dict = field(init=False, repr=False, compare=False, hash=False)
    _zidx: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_sidx", {s: k for k, s in enumerate(self.states)})
        object.__setattr__(self, "_zidx", {z: k for k, z in enumerate(self.outcomes)})

    @classmethod
    def from_utility(cls, agents: int, states, outcomes, utility) -> "Environment":
        """Build from nested ``utility[i][state][outcome]`` mappings.

        Agent keys may be ints or their decimal strings. Values are anything
        :func:`parse_rational` accepts.
        """
        states = tuple(states)
        outcomes = tuple(outcomes)
        rows = []
        for i in range(1, agents + 1):
            per_agent = utility.get(i, utility.get(str(i), {})) if isinstance(utility, Mapping) else {}
            agent_rows = []
            for s in states:
                per_state = per_agent.get(s, {})
                agent_rows.append(tuple(
                    None if z not in per_state
                    else parse_rational(per_state[z], f"utility.{i}.{s}.{z}")
                    for z in outcomes
                ))
            rows.append(tuple(agent_rows))
        return cls(agents, states, outcomes, tuple(rows))

    @property
    def agent_ids(self) -> range:
        return range(1, self.agents + 1)

    def u(self, i: int, state) -> tuple:
        """Utility vector of agent ``i`` at ``state`` in outcome order."""
        return self.table[i - 1][self._sidx[state]]

    def utility(self, i: int, state, z) -> Fraction:
        return self.table[i - 1][self._sidx[state]][self._zidx[z]]

    def u_map(self, i: int, state) -> dict:
        return dict(zip(self.outcomes, self.u(i, state)))

    def outcome_index(self, z) -> int:
        return self._zidx[z]

    def state_index(self, s) -> int:
        return self._sidx[s]

    def ordered(self, E: Iterable) -> tuple:
        """Outcomes of ``E`` in declared order."""
        return tuple(sorted(set(E), key=self._zidx.__getitem__))

    def ordered_states(self, S: Iterable) -> tuple:
        return tuple(sorted(set(S), key=self._sidx.__getitem__))

    def with_utility(self, fn) -> "Environment":
        """Copy with every utility replaced by ``fn(i, state, z, value)``."""
        rows = tuple(
            tuple(
                tuple(fn(i, s, z, self.table[i - 1][si][zi]) for zi, z in enumerate(self.outcomes))
                for si, s in enumerate(self.states)
            )
            for i in self.agent_ids
        )
        return Environment(self.agents, self.states, self.outcomes, rows)


class _FrozenMap(Mapping):
    __slots__ = ("_m", "_hash")

    def __init__(self, mapping):
        self._m = dict(mapping)
        self._hash = None

    def __getitem__(self, k):
        return self._m[k]

    def __iter__(self):
        return iter(self._m)

    def __len__(self):
        return len(self._m)

    def __eq__(self, other):
        if type(other) is type(self):
            return self._m == other._m
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((type(self).__name__, frozenset(self._m.items())))
        return self._hash

    def __repr__(self):
        return f"{type(self).__name__}({self._m!r})"


class Scf(_FrozenMap):
    """Social choice function: state -> outcome."""

    __slots__ = ()

    def image(self) -> frozenset:
        return frozenset(self._m.values())

    def as_scc(self) -> "Scc":
        return Scc({s: {z} for s, z in self._m.items()})


class Scc(_FrozenMap):
    """Social choice correspondence: state -> nonempty frozenset of outcomes."""

    __slots__ = ()

    def __init__(self, mapping):
        super().__init__({s: frozenset(v) for s, v in dict(mapping).items()})

    def union(self) -> frozenset:
        out = frozenset()
        for v in self._m.values():
            out |= v
        return out

    def is_single_valued(self) -> bool:
        return all(len(v) == 1 for v in self._m.values())

    def as_scf(self) -> Scf:
        if not self.is_single_valued():
            raise ValueError("correspondence is not single-valued")
        return Scf({s: next(iter(v)) for s, v in self._m.items()})


def expected_utility(env: Environment, i: int, state, y: Mapping) -> Fraction:
    """Exact expected utility ``sum_z y_z u_i^state(z)``."""
    return sum((Fraction(p) * env.utility(i, state, z) for z, p in y.items()), ZERO)


@dataclass(frozen=True)
class ValidationResult:
    error: ValidationError | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def raise_if_failed(self):
        if self.error is not None:
            raise self.error


def _first_violation(env: Environment, choice) -> ValidationError | None:
    if env.agents < 3:
        return AgentCountTooSmall(f"need at least 3 agents, got {env.agents}", "agents")
    if not env.states:
        return ValidationError("state set is empty", "states")
    if not env.outcomes:
        return ValidationError("outcome set is empty", "outcomes")
    if len(set(env.states)) != len(env.states):
        return ValidationError("duplicate state identifier", "states")
    if len(set(env.outcomes)) != len(env.outcomes):
        return ValidationError("duplicate outcome identifier", "outcomes")
    for i in env.agent_ids:
        for s in env.states:
            for z, v in zip(env.outcomes, env.u(i, s)):
                if v is None:
                    return MissingUtility("utility not given", f"utility.{i}.{s}.{z}")
    if choice is None:
        return None
    name = "scf" if isinstance(choice, Scf) else "scc"
    for s in env.states:
        if s not in choice:
            return ValidationError("state has no value", f"{name}.{s}")
    for s in choice:
        if s not in env._sidx:
            return ValidationError("unknown state", f"{name}.{s}")
    if isinstance(choice, Scf):
        for s in env.states:
            if choice[s] not in env._zidx:
                return ValidationError(f"unknown outcome {choice[s]!r}", f"scf.{s}")
        if len(choice.image()) < 2:
            return TrivialScf("the SCF takes a single value on every state", "scf")
    else:
        for s in env.states:
            if not choice[s]:
                return EmptySccValue("empty value", f"scc.{s}")
            for z in choice[s]:
                if z not in env._zidx:
                    return ValidationError(f"unknown outcome {z!r}", f"scc.{s}")
    return None


def validate(env: Environment, choice: Scf | Scc | None = None) -> ValidationResult:
    """Check the model invariants; report the first violation with its location."""
    return ValidationResult(_first_violation(env, choice))


# --- JSON ------------------------------------------------------------------

def lottery_to_json(env: Environment | None, y: Lottery) -> dict:
    keys = env.ordered(y.support()) if env is not None else sorted(y.support())
    return {z: format_rational(y[z]) for z in keys}


def lottery_from_json(data, location="lottery") -> Lottery:
    if not isinstance(data, Mapping):
        raise ParseError("a lottery must be an object of 'p/q' strings", location)
    try:
        return Lottery({z: parse_rational(w, f"{location}.{z}") for z, w in data.items()})
    except ValueError as exc:
        raise ParseError(str(exc), location) from None


def environment_from_json(data) -> tuple[Environment, Scf | Scc | None]:
    """Parse the environment file format; returns ``(env, choice)``."""
    if not isinstance(data, Mapping):
        raise ParseError("top level must be an object")
    for key in ("agents", "states", "outcomes", "utility"):
        if key not in data:
            raise ParseError("missing field", key)
    agents = data["agents"]
    if not isinstance(agents, int) or isinstance(agents, bool):
        raise ParseError("must be an integer", "agents")
    states, outcomes = data["states"], data["outcomes"]
    for name, seq in (("states", states), ("outcomes", outcomes)):
        if not isinstance(seq, list) or not all(isinstance(x, str) for x in seq):
            raise ParseError("must be a list of strings", name)
    utility = data["utility"]
    if not isinstance(utility, Mapping):
        raise ParseError("must be an object", "utility")
    env = Environment.from_utility(agents, states, outcomes, utility)
    choice = None
    if "scf" in data and "scc" in data:
        raise ParseError("give either scf or scc, not both")
    if "scf" in data:
        if not isinstance(data["scf"], Mapping):
            raise ParseError("must be an object", "scf")
        choice = Scf(data["scf"])
    elif "scc" in data:
        raw = data["scc"]
        if not isinstance(raw, Mapping) or not all(isinstance(v, list) for v in raw.values()):
            raise ParseError("must map states to lists of outcomes", "scc")
        choice = Scc(raw)
    return env, choice


def environment_to_json(env: Environment, choice: Scf | Scc | None = None) -> dict:
    out = {
        "agents": env.agents,
        "states": list(env.states),
        "outcomes": list(env.outcomes),
        "utility": {
            str(i): {
                s: {z: format_rational(v) for z, v in zip(env.outcomes, env.u(i, s))}
                for s in env.states
            }
            for i in env.agent_ids
        },
    }
    if isinstance(choice, Scf):
        out["scf"] = {s: choice[s] for s in env.states}
    elif isinstance(choice, Scc):
        out["scc"] = {s: list(env.ordered(choice[s])) for s in env.states}
    return out


def load_json(path) -> object:
    """Read a JSON file, turning decode errors into :class:`ParseError` with line info."""
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
    except OSError as exc:
        raise ParseError(exc.strerror or str(exc), str(path)) from None

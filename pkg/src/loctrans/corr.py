"""Behaviors, Bell expressions, validity checks and stock objects."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .ratlin import ONE, ZERO, Number, RatVector, as_rational, dot, format_rational
from .scenario import PartyCard, Scenario


def _coerce(scenario: Scenario, coeffs: Iterable[Number]) -> RatVector:
    vals = tuple(as_rational(c) for c in coeffs)
    if len(vals) != scenario.dim:
        raise ValueError(f"expected {scenario.dim} coefficients for {scenario}, got {len(vals)}")
    return vals


@dataclass(frozen=True)
class Behavior:
    """Coefficient vector of a (possibly improper) joint conditional distribution."""

    scenario: Scenario
    coeffs: RatVector

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _coerce(self.scenario, self.coeffs))

    def __add__(self, other: "Behavior") -> "Behavior":
        _same_layout(self.scenario, other.scenario)
        return Behavior(self.scenario, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Behavior") -> "Behavior":
        _same_layout(self.scenario, other.scenario)
        return Behavior(self.scenario, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, s: Number) -> "Behavior":
        s = as_rational(s)
        return Behavior(self.scenario, tuple(s * a for a in self.coeffs))

    __rmul__ = __mul__

    def __getitem__(self, indices: Sequence[tuple[int, int]]) -> Fraction:
        return self.coeffs[self.scenario.tensor_index(indices)]

    def __str__(self) -> str:
        return "[" + ", ".join(format_rational(c) for c in self.coeffs) + "]"


@dataclass(frozen=True)
class BellExpression:
    """Linear form on behaviors, optionally paired with an upper bound."""

    scenario: Scenario
    coeffs: RatVector
    bound: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _coerce(self.scenario, self.coeffs))
        if self.bound is not None:
            object.__setattr__(self, "bound", as_rational(self.bound))

    def __add__(self, other: "BellExpression") -> "BellExpression":
        _same_layout(self.scenario, other.scenario)
        bound = None
        if self.bound is not None and other.bound is not None:
            bound = self.bound + other.bound
        return BellExpression(
            self.scenario, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), bound
        )

    def __mul__(self, s: Number) -> "BellExpression":
        s = as_rational(s)
        bound = None if self.bound is None else s * self.bound
        return BellExpression(self.scenario, tuple(s * a for a in self.coeffs), bound)

    __rmul__ = __mul__

    def with_bound(self, bound: Number | None) -> "BellExpression":
        return BellExpression(self.scenario, self.coeffs, bound)

    def __getitem__(self, indices: Sequence[tuple[int, int]]) -> Fraction:
        return self.coeffs[self.scenario.tensor_index(indices)]


def _same_layout(s1: Scenario, s2: Scenario) -> None:
    if s1.parties != s2.parties:
        raise ValueError(f"scenario mismatch: {s1} vs {s2}")


def behavior_from_function(scenario: Scenario, prob: Callable[..., Number]) -> Behavior:
    """Build a behavior from ``prob(outputs, inputs)`` with 1-based tuples."""
    coeffs = []
    for idx in scenario.indices():
        outs = tuple(a for a, _ in idx)
        ins = tuple(x for _, x in idx)
        coeffs.append(prob(outs, ins))
    return Behavior(scenario, coeffs)


def expression_from_function(
    scenario: Scenario, coef: Callable[..., Number], bound: Number | None = None
) -> BellExpression:
    coeffs = []
    for idx in scenario.indices():
        outs = tuple(a for a, _ in idx)
        ins = tuple(x for _, x in idx)
        coeffs.append(coef(outs, ins))
    return BellExpression(scenario, coeffs, bound)


def uniform_behavior(scenario: Scenario) -> Behavior:
    return behavior_from_function(
        scenario,
        lambda outs, ins: _prod_frac(Fraction(1, c.A(x)) for c, x in zip(scenario.parties, ins)),
    )


def _prod_frac(values: Iterable[Fraction]) -> Fraction:
    out = ONE
    for v in values:
        out *= v
    return out


def is_nonnegative(P: Behavior) -> bool:
    return all(c >= 0 for c in P.coeffs)


def block_sums(P: Behavior) -> dict[tuple[int, ...], Fraction]:
    """Sum of coefficients for every joint input tuple."""
    sums: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
    for idx, c in zip(P.scenario.indices(), P.coeffs):
        sums[tuple(x for _, x in idx)] += c
    return dict(sums)


def is_normalized(P: Behavior) -> bool:
    return all(s == 1 for s in block_sums(P).values())


@dataclass(frozen=True)
class NSViolation:
    """A nonsignaling constraint that fails.

    The marginal of ``targets`` at outputs ``outputs`` differs between the
    joint input tuples ``inputs`` and ``other_inputs``, which differ only
    on ``sources``.
    """

    sources: tuple[int, ...]
    targets: tuple[int, ...]
    outputs: tuple[int, ...]
    inputs: tuple[int, ...]
    other_inputs: tuple[int, ...]
    values: tuple[Fraction, Fraction]


def nonsignaling_pairs(scenario: Scenario, exhaustive: bool | None = None) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Source/target party sets whose constraints are checked.

    With ``exhaustive`` unset, every disjoint pair of party subsets is used
    when the scenario allows some signaling, and single sources against all
    remaining parties otherwise (those imply the rest).
    """
    n = scenario.n
    E = scenario.signaling
    if exhaustive is None:
        exhaustive = not scenario.is_nonsignaling()
    if not exhaustive:
        out = []
        for s in range(n):
            targets = tuple(t for t in range(n) if t != s)
            if targets:
                out.append(((s,), targets))
        return out
    out = []
    parties = range(n)
    for ks in range(1, n):
        for S in combinations(parties, ks):
            rest = [t for t in parties if t not in S]
            for kt in range(1, len(rest) + 1):
                for T in combinations(rest, kt):
                    if all((s, t) not in E for s in S for t in T):
                        out.append((S, T))
    return out


def check_nonsignaling(P: Behavior, exhaustive: bool | None = None) -> list[NSViolation]:
    """Violated nonsignaling constraints of ``P`` for its scenario.

    Raises ``ValueError`` for a non-normalized behavior.
    """
    if not is_normalized(P):
        raise ValueError("nonsignaling constraints are only checked on normalized behaviors")
    scenario = P.scenario
    entries = [
        (tuple(a for a, _ in idx), tuple(x for _, x in idx), c)
        for idx, c in zip(scenario.indices(), P.coeffs)
    ]
    violations = []
    for S, T in nonsignaling_pairs(scenario, exhaustive):
        marg: dict = defaultdict(Fraction)
        for outs, ins, c in entries:
            if c:
                marg[(ins, tuple(outs[t] for t in T))] += c
        target_outputs = {}
        for ins in scenario.input_tuples():
            target_outputs[ins] = list(
                product(*(range(1, scenario.parties[t].A(ins[t]) + 1) for t in T))
            )
        for ins in scenario.input_tuples():
            if any(ins[s] != 1 for s in S):
                continue
            # compare every source-input assignment against the all-first one
            for alt in product(*(range(1, scenario.parties[s].X + 1) for s in S)):
                if all(v == 1 for v in alt):
                    continue
                other = list(ins)
                for s, v in zip(S, alt):
                    other[s] = v
                other = tuple(other)
                for outs in target_outputs[ins]:
                    p0 = marg.get((ins, outs), ZERO)
                    p1 = marg.get((other, outs), ZERO)
                    if p0 != p1:
                        violations.append(NSViolation(S, T, outs, ins, other, (p0, p1)))
    return violations


@dataclass(frozen=True)
class DetBehaviorSpec:
    """Deterministic response of each party.

    ``responses[k]`` maps the tuple of inputs of ``scenario.signalers_to(k)``
    (in party order) to party k's output.
    """

    scenario: Scenario
    responses: tuple

    def __post_init__(self):
        sc = self.scenario
        if len(self.responses) != sc.n:
            raise ValueError(f"expected {sc.n} response tables, got {len(self.responses)}")
        frozen = []
        for k, table in enumerate(self.responses):
            src = sc.signalers_to(k)
            domain = set(product(*(range(1, sc.parties[s].X + 1) for s in src)))
            table = dict(table)
            if set(table) != domain:
                raise ValueError(f"party {k}: response domain must be inputs of parties {src}")
            own = src.index(k)
            for key, a in table.items():
                if not 1 <= a <= sc.parties[k].A(key[own]):
                    raise ValueError(f"party {k}: output {a} out of range for input {key[own]}")
            frozen.append(tuple(sorted(table.items())))
        object.__setattr__(self, "responses", tuple(frozen))

    @classmethod
    def from_functions(cls, scenario: Scenario, funcs: Sequence[Callable[..., int]]) -> "DetBehaviorSpec":
        """Each function receives the signaler inputs as positional arguments."""
        tables = []
        for k, f in enumerate(funcs):
            src = scenario.signalers_to(k)
            dom = product(*(range(1, scenario.parties[s].X + 1) for s in src))
            tables.append({key: int(f(*key)) for key in dom})
        return cls(scenario, tuple(tables))


def deterministic_behavior(spec: DetBehaviorSpec) -> Behavior:
    sc = spec.scenario
    tables = [dict(t) for t in spec.responses]
    srcs = [sc.signalers_to(k) for k in range(sc.n)]
    coeffs = []
    for idx in sc.indices():
        ins = tuple(x for _, x in idx)
        hit = all(
            tables[k][tuple(ins[s] for s in srcs[k])] == idx[k][0] for k in range(sc.n)
        )
        coeffs.append(ONE if hit else ZERO)
    return Behavior(sc, coeffs)


def enumerate_deterministic(scenario: Scenario) -> Iterator[Behavior]:
    """All deterministic behaviors allowed by the scenario's signaling set."""
    per_party = []
    for k in range(scenario.n):
        src = scenario.signalers_to(k)
        own = src.index(k)
        dom = list(product(*(range(1, scenario.parties[s].X + 1) for s in src)))
        choices = [range(1, scenario.parties[k].A(key[own]) + 1) for key in dom]
        per_party.append([dict(zip(dom, outs)) for outs in product(*choices)])
    for tables in product(*per_party):
        yield deterministic_behavior(DetBehaviorSpec(scenario, tables))


def evaluate(phi: BellExpression, P: Behavior) -> Fraction:
    _same_layout(phi.scenario, P.scenario)
    return dot(phi.coeffs, P.coeffs)


# stock objects ------------------------------------------------------------

CHSH_SCENARIO = Scenario.nonsignaling((2, 2), (2, 2))


def pr_box() -> Behavior:
    """P(ab|xy) = 1/2 when a⊕b = (x−1)(y−1) with 0-based bits."""
    return behavior_from_function(
        CHSH_SCENARIO,
        lambda o, i: Fraction(1, 2) if ((o[0] - 1) ^ (o[1] - 1)) == (i[0] - 1) * (i[1] - 1) else 0,
    )


def chsh() -> BellExpression:
    """Σ (−1)^{(x−1)(y−1)} ⟨A_x B_y⟩ with bound 2."""
    return expression_from_function(
        CHSH_SCENARIO,
        lambda o, i: (-1) ** ((i[0] - 1) * (i[1] - 1)) * (1 if o[0] == o[1] else -1),
        2,
    )


def causal_scenario(bob_outputs: int = 2) -> Scenario:
    """Two parties with binary inputs that may signal in both directions."""
    return Scenario.fully_signaling((2, 2), (bob_outputs, bob_outputs))


def gyni() -> BellExpression:
    """Each party guesses the other's input: coefficient 1 iff a=y and b=x."""
    return expression_from_function(
        causal_scenario(2),
        lambda o, i: 1 if (o[0] == i[1] and o[1] == i[0]) else 0,
        2,
    )


def _guess_maps(k: int) -> list[tuple[int, ...]]:
    return [g for g in product((0, 1), repeat=k) if len(set(g)) > 1]


def gyni_family(bob_outputs: int = 3) -> list[BellExpression]:
    """Guessing facets with Alice's guess y = c⊕dx⊕a and Bob's guess map per y.

    Labels inside the rule are 0-based bits. Bound 2.
    """
    sc = causal_scenario(bob_outputs)
    out = []
    maps = _guess_maps(bob_outputs)
    for c, d in product((0, 1), repeat=2):
        for g0, g1 in product(maps, repeat=2):
            g = (g0, g1)

            def coef(o, i, c=c, d=d, g=g):
                a, b, x, y = o[0] - 1, o[1] - 1, i[0] - 1, i[1] - 1
                return 1 if (y == c ^ (d * x) ^ a and x == g[y][b]) else 0

            out.append(expression_from_function(sc, coef, 2))
    return out


def lgyni_family(bob_outputs: int = 3) -> list[BellExpression]:
    """Lazy guessing facets: Alice guesses only when x≠c, Bob only when y≠e.

    Labels inside the rule are 0-based bits. Bound 3.
    """
    sc = causal_scenario(bob_outputs)
    out = []
    for c, d, e in product((0, 1), repeat=3):
        for g in _guess_maps(bob_outputs):

            def coef(o, i, c=c, d=d, e=e, g=g):
                a, b, x, y = o[0] - 1, o[1] - 1, i[0] - 1, i[1] - 1
                alice_ok = (x ^ c) * (a ^ d ^ y) == 0
                bob_ok = y == e or x == g[b]
                return 1 if (alice_ok and bob_ok) else 0

            out.append(expression_from_function(sc, coef, 3))
    return out


def stock(name: str):
    """Named objects: ``PR``, ``CHSH``, ``GYNI``, ``GYNI-family``, ``LGYNI-family``."""
    table: Mapping[str, Callable] = {
        "PR": pr_box,
        "CHSH": chsh,
        "GYNI": gyni,
        "GYNI-family": gyni_family,
        "LGYNI-family": lgyni_family,
    }
    try:
        return table[name]()
    except KeyError:
        raise KeyError(f"unknown stock object {name!r}; choose from {sorted(table)}") from None

"""Party cardinalities, signaling directions and index arithmetic.

Inputs and outputs are 1-based at the API surface. Flat positions are
0-based. A party's coefficients are ordered by incrementing the output
first and then the input; joint coefficients follow the Kronecker order
of the parties.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Sequence


@dataclass(frozen=True)
class PartyCard:
    """Number of outputs for each input of one party."""

    outputs: tuple[int, ...]

    def __init__(self, outputs: Iterable[int]):
        outs = tuple(int(a) for a in outputs)
        if not outs:
            raise ValueError("a party needs at least one input")
        if any(a < 1 for a in outs):
            raise ValueError(f"output counts must be >= 1, got {outs}")
        object.__setattr__(self, "outputs", outs)

    @property
    def X(self) -> int:
        return len(self.outputs)

    @property
    def dim(self) -> int:
        return sum(self.outputs)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        offs, acc = [], 0
        for a in self.outputs:
            offs.append(acc)
            acc += a
        return tuple(offs)

    def A(self, x: int) -> int:
        return self.outputs[x - 1]

    @property
    def has_single_output_inputs(self) -> bool:
        """Inputs with one output make some algebraically distinct maps act alike on behaviors."""
        return 1 in self.outputs

    def flatten(self, a: int, x: int) -> int:
        return flatten(self, a, x)

    def unflatten(self, pos: int) -> tuple[int, int]:
        if not 0 <= pos < self.dim:
            raise IndexError(f"position {pos} out of range for {self}")
        for x in range(self.X, 0, -1):
            if pos >= self.offsets[x - 1]:
                return pos - self.offsets[x - 1] + 1, x
        raise AssertionError("unreachable")

    def indices(self) -> Iterator[tuple[int, int]]:
        """All (a, x) pairs in flat order."""
        for x, ax in enumerate(self.outputs, start=1):
            for a in range(1, ax + 1):
                yield a, x

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.outputs)) + ")"


def flatten(card: PartyCard, a: int, x: int) -> int:
    if not 1 <= x <= card.X:
        raise IndexError(f"input {x} out of range 1..{card.X}")
    if not 1 <= a <= card.outputs[x - 1]:
        raise IndexError(f"output {a} out of range 1..{card.outputs[x - 1]} for input {x}")
    return card.offsets[x - 1] + a - 1


@dataclass(frozen=True)
class Scenario:
    """Ordered parties plus the set E of allowed signaling directions.

    ``(s, t)`` in ``signaling`` means party s may signal to party t.
    Party indices are 0-based. The diagonal is always included.
    """

    parties: tuple[PartyCard, ...]
    signaling: frozenset = field(default=frozenset())

    def __init__(self, parties: Iterable, signaling: Iterable[tuple[int, int]] = ()):
        cards = tuple(p if isinstance(p, PartyCard) else PartyCard(p) for p in parties)
        if not cards:
            raise ValueError("a scenario needs at least one party")
        n = len(cards)
        edges = set()
        for s, t in signaling:
            s, t = int(s), int(t)
            if not (0 <= s < n and 0 <= t < n):
                raise ValueError(f"signaling pair ({s},{t}) references a missing party")
            edges.add((s, t))
        edges.update((s, s) for s in range(n))
        object.__setattr__(self, "parties", cards)
        object.__setattr__(self, "signaling", frozenset(edges))

    @classmethod
    def nonsignaling(cls, *cards) -> "Scenario":
        return cls(cards)

    @classmethod
    def fully_signaling(cls, *cards) -> "Scenario":
        n = len(cards)
        return cls(cards, [(s, t) for s in range(n) for t in range(n)])

    @property
    def n(self) -> int:
        return len(self.parties)

    @cached_property
    def dims(self) -> tuple[int, ...]:
        return tuple(c.dim for c in self.parties)

    @cached_property
    def dim(self) -> int:
        d = 1
        for k in self.dims:
            d *= k
        return d

    def signaling_allowed(self, source: int, target: int) -> bool:
        return signaling_allowed(self, source, target)

    def signalers_to(self, party: int) -> tuple[int, ...]:
        """Parties whose inputs party ``party`` may depend on (including itself)."""
        return tuple(s for s in range(self.n) if (s, party) in self.signaling)

    def is_nonsignaling(self) -> bool:
        return all(s == t for s, t in self.signaling)

    def tensor_index(self, indices: Sequence[tuple[int, int]]) -> int:
        return tensor_index(self, indices)

    def unflatten(self, pos: int) -> tuple[tuple[int, int], ...]:
        if not 0 <= pos < self.dim:
            raise IndexError(f"position {pos} out of range")
        flats = []
        for d in reversed(self.dims):
            pos, r = divmod(pos, d)
            flats.append(r)
        flats.reverse()
        return tuple(c.unflatten(f) for c, f in zip(self.parties, flats))

    def indices(self) -> Iterator[tuple[tuple[int, int], ...]]:
        """All joint ((a,x), (b,y), ...) tuples in coefficient order."""
        return product(*(list(c.indices()) for c in self.parties))

    def input_tuples(self) -> Iterator[tuple[int, ...]]:
        return product(*(range(1, c.X + 1) for c in self.parties))

    def with_parties(self, cards: Sequence[PartyCard]) -> "Scenario":
        """Same signaling structure with replaced cardinalities."""
        if len(cards) != self.n:
            raise ValueError("party count mismatch")
        return Scenario(cards, self.signaling)

    def __str__(self) -> str:
        parts = "x".join(str(c) for c in self.parties)
        extra = sorted((s, t) for s, t in self.signaling if s != t)
        return parts if not extra else f"{parts} E+{extra}"


def signaling_allowed(scenario: Scenario, source: int, target: int) -> bool:
    n = scenario.n
    if not (0 <= source < n and 0 <= target < n):
        raise IndexError("party index out of range")
    return (source, target) in scenario.signaling


def tensor_index(scenario: Scenario, indices: Sequence[tuple[int, int]]) -> int:
    if len(indices) != scenario.n:
        raise ValueError(f"expected {scenario.n} (a, x) pairs, got {len(indices)}")
    pos = 0
    for card, (a, x) in zip(scenario.parties, indices):
        pos = pos * card.dim + flatten(card, a, x)
    return pos

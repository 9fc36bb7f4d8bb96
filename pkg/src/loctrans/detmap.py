"""Deterministic local maps (ξ, ᾱ) and their monoid structure.

A map from a source party with cardinalities (A_1..A_X) to a target party
with (A'_1..A'_X') picks a source input ξ(x') for every target input x'
and post-processes that input's output through α_{x'}.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product
from math import prod
from typing import Iterator, Sequence

from .ratlin import ONE, ZERO, RatMatrix
from .scenario import PartyCard

RELABELING = "relabeling"
REORDERING = "reordering"
LEFT_INVERTIBLE = "left-invertible"
RIGHT_INVERTIBLE = "right-invertible"
NEITHER = "neither"
INVERTIBILITY_CLASSES = (RELABELING, REORDERING, LEFT_INVERTIBLE, RIGHT_INVERTIBLE, NEITHER)

DEFAULT_ENUMERATION_CAP = 10**7


class NotInvertible(ValueError):
    pass


class CapExceeded(RuntimeError):
    """An enumeration would exceed its configured size limit."""


@dataclass(frozen=True)
class DetMap:
    """Deterministic map with 1-based ``xi`` and ``alphas``."""

    source: PartyCard
    target: PartyCard
    xi: tuple[int, ...]
    alphas: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        src = self.source if isinstance(self.source, PartyCard) else PartyCard(self.source)
        tgt = self.target if isinstance(self.target, PartyCard) else PartyCard(self.target)
        xi = tuple(int(v) for v in self.xi)
        alphas = tuple(tuple(int(v) for v in al) for al in self.alphas)
        if len(xi) != tgt.X:
            raise ValueError(f"xi must have one entry per target input ({tgt.X}), got {len(xi)}")
        if len(alphas) != tgt.X:
            raise ValueError(f"need one output map per target input ({tgt.X}), got {len(alphas)}")
        for z, (x, al) in enumerate(zip(xi, alphas), start=1):
            if not 1 <= x <= src.X:
                raise ValueError(f"xi({z}) = {x} is not a source input")
            if len(al) != src.A(x):
                raise ValueError(f"alpha_{z} must have {src.A(x)} entries, got {len(al)}")
            if any(not 1 <= v <= tgt.A(z) for v in al):
                raise ValueError(f"alpha_{z} leaves the range 1..{tgt.A(z)}")
        object.__setattr__(self, "source", src)
        object.__setattr__(self, "target", tgt)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "alphas", alphas)

    @classmethod
    def identity(cls, card: PartyCard) -> "DetMap":
        card = card if isinstance(card, PartyCard) else PartyCard(card)
        return cls(card, card, tuple(range(1, card.X + 1)), tuple(tuple(range(1, a + 1)) for a in card.outputs))

    def key(self) -> tuple:
        """Lexicographic sort key (ξ first, then ᾱ)."""
        return (self.xi, self.alphas)

    def to_matrix(self) -> RatMatrix:
        return to_matrix(self)

    def image_positions(self) -> tuple[tuple[int, ...], ...]:
        """For each source flat position, the target flat positions receiving it."""
        src, tgt = self.source, self.target
        hits: list[list[int]] = [[] for _ in range(src.dim)]
        for z, (x, al) in enumerate(zip(self.xi, self.alphas), start=1):
            for a, a2 in enumerate(al, start=1):
                hits[src.flatten(a, x)].append(tgt.flatten(a2, z))
        return tuple(tuple(h) for h in hits)

    def row_sources(self) -> tuple[tuple[int, ...], ...]:
        """For each target flat position, the source flat positions feeding it."""
        src, tgt = self.source, self.target
        feeds: list[list[int]] = [[] for _ in range(tgt.dim)]
        for z, (x, al) in enumerate(zip(self.xi, self.alphas), start=1):
            for a, a2 in enumerate(al, start=1):
                feeds[tgt.flatten(a2, z)].append(src.flatten(a, x))
        return tuple(tuple(f) for f in feeds)


def to_matrix(m: DetMap) -> RatMatrix:
    rows = [[ZERO] * m.source.dim for _ in range(m.target.dim)]
    for i, feeds in enumerate(m.row_sources()):
        for j in feeds:
            rows[i][j] = ONE
    return RatMatrix(rows, m.source.dim)


def compose(t: DetMap, s: DetMap) -> DetMap:
    """The map applying ``s`` first and then ``t``; matrix ``T·S``."""
    if s.target != t.source:
        raise ValueError(f"cannot compose: {s.target} is not {t.source}")
    zeta = tuple(s.xi[y - 1] for y in t.xi)
    gammas = tuple(
        tuple(beta[s.alphas[y - 1][a] - 1] for a in range(len(s.alphas[y - 1])))
        for y, beta in zip(t.xi, t.alphas)
    )
    return DetMap(s.source, t.target, zeta, gammas)


def factor_pure(m: DetMap) -> tuple[DetMap, DetMap]:
    """Split into an input-only map followed by an output-only map."""
    mid = PartyCard(m.source.A(x) for x in m.xi)
    pure_input = DetMap(m.source, mid, m.xi, tuple(tuple(range(1, a + 1)) for a in mid.outputs))
    pure_output = DetMap(mid, m.target, tuple(range(1, mid.X + 1)), m.alphas)
    return pure_input, pure_output


def _is_injective(f: Sequence[int]) -> bool:
    return len(set(f)) == len(f)


def is_left_invertible(m: DetMap) -> bool:
    for x in range(1, m.source.X + 1):
        if not any(xz == x and _is_injective(al) for xz, al in zip(m.xi, m.alphas)):
            return False
    return True


def is_right_invertible(m: DetMap) -> bool:
    if not _is_injective(m.xi):
        return False
    return all(set(al) == set(range(1, m.target.A(z) + 1)) for z, al in enumerate(m.alphas, start=1))


def classify(m: DetMap) -> str:
    left = is_left_invertible(m)
    right = is_right_invertible(m)
    if left and right:
        return RELABELING if m.source == m.target else REORDERING
    if left:
        return LEFT_INVERTIBLE
    if right:
        return RIGHT_INVERTIBLE
    return NEITHER


def is_invertible_as(m: DetMap, wanted: str) -> bool:
    """Whether ``m`` belongs to the class ``wanted``.

    Two-sided classes count as both left- and right-invertible.
    """
    tag = classify(m)
    if wanted in (RELABELING, REORDERING, NEITHER):
        return tag == wanted
    if wanted == LEFT_INVERTIBLE:
        return tag in (LEFT_INVERTIBLE, RELABELING, REORDERING)
    if wanted == RIGHT_INVERTIBLE:
        return tag in (RIGHT_INVERTIBLE, RELABELING, REORDERING)
    raise ValueError(f"unknown invertibility class {wanted!r}")


def find_left_inverse(m: DetMap) -> DetMap:
    """Lexicographically least ``t`` with ``compose(t, m)`` the identity."""
    if not is_left_invertible(m):
        raise NotInvertible("map is not left-invertible")
    zeta = []
    gammas = []
    for x in range(1, m.source.X + 1):
        z = next(z for z, (xz, al) in enumerate(zip(m.xi, m.alphas), start=1) if xz == x and _is_injective(al))
        zeta.append(z)
        al = m.alphas[z - 1]
        back = {c: a for a, c in enumerate(al, start=1)}
        gammas.append(tuple(back.get(c, 1) for c in range(1, m.target.A(z) + 1)))
    return DetMap(m.target, m.source, tuple(zeta), tuple(gammas))


def find_right_inverse(m: DetMap) -> DetMap:
    """Lexicographically least ``t`` with ``compose(m, t)`` the identity."""
    if not is_right_invertible(m):
        raise NotInvertible("map is not right-invertible")
    pos = {x: z for z, x in enumerate(m.xi, start=1)}
    zeta = []
    gammas = []
    for x in range(1, m.source.X + 1):
        if x in pos:
            z = pos[x]
            al = m.alphas[z - 1]
            section = {}
            for a, c in enumerate(al, start=1):
                section.setdefault(c, a)
            zeta.append(z)
            gammas.append(tuple(section[c] for c in range(1, m.target.A(z) + 1)))
        else:
            zeta.append(1)
            gammas.append((1,) * m.target.A(1))
    return DetMap(m.target, m.source, tuple(zeta), tuple(gammas))


def count_maps(source: PartyCard, target: PartyCard) -> int:
    """Number of deterministic maps from ``source`` to ``target``."""
    per_input = [sum(c ** a for a in source.outputs) for c in target.outputs]
    return prod(per_input)


def enumerate_maps(
    source: PartyCard,
    target: PartyCard,
    filter: str | None = None,
    cap: int | None = DEFAULT_ENUMERATION_CAP,
) -> Iterator[DetMap]:
    """All maps in lexicographic (ξ, ᾱ) order, optionally filtered by class."""
    source = source if isinstance(source, PartyCard) else PartyCard(source)
    target = target if isinstance(target, PartyCard) else PartyCard(target)
    total = count_maps(source, target)
    if cap is not None and total > cap:
        raise CapExceeded(f"{total} maps from {source} to {target} exceed the cap {cap}")
    if filter is not None and filter not in INVERTIBILITY_CLASSES:
        raise ValueError(f"unknown invertibility class {filter!r}")
    return _enumerate(source, target, filter)


def _enumerate(source: PartyCard, target: PartyCard, filter: str | None) -> Iterator[DetMap]:
    for xi in product(range(1, source.X + 1), repeat=target.X):
        spaces = [
            list(product(range(1, target.A(z) + 1), repeat=source.A(x)))
            for z, x in enumerate(xi, start=1)
        ]
        for alphas in product(*spaces):
            m = DetMap(source, target, xi, alphas)
            if filter is None or is_invertible_as(m, filter):
                yield m



def relabelings(card: PartyCard) -> list[DetMap]:
    """All relabelings of a party: input permutations preserving cardinalities
    combined with output permutations."""
    return list(_enumerate_relabelings(card))


def _enumerate_relabelings(card: PartyCard) -> Iterator[DetMap]:
    X = card.X
    for xi in permutations(range(1, X + 1)):
        if any(card.A(xi[z - 1]) != card.A(z) for z in range(1, X + 1)):
            continue
        spaces = [list(permutations(range(1, card.A(z) + 1))) for z in range(1, X + 1)]
        for alphas in product(*spaces):
            yield DetMap(card, card, xi, alphas)

"""Stochastic local transformations.

A valid transformation first picks a source input x with probability
P(x|x') and then an output a' with probability P(a'|x, a, x'). In matrix
form this means nonnegative entries, block column sums c_{x',x} that do
not depend on a, and Σ_x c_{x',x} = 1 for each target input x'.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence, Union

from .corr import Behavior, BellExpression
from .detmap import DetMap, to_matrix
from .ratlin import ONE, ZERO, RatMatrix
from .scenario import PartyCard, Scenario
from .tensor import apply_parts

NEGATIVE = "negative-entry"
A_DEPENDENT = "a-dependent-block-sum"
NOT_NORMALIZED = "input-distribution-not-normalized"


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str


class InvalidTransformation(ValueError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = tuple(violations)
        super().__init__("; ".join(f"{v.kind}: {v.detail}" for v in self.violations))


@dataclass(frozen=True)
class LocalTransformation:
    source: PartyCard
    target: PartyCard
    matrix: RatMatrix

    def input_distribution(self) -> tuple[tuple[Fraction, ...], ...]:
        """c[x'-1][x-1] = P(x|x')."""
        return _block_sums(self.matrix, self.source, self.target)[0]


def _card(c) -> PartyCard:
    return c if isinstance(c, PartyCard) else PartyCard(c)


def _check_shape(M: RatMatrix, source: PartyCard, target: PartyCard) -> None:
    if M.shape != (target.dim, source.dim):
        raise ValueError(f"matrix shape {M.shape} does not match {target.dim}x{source.dim}")


def _block_sums(M: RatMatrix, source: PartyCard, target: PartyCard):
    """Per-block column sums, and the list of blocks where they depend on a."""
    c = []
    uneven = []
    for z in range(1, target.X + 1):
        rows = range(target.offsets[z - 1], target.offsets[z - 1] + target.A(z))
        cz = []
        for x in range(1, source.X + 1):
            sums = [
                sum((M[r, source.offsets[x - 1] + a] for r in rows), ZERO)
                for a in range(source.A(x))
            ]
            if any(s != sums[0] for s in sums):
                uneven.append((z, x, tuple(sums)))
            cz.append(sums[0])
        c.append(tuple(cz))
    return tuple(c), uneven


def violations(M: RatMatrix, source, target) -> list[Violation]:
    """Every causal-form condition that ``M`` fails."""
    source, target = _card(source), _card(target)
    _check_shape(M, source, target)
    found = []
    for i, row in enumerate(M.rows):
        for j, v in enumerate(row):
            if v < 0:
                a2, z = target.unflatten(i)
                a, x = source.unflatten(j)
                found.append(Violation(NEGATIVE, f"entry (a'={a2},x'={z}),(a={a},x={x}) = {v}"))
    c, uneven = _block_sums(M, source, target)
    for z, x, sums in uneven:
        found.append(
            Violation(A_DEPENDENT, f"block x'={z}, x={x} has column sums {[str(s) for s in sums]}")
        )
    if not uneven:
        for z, cz in enumerate(c, start=1):
            total = sum(cz, ZERO)
            if total != 1:
                found.append(Violation(NOT_NORMALIZED, f"input x'={z}: sum over x of P(x|x') is {total}"))
    return found


def validate(M: RatMatrix, source, target) -> LocalTransformation:
    """Return the transformation, or raise :class:`InvalidTransformation`."""
    source, target = _card(source), _card(target)
    found = violations(M, source, target)
    if found:
        raise InvalidTransformation(found)
    return LocalTransformation(source, target, M)


def is_valid(M: RatMatrix, source, target) -> bool:
    return not violations(M, source, target)


@dataclass(frozen=True)
class CPResult:
    completely_positive: bool
    witness: str | None = None
    partner: Behavior | None = None
    image: Behavior | None = None

    def __bool__(self) -> bool:
        return self.completely_positive


def swap_behavior(card: PartyCard) -> Behavior:
    """Signaling partner device for the complete-positivity test.

    Party B has max_x A_x inputs with X outputs each. B's input y is
    returned as A's output (reduced into A's range) and A's input is
    returned as B's output: P(a,b|x,y) = δ(a, ((y−1) mod A_x)+1) δ(b, x).
    """
    card = _card(card)
    ymax = max(card.outputs)
    partner = PartyCard((card.X,) * ymax)
    sc = Scenario((card, partner), [(0, 1), (1, 0)])
    coeffs = []
    for (a, x), (b, y) in sc.indices():
        coeffs.append(ONE if (a == (y - 1) % card.A(x) + 1 and b == x) else ZERO)
    return Behavior(sc, coeffs)


def _deterministic_party_behaviors(card: PartyCard):
    for outs in product(*(range(1, a + 1) for a in card.outputs)):
        v = [ZERO] * card.dim
        for x, a in enumerate(outs, start=1):
            v[card.flatten(a, x)] = ONE
        yield outs, tuple(v)


def is_completely_positive(M: RatMatrix, source, target) -> CPResult:
    """Operational test: apply M to one party of test behaviors.

    First every deterministic single-party behavior must map to a
    normalized behavior. Then ``M ⊗ 1`` applied to the swap device must
    give a nonnegative, normalized joint behavior.
    """
    source, target = _card(source), _card(target)
    _check_shape(M, source, target)
    for outs, p in _deterministic_party_behaviors(source):
        img = M @ p
        for z in range(1, target.X + 1):
            off = target.offsets[z - 1]
            s = sum(img[off:off + target.A(z)], ZERO)
            if s != 1:
                return CPResult(
                    False,
                    f"deterministic behavior with outputs {outs} maps to block sum {s} at x'={z}",
                )
    swap = swap_behavior(source)
    dims = swap.scenario.dims
    out = apply_parts(swap.coeffs, dims, [M, None])
    sc = Scenario((target, swap.scenario.parties[1]), swap.scenario.signaling)
    image = Behavior(sc, out)
    for idx, v in zip(sc.indices(), image.coeffs):
        if v < 0:
            (a2, z), (b, y) = idx
            return CPResult(False, f"P'({a2},{b}|{z},{y}) = {v} < 0 on the swap device", swap, image)
    sums: dict = {}
    for idx, v in zip(sc.indices(), image.coeffs):
        key = (idx[0][1], idx[1][1])
        sums[key] = sums.get(key, ZERO) + v
    for key, s in sums.items():
        if s != 1:
            return CPResult(False, f"swap image block (x'={key[0]}, y={key[1]}) sums to {s}", swap, image)
    return CPResult(True, None, swap, image)


@dataclass(frozen=True)
class ConvexDecomposition:
    terms: tuple[tuple[Fraction, DetMap], ...]

    def recombine(self) -> RatMatrix:
        out = None
        for w, m in self.terms:
            t = to_matrix(m).scale(w)
            out = t if out is None else out + t
        return out


def decompose(t: LocalTransformation) -> ConvexDecomposition:
    """Greedy peeling into deterministic maps.

    Each step takes the deterministic map with the largest removable
    weight, breaking ties by least (ξ, ᾱ), and subtracts it.
    """
    src, tgt = t.source, t.target
    validate(t.matrix, src, tgt)
    R = [list(r) for r in t.matrix.rows]
    remaining = ONE
    terms = []
    while remaining > 0:
        # best value reachable for each (x', x): max over a' per column, min over a
        best = []
        for z in range(1, tgt.X + 1):
            r0 = tgt.offsets[z - 1]
            vals = []
            for x in range(1, src.X + 1):
                c0 = src.offsets[x - 1]
                v = min(
                    max(R[r0 + a2][c0 + a] for a2 in range(tgt.A(z)))
                    for a in range(src.A(x))
                )
                vals.append(v)
            best.append(vals)
        lam = min(max(vals) for vals in best)
        if lam <= 0:
            raise AssertionError("peeling stalled; matrix is not a valid transformation")
        xi = []
        alphas = []
        for z in range(1, tgt.X + 1):
            x = next(x for x in range(1, src.X + 1) if best[z - 1][x - 1] >= lam)
            r0 = tgt.offsets[z - 1]
            c0 = src.offsets[x - 1]
            al = tuple(
                next(a2 for a2 in range(tgt.A(z)) if R[r0 + a2][c0 + a] >= lam) + 1
                for a in range(src.A(x))
            )
            xi.append(x)
            alphas.append(al)
        m = DetMap(src, tgt, tuple(xi), tuple(alphas))
        for i, feeds in enumerate(m.row_sources()):
            for j in feeds:
                R[i][j] -= lam
        remaining -= lam
        terms.append((lam, m))
    if any(v for r in R for v in r):
        raise AssertionError("peeling left a nonzero residual")
    return ConvexDecomposition(tuple(terms))


Part = Union[LocalTransformation, DetMap, RatMatrix, None]


def _part_matrix(part: Part) -> RatMatrix | None:
    if part is None:
        return None
    if isinstance(part, LocalTransformation):
        return part.matrix
    if isinstance(part, DetMap):
        return to_matrix(part)
    if isinstance(part, RatMatrix):
        return part
    raise TypeError(f"cannot use {type(part).__name__} as a local map")


def _part_cards(part: Part, card: PartyCard) -> tuple[PartyCard, PartyCard]:
    if part is None:
        return card, card
    if isinstance(part, (LocalTransformation, DetMap)):
        return part.source, part.target
    raise TypeError("raw matrices need explicit cardinalities; wrap them in LocalTransformation")


def apply_to_behavior(parts: Sequence[Part], P: Behavior) -> Behavior:
    """(Λ_1 ⊗ Λ_2 ⊗ …) P; ``None`` stands for the identity."""
    sc = P.scenario
    if len(parts) != sc.n:
        raise ValueError(f"expected {sc.n} parts, got {len(parts)}")
    cards = []
    for part, card in zip(parts, sc.parties):
        s, t = _part_cards(part, card)
        if s != card:
            raise ValueError(f"map source {s} does not match party {card}")
        cards.append(t)
    out = apply_parts(P.coeffs, sc.dims, [_part_matrix(p) for p in parts])
    return Behavior(sc.with_parties(cards), out)


def apply_to_expression(phi: BellExpression, parts: Sequence[Part]) -> BellExpression:
    """φ (Λ_1 ⊗ Λ_2 ⊗ …); each map goes from the new scenario into φ's."""
    sc = phi.scenario
    if len(parts) != sc.n:
        raise ValueError(f"expected {sc.n} parts, got {len(parts)}")
    cards = []
    for part, card in zip(parts, sc.parties):
        s, t = _part_cards(part, card)
        if t != card:
            raise ValueError(f"map target {t} does not match party {card}")
        cards.append(s)
    mats = [None if p is None else _part_matrix(p).T for p in parts]
    out = apply_parts(phi.coeffs, sc.dims, mats)
    return BellExpression(sc.with_parties(cards), out, phi.bound)

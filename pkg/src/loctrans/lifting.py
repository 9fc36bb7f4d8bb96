"""Liftings, maximal average payoff and interconvertibility searches."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import prod
from typing import Sequence

from .corr import Behavior, BellExpression
from .detmap import (
    DEFAULT_ENUMERATION_CAP,
    LEFT_INVERTIBLE,
    RIGHT_INVERTIBLE,
    CapExceeded,
    DetMap,
    NotInvertible,
    count_maps,
    enumerate_maps,
    find_left_inverse,
    find_right_inverse,
    is_invertible_as,
)
from .ratlin import ZERO, dot
from .scenario import PartyCard
from .stochmap import apply_to_expression


def _map_axis(coeffs: Sequence, dims: Sequence[int], k: int, m: DetMap) -> tuple:
    """Apply a deterministic map to axis ``k`` by index gathering."""
    feeds = m.row_sources()
    pre = prod(dims[:k])
    post = prod(dims[k + 1:])
    dk = dims[k]
    nk = len(feeds)
    out = []
    for p in range(pre):
        base = p * dk * post
        for f in feeds:
            if not f:
                out.extend([ZERO] * post)
            elif len(f) == 1:
                off = base + f[0] * post
                out.extend(coeffs[off:off + post])
            else:
                for q in range(post):
                    out.append(sum((coeffs[base + j * post + q] for j in f), ZERO))
    return tuple(out)


def _pull_axis(coeffs: Sequence, dims: Sequence[int], k: int, m: DetMap) -> tuple:
    """Row vector times (1 ⊗ Λ ⊗ 1) on axis ``k`` (φ has the target layout)."""
    hits = m.image_positions()
    pre = prod(dims[:k])
    post = prod(dims[k + 1:])
    dk = dims[k]
    out = []
    for p in range(pre):
        base = p * dk * post
        for h in hits:
            if len(h) == 1:
                off = base + h[0] * post
                out.extend(coeffs[off:off + post])
            else:
                for q in range(post):
                    out.append(sum((coeffs[base + i * post + q] for i in h), ZERO))
    return tuple(out)


def apply_detmaps(P: Behavior, maps: Sequence[DetMap | None]) -> Behavior:
    """(Λ_1 ⊗ …) P for deterministic maps, without building matrices."""
    sc = P.scenario
    coeffs = P.coeffs
    dims = list(sc.dims)
    cards = list(sc.parties)
    for k, m in enumerate(maps):
        if m is None:
            continue
        if m.source != cards[k]:
            raise ValueError(f"map source {m.source} does not match party {cards[k]}")
        coeffs = _map_axis(coeffs, dims, k, m)
        dims[k] = m.target.dim
        cards[k] = m.target
    return Behavior(sc.with_parties(cards), coeffs)


@dataclass(frozen=True)
class PayoffResult:
    value: Fraction
    maps: tuple[DetMap, ...]


def max_payoff(
    phi: BellExpression, P: Behavior, cap: int | None = DEFAULT_ENUMERATION_CAP
) -> PayoffResult:
    """Largest φ((Λ_1 ⊗ …) P) over deterministic maps from P's parties to φ's.

    Ties go to the lexicographically least tuple of maps.
    """
    if P.scenario.n != phi.scenario.n:
        raise ValueError("party counts differ")
    srcs = P.scenario.parties
    tgts = phi.scenario.parties
    counts = [count_maps(s, t) for s, t in zip(srcs, tgts)]
    total = prod(counts)
    if cap is not None and total > cap:
        raise CapExceeded(f"{total} map tuples exceed the cap {cap}")
    n = len(srcs)
    last = n - 1
    # pull φ back through every map of the last party once
    pulled = []
    for m in enumerate_maps(srcs[last], tgts[last], cap=None):
        pulled.append((m, _pull_axis(phi.coeffs, [c.dim for c in tgts], last, m)))
    best_value = None
    best_maps = None
    head_lists = [list(enumerate_maps(s, t, cap=None)) for s, t in zip(srcs[:last], tgts[:last])]
    for head in product(*head_lists):
        img = apply_detmaps(P, list(head) + [None]).coeffs
        for m, psi in pulled:
            v = dot(psi, img)
            if best_value is None or v > best_value:
                best_value = v
                best_maps = tuple(head) + (m,)
    return PayoffResult(best_value, best_maps)


def lift_behavior(P: Behavior, party: int, m: DetMap) -> Behavior:
    if not is_invertible_as(m, LEFT_INVERTIBLE):
        raise NotInvertible("behavior liftings need a left-invertible map")
    maps: list = [None] * P.scenario.n
    maps[party] = m
    return apply_detmaps(P, maps)


def unlift_behavior(P: Behavior, party: int, m: DetMap) -> Behavior:
    maps: list = [None] * P.scenario.n
    maps[party] = find_left_inverse(m)
    return apply_detmaps(P, maps)


def lift_expression(phi: BellExpression, party: int, m: DetMap) -> BellExpression:
    """φ (… ⊗ Λ ⊗ …) for a right-invertible Λ into φ's party."""
    if not is_invertible_as(m, RIGHT_INVERTIBLE):
        raise NotInvertible("expression liftings need a right-invertible map")
    parts: list = [None] * phi.scenario.n
    parts[party] = m
    return apply_to_expression(phi, parts)


def unlift_expression(phi: BellExpression, party: int, m: DetMap) -> BellExpression:
    parts: list = [None] * phi.scenario.n
    parts[party] = find_right_inverse(m)
    return apply_to_expression(phi, parts)


@dataclass(frozen=True)
class LiftCensus:
    total_maps: int
    invertible_count: int
    unique_images: int
    images: tuple[Behavior, ...]


def census_lift(P: Behavior, party: int, target: PartyCard, cap: int | None = DEFAULT_ENUMERATION_CAP) -> LiftCensus:
    """Apply every left-invertible map of one party and deduplicate images."""
    target = target if isinstance(target, PartyCard) else PartyCard(target)
    source = P.scenario.parties[party]
    total = 0
    inv = 0
    seen: dict[tuple, Behavior] = {}
    maps: list = [None] * P.scenario.n
    for m in enumerate_maps(source, target, cap=cap):
        total += 1
        if not is_invertible_as(m, LEFT_INVERTIBLE):
            continue
        inv += 1
        maps[party] = m
        img = apply_detmaps(P, maps)
        seen.setdefault(img.coeffs, img)
    return LiftCensus(total, inv, len(seen), tuple(seen.values()))


def census_lift_pr(target: PartyCard, cap: int | None = DEFAULT_ENUMERATION_CAP) -> LiftCensus:
    from .corr import pr_box

    return census_lift(pr_box(), 0, target, cap)


def find_conversion(
    P1: Behavior, P2: Behavior, cap: int | None = DEFAULT_ENUMERATION_CAP
) -> tuple[DetMap, ...] | None:
    """Deterministic maps with (Λ_1 ⊗ …) P1 = P2, or None.

    Maps of parties 2..n are enumerated; party 1's map is then solved
    input by input, since each of its target inputs is independent.
    """
    s1, s2 = P1.scenario, P2.scenario
    if s1.n != s2.n:
        raise ValueError("party counts differ")
    srcs, tgts = s1.parties, s2.parties
    total = prod(count_maps(s, t) for s, t in zip(srcs, tgts))
    if cap is not None and total > cap:
        raise CapExceeded(f"{total} map tuples exceed the cap {cap}")
    rest_lists = [list(enumerate_maps(s, t, cap=None)) for s, t in zip(srcs[1:], tgts[1:])]
    src0, tgt0 = srcs[0], tgts[0]
    post = prod(c.dim for c in tgts[1:])
    target_rows = [P2.coeffs[r * post:(r + 1) * post] for r in range(tgt0.dim)]
    for rest in product(*rest_lists):
        Q = apply_detmaps(P1, [None] + list(rest)).coeffs
        src_rows = [Q[r * post:(r + 1) * post] for r in range(src0.dim)]
        xi = []
        alphas = []
        for z in range(1, tgt0.X + 1):
            want = [target_rows[tgt0.flatten(c, z)] for c in range(1, tgt0.A(z) + 1)]
            found = None
            for x in range(1, src0.X + 1):
                have = [src_rows[src0.flatten(a, x)] for a in range(1, src0.A(x) + 1)]
                found = _match_outputs(have, want)
                if found is not None:
                    xi.append(x)
                    alphas.append(found)
                    break
            if found is None:
                break
        else:
            return (DetMap(src0, tgt0, tuple(xi), tuple(alphas)),) + tuple(rest)
    return None


def _match_outputs(have: list, want: list) -> tuple[int, ...] | None:
    """Least α with want[c] = Σ_{a: α(a)=c} have[a], by backtracking."""
    n_have = len(have)
    n_want = len(want)
    width = len(want[0]) if want else 0
    zero = (ZERO,) * width
    prune = all(_nonneg(h) for h in have)

    def rec(a: int, acc: list, alpha: list):
        if a == n_have:
            return tuple(alpha) if all(tuple(acc[c]) == tuple(want[c]) for c in range(n_want)) else None
        for c in range(n_want):
            new = [u + v for u, v in zip(acc[c], have[a])]
            if prune and any(u > w for u, w in zip(new, want[c])):
                continue
            saved = acc[c]
            acc[c] = new
            alpha.append(c + 1)
            res = rec(a + 1, acc, alpha)
            if res is not None:
                return res
            alpha.pop()
            acc[c] = saved
        return None

    return rec(0, [list(zero) for _ in range(n_want)], [])


def _nonneg(v) -> bool:
    return all(u >= 0 for u in v)


@dataclass(frozen=True)
class Interconversion:
    forward: tuple[DetMap, ...]
    backward: tuple[DetMap, ...]


def interconvertible(P1: Behavior, P2: Behavior, cap: int | None = DEFAULT_ENUMERATION_CAP) -> Interconversion | None:
    fwd = find_conversion(P1, P2, cap)
    if fwd is None:
        return None
    bwd = find_conversion(P2, P1, cap)
    if bwd is None:
        return None
    return Interconversion(fwd, bwd)

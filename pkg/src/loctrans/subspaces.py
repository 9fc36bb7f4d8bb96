"""Invariant subspaces of a party's coefficient space and their duals.

Every party space splits into Z (the uniform behavior), C (correlation
vectors, zero sum in every input block) and S (vectors with equal sums
inside a block but unequal sums across inputs). Local maps keep C and
Z ⊕ C invariant, so the multiparty labels Z/C/S classify which
components a behavior in a given scenario may carry.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

from .corr import Behavior
from .ratlin import ONE, ZERO, RatMatrix, RatVector, kron_vec
from .scenario import PartyCard, Scenario
from .tensor import apply_parts

Z, C, S = "Z", "C", "S"
LABELS = (Z, C, S)

NORMALIZATION_FIXED = "normalization-fixed"
NORMALIZATION_FORBIDDEN = "normalization-forbidden"
NONSIGNALING = "nonsignaling"
SIGNALING_ALLOWED = "signaling-allowed"
SIGNALING_FORBIDDEN = "signaling-forbidden"
ALLOWED_CLASSES = (NONSIGNALING, SIGNALING_ALLOWED)
FORBIDDEN_CLASSES = (NORMALIZATION_FORBIDDEN, SIGNALING_FORBIDDEN)


@dataclass(frozen=True)
class PartyBasis:
    card: PartyCard
    uniform: RatVector
    correlations: tuple[tuple[tuple[int, int], RatVector], ...]  # ((i, x), C^{i|x})
    signaling: tuple[RatVector, ...]  # S^1 .. S^{X-1}

    def vectors(self) -> list[RatVector]:
        return [self.uniform] + [v for _, v in self.correlations] + list(self.signaling)


@dataclass(frozen=True)
class PartyDualBasis:
    card: PartyCard
    traceout: RatVector  # τ
    sums: tuple[RatVector, ...]  # Σ^x
    omegas: tuple[RatVector, ...]  # Ω^1 .. Ω^{X-1}
    chis: tuple[tuple[tuple[int, int], RatVector], ...]  # ((i, x), χ^{i|x})

    def forms(self) -> list[RatVector]:
        return [self.traceout] + [v for _, v in self.chis] + list(self.omegas)


def _unit(card: PartyCard, a: int, x: int) -> list[Fraction]:
    v = [ZERO] * card.dim
    v[card.flatten(a, x)] = ONE
    return v


@lru_cache(maxsize=None)
def party_basis(card: PartyCard) -> PartyBasis:
    X = card.X
    uniform = tuple(Fraction(1, card.A(x)) for a, x in card.indices())
    corr = []
    for x in range(1, X + 1):
        Ax = card.A(x)
        for i in range(1, Ax):
            v = [ZERO] * card.dim
            v[card.flatten(i, x)] = Fraction(1, Ax)
            v[card.flatten(Ax, x)] = Fraction(-1, Ax)
            corr.append(((i, x), tuple(v)))
    sig = []
    for k in range(1, X):
        v = [-u for u in uniform]
        for a in range(1, card.A(k) + 1):
            v[card.flatten(a, k)] += Fraction(X, card.A(k))
        sig.append(tuple(v))
    return PartyBasis(card, uniform, tuple(corr), tuple(sig))


@lru_cache(maxsize=None)
def party_dual_basis(card: PartyCard) -> PartyDualBasis:
    X = card.X
    sums = []
    for x in range(1, X + 1):
        sums.append(tuple(ONE if xx == x else ZERO for a, xx in card.indices()))
    tau = tuple(Fraction(1, X) for _ in range(card.dim))
    omegas = tuple(
        tuple((s - t) / X for s, t in zip(sums[k - 1], sums[X - 1])) for k in range(1, X)
    )
    chis = []
    for x in range(1, X + 1):
        Ax = card.A(x)
        for i in range(1, Ax):
            v = [-s for s in sums[x - 1]]
            v[card.flatten(i, x)] += Ax
            chis.append(((i, x), tuple(v)))
    return PartyDualBasis(card, tau, tuple(sums), omegas, tuple(chis))


@lru_cache(maxsize=None)
def projectors(card: PartyCard) -> tuple[RatMatrix, RatMatrix, RatMatrix]:
    """(Π_Z, Π_C, Π_S) for one party."""
    basis = party_basis(card)
    dual = party_dual_basis(card)
    d = card.dim
    pz = RatMatrix.outer(basis.uniform, dual.traceout)
    pc = RatMatrix.zeros(d, d)
    for (_, cv), (_, chi) in zip(basis.correlations, dual.chis):
        pc = pc + RatMatrix.outer(cv, chi)
    ps = RatMatrix.zeros(d, d)
    for sv, om in zip(basis.signaling, dual.omegas):
        ps = ps + RatMatrix.outer(sv, om)
    return pz, pc, ps


def label_projector(card: PartyCard, label: str) -> RatMatrix:
    return projectors(card)[LABELS.index(label)]


def classify_component(scenario: Scenario, label: Sequence[str]) -> str:
    """Whether a multiparty component is fixed, allowed or forbidden.

    With both S and C parties present, the component is allowed exactly
    when every S party may signal to at least one C party.
    """
    if len(label) != scenario.n:
        raise ValueError(f"label needs {scenario.n} entries, got {len(label)}")
    if any(l not in LABELS for l in label):
        raise ValueError(f"labels must be drawn from {LABELS}")
    s_parties = [k for k, l in enumerate(label) if l == S]
    c_parties = [k for k, l in enumerate(label) if l == C]
    if not c_parties:
        return NORMALIZATION_FORBIDDEN if s_parties else NORMALIZATION_FIXED
    if not s_parties:
        return NONSIGNALING
    for b in s_parties:
        if not any((b, c) in scenario.signaling for c in c_parties):
            return SIGNALING_FORBIDDEN
    return SIGNALING_ALLOWED


def all_labels(n: int) -> list[tuple[str, ...]]:
    return list(product(LABELS, repeat=n))


def component_projector(scenario: Scenario, label: Sequence[str]) -> list[RatMatrix]:
    """Per-party factors of the projector on a labelled component."""
    return [label_projector(c, l) for c, l in zip(scenario.parties, label)]


def decompose_behavior(P: Behavior) -> dict[tuple[str, ...], RatVector]:
    """Split ``P`` into its 3^n labelled components (all labels present)."""
    sc = P.scenario
    out = {}
    for label in all_labels(sc.n):
        out[label] = apply_parts(P.coeffs, sc.dims, component_projector(sc, label))
    return out


def class_projector_parts(scenario: Scenario, classes: Sequence[str]) -> list[list[RatMatrix]]:
    """Tensor factors of every component whose class is in ``classes``."""
    return [
        component_projector(scenario, label)
        for label in all_labels(scenario.n)
        if classify_component(scenario, label) in classes
    ]


@lru_cache(maxsize=None)
def cg_matrices(card: PartyCard) -> tuple[RatMatrix, RatMatrix]:
    """Collins-Gisin map G (full ← reduced) and its left inverse G⁺.

    Reduced coordinates: one constant, then P(i|x) for i < A_x.
    """
    X = card.X
    red = 1 + sum(a - 1 for a in card.outputs)
    G = [[ZERO] * red for _ in range(card.dim)]
    col = 1
    red_index = {}
    for x in range(1, X + 1):
        Ax = card.A(x)
        G[card.flatten(Ax, x)][0] = ONE
        for i in range(1, Ax):
            red_index[(i, x)] = col
            G[card.flatten(i, x)][col] = ONE
            G[card.flatten(Ax, x)][col] = -ONE
            col += 1
    Gp = [[ZERO] * card.dim for _ in range(red)]
    Gp[0] = [Fraction(1, X)] * card.dim
    for (i, x), r in red_index.items():
        Ax = card.A(x)
        mu = Fraction(X - 1, X * Ax)
        nu = Fraction(1, X * Ax)
        for a, xx in card.indices():
            pos = card.flatten(a, xx)
            if xx == x:
                Gp[r][pos] = (ONE if a == i else ZERO) - mu
            else:
                Gp[r][pos] = nu
    return RatMatrix(G, red), RatMatrix(Gp, card.dim)


def cg_dims(scenario: Scenario) -> tuple[int, ...]:
    return tuple(cg_matrices(c)[0].ncols for c in scenario.parties)


def to_cg(P: Behavior) -> RatVector:
    sc = P.scenario
    return apply_parts(P.coeffs, sc.dims, [cg_matrices(c)[1] for c in sc.parties])


def from_cg(scenario: Scenario, v: Sequence) -> Behavior:
    v = tuple(Fraction(t) for t in v)
    dims = cg_dims(scenario)
    expected = 1
    for d in dims:
        expected *= d
    if len(v) != expected:
        raise ValueError(f"expected {expected} Collins-Gisin coordinates, got {len(v)}")
    if v[0] != 1:
        raise ValueError("the constant Collins-Gisin coordinate must be 1")
    return Behavior(scenario, apply_parts(v, dims, [cg_matrices(c)[0] for c in scenario.parties]))


def uniform_product(scenario: Scenario) -> RatVector:
    out = (ONE,)
    for c in scenario.parties:
        out = kron_vec(out, party_basis(c).uniform)
    return out


def traceout_all(scenario: Scenario) -> RatVector:
    out = (ONE,)
    for c in scenario.parties:
        out = kron_vec(out, party_dual_basis(c).traceout)
    return out

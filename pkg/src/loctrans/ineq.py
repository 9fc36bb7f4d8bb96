"""Affine equivalence, canonical forms and variance-optimal estimators.

Two inequalities are equivalent when they differ by a positive scale and
by adding multiples of constraints that hold on the whole correlation
set: τ·P = 1 for normalization and μ·P = 0 for each forbidden component.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .corr import BellExpression, Behavior
from .ratlin import (
    ONE,
    ZERO,
    Infeasible,
    RatMatrix,
    RatVector,
    dot,
    kernel_basis,
    kron_vec,
    primitive_integer_vector,
    pseudo_inverse,
    solve,
)
from .scenario import Scenario
from .subspaces import (
    ALLOWED_CLASSES,
    C,
    FORBIDDEN_CLASSES,
    NORMALIZATION_FIXED,
    S,
    Z,
    all_labels,
    classify_component,
    component_projector,
    party_dual_basis,
    traceout_all,
    uniform_product,
)
from .tensor import apply_parts, kron_all

GAMMA = "gamma"
ZERO_BOUND = "zero-bound"
PRIMITIVE = "primitive"
ONE_NORM = "one-norm"


def _label_forms(scenario: Scenario, label: Sequence[str]) -> list[RatVector]:
    per_party = []
    for card, l in zip(scenario.parties, label):
        dual = party_dual_basis(card)
        if l == Z:
            per_party.append([dual.traceout])
        elif l == C:
            per_party.append([v for _, v in dual.chis])
        else:
            per_party.append(list(dual.omegas))
    forms = [(ONE,)]
    for options in per_party:
        forms = [kron_vec(f, o) for f in forms for o in options]
    return forms


@lru_cache(maxsize=None)
def constraint_forms(scenario: Scenario) -> tuple[RatVector, tuple[RatVector, ...]]:
    """τ_all and a basis of the forms vanishing on the allowed set."""
    mus = []
    for label in all_labels(scenario.n):
        if classify_component(scenario, label) in FORBIDDEN_CLASSES:
            mus.extend(_label_forms(scenario, label))
    return traceout_all(scenario), tuple(mus)


@lru_cache(maxsize=None)
def scenario_projectors(scenario: Scenario) -> tuple[RatMatrix, RatMatrix, RatMatrix]:
    """(Π_Z, Π_Γ, Π_Ω) on the full coefficient space."""
    d = scenario.dim
    pz = kron_all(component_projector(scenario, (Z,) * scenario.n))
    pg = RatMatrix.zeros(d, d)
    po = RatMatrix.zeros(d, d)
    for label in all_labels(scenario.n):
        cls = classify_component(scenario, label)
        if cls == NORMALIZATION_FIXED:
            continue
        m = kron_all(component_projector(scenario, label))
        if cls in ALLOWED_CLASSES:
            pg = pg + m
        else:
            po = po + m
    return pz, pg, po


@dataclass(frozen=True)
class Certificate:
    """φ₂ = s (φ₁ + t τ + Σ w_i μ_i) and u₂ = s (u₁ + t)."""

    s: Fraction
    t: Fraction
    w: tuple[Fraction, ...]


def affine_equivalent(phi1: BellExpression, phi2: BellExpression) -> Certificate | None:
    """Certificate of equivalence, or None.

    Bounds are matched only when both expressions carry one.
    """
    if phi1.scenario != phi2.scenario:
        raise ValueError("expressions live in different scenarios")
    tau, mus = constraint_forms(phi1.scenario)
    use_bound = phi1.bound is not None and phi2.bound is not None
    # unknowns: s, t' = s t, w'_i = s w_i
    cols = [list(phi1.coeffs), list(tau)] + [list(m) for m in mus]
    rhs = list(phi2.coeffs)
    if use_bound:
        cols[0].append(phi1.bound)
        cols[1].append(ONE)
        for c in cols[2:]:
            c.append(ZERO)
        rhs.append(phi2.bound)
    M = RatMatrix.from_columns(cols)
    try:
        z = solve(M, rhs)
    except Infeasible:
        return None
    kern = kernel_basis(M)
    s = z[0]
    if s <= 0:
        shift = next((k for k in kern if k[0] != 0), None)
        if shift is None:
            return None
        step = (ONE - s) / shift[0]
        z = tuple(a + step * b for a, b in zip(z, shift))
        s = z[0]
    return Certificate(s, z[1] / s, tuple(v / s for v in z[2:]))


def apply_certificate(phi: BellExpression, cert: Certificate) -> BellExpression:
    tau, mus = constraint_forms(phi.scenario)
    coeffs = [c + cert.t * t for c, t in zip(phi.coeffs, tau)]
    for w, mu in zip(cert.w, mus):
        if w:
            coeffs = [c + w * m for c, m in zip(coeffs, mu)]
    bound = None if phi.bound is None else cert.s * (phi.bound + cert.t)
    return BellExpression(phi.scenario, [cert.s * c for c in coeffs], bound)


@dataclass(frozen=True)
class CanonicalForm:
    mode: str
    coeffs: RatVector
    bound: Fraction
    scale_convention: str

    def as_expression(self, scenario: Scenario) -> BellExpression:
        return BellExpression(scenario, self.coeffs, self.bound)


def canonicalize(phi: BellExpression, mode: str = GAMMA, scale: str = PRIMITIVE) -> CanonicalForm:
    """Unique representative of the affine-equivalence class of ``phi``.

    gamma: φ' = φ Π_Γ with bound u − φ(ū⊗…⊗ū).
    zero-bound: φ' = φ(Π_Z + Π_Γ) − u τ_all with bound 0.
    """
    if phi.bound is None:
        raise ValueError("canonical forms need a bound")
    sc = phi.scenario
    pz, pg, _ = scenario_projectors(sc)
    if mode == GAMMA:
        coeffs = pg.vecmat(phi.coeffs)
        bound = phi.bound - dot(phi.coeffs, uniform_product(sc))
    elif mode == ZERO_BOUND:
        tau = traceout_all(sc)
        kept = (pz + pg).vecmat(phi.coeffs)
        coeffs = tuple(c - phi.bound * t for c, t in zip(kept, tau))
        bound = ZERO
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if scale == PRIMITIVE:
        ints, factor = primitive_integer_vector(coeffs)
        coeffs = tuple(Fraction(k) for k in ints)
        bound = bound * factor
    elif scale == ONE_NORM:
        norm = sum((abs(c) for c in coeffs), ZERO)
        if norm:
            coeffs = tuple(c / norm for c in coeffs)
            bound = bound / norm
    else:
        raise ValueError(f"unknown scale convention {scale!r}")
    return CanonicalForm(mode, tuple(coeffs), bound, scale)


@dataclass(frozen=True)
class CovarianceModel:
    """Covariance of an estimated behavior, block-diagonal per joint input."""

    scenario: Scenario
    blocks: tuple[tuple[tuple[int, ...], RatMatrix], ...]  # (positions, block)

    def matrix(self) -> RatMatrix:
        d = self.scenario.dim
        rows = [[ZERO] * d for _ in range(d)]
        for pos, blk in self.blocks:
            for i, p in enumerate(pos):
                for j, q in enumerate(pos):
                    rows[p][q] = blk[i, j]
        return RatMatrix(rows, d)

    def variance(self, coeffs: Sequence[Fraction]) -> Fraction:
        total = ZERO
        for pos, blk in self.blocks:
            v = [coeffs[p] for p in pos]
            if any(v):
                total += dot(v, blk @ v)
        return total

    @classmethod
    def from_matrix(cls, scenario: Scenario, sigma: RatMatrix) -> "CovarianceModel":
        if sigma.shape != (scenario.dim, scenario.dim):
            raise ValueError("covariance shape does not match the scenario")
        if sigma != sigma.T:
            raise ValueError("covariance must be symmetric")
        return cls(scenario, ((tuple(range(scenario.dim)), sigma),))


def input_blocks(scenario: Scenario) -> dict[tuple[int, ...], list[int]]:
    blocks: dict[tuple[int, ...], list[int]] = {}
    for pos, idx in enumerate(scenario.indices()):
        blocks.setdefault(tuple(x for _, x in idx), []).append(pos)
    return blocks


def covariance_from_counts(counts: Behavior) -> CovarianceModel:
    """Multinomial covariance (diag(p) − p pᵀ)/N per joint input block."""
    sc = counts.scenario
    blocks = []
    for ins, pos in input_blocks(sc).items():
        n = [counts.coeffs[p] for p in pos]
        if any(v < 0 or v.denominator != 1 for v in n):
            raise ValueError(f"counts must be nonnegative integers (inputs {ins})")
        total = sum(n, ZERO)
        if total <= 0:
            raise ValueError(f"no samples for inputs {ins}")
        p = [v / total for v in n]
        blk = RatMatrix(
            [[((p[i] if i == j else ZERO) - p[i] * p[j]) / total for j in range(len(p))] for i in range(len(p))]
        )
        blocks.append((tuple(pos), blk))
    return CovarianceModel(sc, tuple(blocks))


def variance_optimal(phi: BellExpression, cov: CovarianceModel | RatMatrix) -> BellExpression:
    """Equivalent expression with least variance φ Σ φᵀ.

    The result is φ Π̄ − φ Π̄ Σ Π_Ωᵀ (Π_Ω Σ Π_Ωᵀ)⁺ Π_Ω with Π̄ = Π_Z + Π_Γ;
    the pseudoinverse is exact, so singular Σ is handled.
    """
    sc = phi.scenario
    if isinstance(cov, CovarianceModel):
        if cov.scenario.parties != sc.parties:
            raise ValueError("covariance scenario does not match the expression")
        sigma = cov.matrix()
    else:
        sigma = cov
        if sigma.shape != (sc.dim, sc.dim):
            raise ValueError("covariance shape does not match the expression")
    pz, pg, po = scenario_projectors(sc)
    pbar = pz + pg
    kept = pbar.vecmat(phi.coeffs)
    if po.is_zero():
        return BellExpression(sc, kept, phi.bound)
    A = po @ sigma @ po.T
    row = (sigma @ po.T).vecmat(kept)  # kept Σ Π_Ωᵀ
    corr = po.vecmat(pseudo_inverse(A).vecmat(row))
    return BellExpression(sc, tuple(a - b for a, b in zip(kept, corr)), phi.bound)


def variance(phi: BellExpression, cov: CovarianceModel) -> Fraction:
    return cov.variance(phi.coeffs)

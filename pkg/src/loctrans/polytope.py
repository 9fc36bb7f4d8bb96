"""Exact convex geometry at desk scale.

Polytopes are stored in the full coefficient space with their equalities
explicit. Vertex and facet enumeration run the double description method
on integer rays inside the affine hull, parametrized by its free
coordinates so that results map back to full coefficient vectors exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import gcd
from typing import Iterable, Sequence

from .corr import BellExpression, Behavior, enumerate_deterministic
from .detmap import CapExceeded, relabelings
from .ineq import ZERO_BOUND, PRIMITIVE, canonicalize, constraint_forms
from .ratlin import (
    ONE,
    ZERO,
    RatMatrix,
    RatVector,
    as_rational,
    dot,
    integer_rank,
    kernel_basis,
    primitive_integer_vector,
    rref,
)
from .scenario import PartyCard, Scenario

DEFAULT_RAY_LIMIT = 200_000


@dataclass(frozen=True)
class HRep:
    """{x : E x = b, A x ≤ c}."""

    eq_A: RatMatrix
    eq_b: RatVector
    ineq_A: RatMatrix
    ineq_c: RatVector

    def __post_init__(self):
        object.__setattr__(self, "eq_b", tuple(as_rational(v) for v in self.eq_b))
        object.__setattr__(self, "ineq_c", tuple(as_rational(v) for v in self.ineq_c))
        if self.eq_A.nrows != len(self.eq_b) or self.ineq_A.nrows != len(self.ineq_c):
            raise ValueError("right-hand sides do not match the constraint rows")
        if self.eq_A.ncols != self.ineq_A.ncols:
            raise ValueError("equalities and inequalities have different widths")

    @property
    def ambient_dim(self) -> int:
        return self.eq_A.ncols

    def contains(self, x: Sequence[Fraction]) -> bool:
        return all(dot(r, x) == b for r, b in zip(self.eq_A.rows, self.eq_b)) and all(
            dot(r, x) <= c for r, c in zip(self.ineq_A.rows, self.ineq_c)
        )

    def __hash__(self) -> int:
        cached = self.__dict__.get("_hash")
        if cached is None:
            cached = hash((self.eq_A, self.eq_b, self.ineq_A, self.ineq_c))
            object.__setattr__(self, "_hash", cached)
        return cached

    def tight_rows(self, x: Sequence[Fraction]) -> list[int]:
        return [i for i, (r, c) in enumerate(zip(self.ineq_A.rows, self.ineq_c)) if dot(r, x) == c]


@dataclass(frozen=True)
class VRep:
    vertices: tuple[RatVector, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "vertices", tuple(tuple(as_rational(v) for v in p) for p in self.vertices)
        )

    def __len__(self) -> int:
        return len(self.vertices)


class Infeasible(ValueError):
    pass


@dataclass(frozen=True)
class AffineChart:
    """x = origin + basis · y where y are the free coordinates ``free``."""

    origin: RatVector
    basis: tuple[RatVector, ...]  # one column per free coordinate
    free: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.free)

    def point(self, y: Sequence[Fraction]) -> RatVector:
        x = list(self.origin)
        for yi, col in zip(y, self.basis):
            if yi:
                for j, c in enumerate(col):
                    if c:
                        x[j] += yi * c
        return tuple(x)

    def pull_row(self, a: Sequence[Fraction]) -> tuple[Fraction, RatVector]:
        """For a·x, the constant a·origin and the coefficients on y."""
        return dot(a, self.origin), tuple(dot(a, col) for col in self.basis)


def chart_from_equalities(E: RatMatrix, b: Sequence[Fraction]) -> AffineChart:
    n = E.ncols
    if E.nrows == 0:
        eye = tuple(tuple(ONE if i == j else ZERO for i in range(n)) for j in range(n))
        return AffineChart((ZERO,) * n, eye, tuple(range(n)))
    aug = E.hstack(RatMatrix([[v] for v in b], 1))
    R, pivots = rref(aug)
    if pivots and pivots[-1] == n:
        raise Infeasible("equalities are inconsistent")
    origin = [ZERO] * n
    for k, p in enumerate(pivots):
        origin[p] = R[k, n]
    pivset = set(pivots)
    free = tuple(j for j in range(n) if j not in pivset)
    basis = []
    for f in free:
        col = [ZERO] * n
        col[f] = ONE
        for k, p in enumerate(pivots):
            col[p] = -R[k, f]
        basis.append(tuple(col))
    return AffineChart(tuple(origin), tuple(basis), free)


@lru_cache(maxsize=32)
def chart(h: HRep) -> AffineChart:
    return chart_from_equalities(h.eq_A, h.eq_b)


def affine_dim(h: HRep) -> int:
    """Dimension of the affine space cut out by the equalities."""
    return chart(h).dim


def _int_row(values: Sequence[Fraction]) -> tuple[int, ...]:
    return primitive_integer_vector(values)[0]


@lru_cache(maxsize=32)
def _chart_rows(h: HRep) -> tuple[tuple[int, ...], ...]:
    ch = chart(h)
    return tuple(_int_row(ch.pull_row(r)[1]) for r in h.ineq_A.rows)


@lru_cache(maxsize=32)
def _integer_constraints(h: HRep):
    """Constraint rows scaled to integers, as (sparse row, rhs) pairs."""

    def scaled(row, rhs):
        ints, f = primitive_integer_vector(tuple(row) + (rhs,))
        return tuple((j, v) for j, v in enumerate(ints[:-1]) if v), ints[-1]

    eqs = tuple(scaled(r, b) for r, b in zip(h.eq_A.rows, h.eq_b))
    ineqs = tuple(scaled(r, c) for r, c in zip(h.ineq_A.rows, h.ineq_c))
    return eqs, ineqs


def _scaled_point(x: Sequence[Fraction]) -> tuple[list[int], int]:
    den = 1
    for q in x:
        den = den * q.denominator // gcd(den, q.denominator)
    return [int(q * den) for q in x], den


def extremal(P: Behavior | Sequence[Fraction], h: HRep) -> bool:
    """Rank test: tight inequalities plus equalities leave no free direction."""
    x = P.coeffs if isinstance(P, Behavior) else tuple(P)
    xi, den = _scaled_point(x)
    eqs, ineqs = _integer_constraints(h)
    for row, b in eqs:
        if sum(v * xi[j] for j, v in row) != b * den:
            raise ValueError("point does not satisfy the H-representation")
    rows = _chart_rows(h)
    tight = []
    for i, (row, c) in enumerate(ineqs):
        lhs = sum(v * xi[j] for j, v in row)
        if lhs > c * den:
            raise ValueError("point does not satisfy the H-representation")
        if lhs == c * den:
            tight.append(rows[i])
    return integer_rank(tight) == chart(h).dim


def ns_hrep(scenario: Scenario) -> HRep:
    """Normalization, the scenario's nonsignaling constraints and positivity."""
    tau, mus = constraint_forms(scenario)
    eq_rows = [tau] + list(mus)
    eq_b = [ONE] + [ZERO] * len(mus)
    d = scenario.dim
    ineq = [tuple(-ONE if i == j else ZERO for j in range(d)) for i in range(d)]
    return HRep(RatMatrix(eq_rows, d), tuple(eq_b), RatMatrix(ineq, d), (ZERO,) * d)


# double description -------------------------------------------------------


def _gcd_normalize(v: list[int]) -> tuple[int, ...]:
    g = 0
    for a in v:
        g = gcd(g, a)
    if g > 1:
        return tuple(a // g for a in v)
    return tuple(v)


def _idot(a: Sequence[int], r: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, r) if x)


def double_description(rows: Sequence[Sequence[int]], ray_limit: int = DEFAULT_RAY_LIMIT) -> list[tuple[int, ...]]:
    """Extreme rays of the pointed cone {v : row·v ≥ 0 for all rows}.

    Rows are inserted in the given order. Two rays are adjacent when no
    third ray vanishes on every constraint they both vanish on.
    """
    rows = [tuple(int(v) for v in r) for r in rows]
    if not rows:
        raise ValueError("no constraints")
    d = len(rows[0])
    # initial simplicial cone from the first independent rows
    chosen: list[int] = []
    basis_rows: list[tuple[int, ...]] = []
    for i, r in enumerate(rows):
        if integer_rank(basis_rows + [r]) > len(basis_rows):
            basis_rows.append(r)
            chosen.append(i)
            if len(chosen) == d:
                break
    if len(chosen) < d:
        raise ValueError("cone is not pointed (constraints have rank < dimension)")
    B = RatMatrix(basis_rows, d)
    aug = B.hstack(RatMatrix.identity(d))
    R, _ = rref(aug)
    inv_cols = [[R[i, d + j] for i in range(d)] for j in range(d)]
    rays = [_int_row(col) for col in inv_cols]
    chosen_mask = 0
    for i in chosen:
        chosen_mask |= 1 << i
    zsets = [chosen_mask & ~(1 << i) for i in chosen]
    processed = list(chosen)
    chosen_set = set(chosen)
    for i, a in enumerate(rows):
        if i in chosen_set:
            continue
        vals = [_idot(a, r) for r in rays]
        pos = [k for k, v in enumerate(vals) if v > 0]
        neg = [k for k, v in enumerate(vals) if v < 0]
        zer = [k for k, v in enumerate(vals) if v == 0]
        bit = 1 << i
        if not neg:
            for k in zer:
                zsets[k] |= bit
            processed.append(i)
            continue
        # per processed row, bitmask of rays vanishing on it
        raybits = {j: 0 for j in processed}
        for k, z in enumerate(zsets):
            kb = 1 << k
            zz = z
            while zz:
                low = zz & -zz
                j = low.bit_length() - 1
                raybits[j] |= kb
                zz ^= low
        need = d - 2
        new_rays = []
        new_z = []
        for p in pos:
            zp = zsets[p]
            rp = rays[p]
            vp = vals[p]
            pb = 1 << p
            for q in neg:
                common = zp & zsets[q]
                if common.bit_count() < need:
                    continue
                both = pb | (1 << q)
                acc = -1
                cc = common
                while cc:
                    low = cc & -cc
                    acc &= raybits[low.bit_length() - 1]
                    if acc == both:
                        break
                    cc ^= low
                if acc != both:
                    continue
                vq = vals[q]
                rq = rays[q]
                new_rays.append(_gcd_normalize([vp * y - vq * x for x, y in zip(rp, rq)]))
                new_z.append(common | bit)
        rays = [rays[k] for k in pos] + [rays[k] for k in zer] + new_rays
        zsets = [zsets[k] for k in pos] + [zsets[k] | bit for k in zer] + new_z
        processed.append(i)
        if len(rays) > ray_limit:
            raise CapExceeded(f"intermediate ray count {len(rays)} exceeds the limit {ray_limit}")
    return rays


def dd_vertices(h: HRep, ray_limit: int = DEFAULT_RAY_LIMIT, verify: bool = True) -> VRep:
    """Vertices of a bounded polytope given by inequalities and equalities."""
    try:
        ch = chart(h)
    except Infeasible:
        return VRep(())
    k = ch.dim
    if k == 0:
        x = ch.origin
        return VRep((x,) if h.contains(x) else ())
    rows = []
    for a, c in zip(h.ineq_A.rows, h.ineq_c):
        const, coef = ch.pull_row(a)
        slack = c - const
        if not any(coef):
            if slack < 0:
                return VRep(())
            continue
        rows.append(_int_row((slack,) + tuple(-v for v in coef)))
    rows.append((1,) + (0,) * k)
    rays = double_description(rows, ray_limit)
    verts = []
    for r in rays:
        t = r[0]
        if t == 0:
            raise ValueError("the polyhedron is unbounded")
        y = [Fraction(v, t) for v in r[1:]]
        verts.append(ch.point(y))
    verts.sort()
    out = VRep(tuple(verts))
    if verify:
        for v in out.vertices:
            if not h.contains(v) or not extremal(v, h):
                raise AssertionError("double description produced a non-vertex")
    return out


def affine_hull(vertices: Sequence[Sequence[Fraction]]) -> tuple[RatMatrix, RatVector]:
    """Equalities E x = b spanning all affine relations among the points."""
    n = len(vertices[0])
    M = RatMatrix([list(v) + [-ONE] for v in vertices], n + 1)
    rels = kernel_basis(M)
    E = RatMatrix([r[:n] for r in rels], n)
    b = tuple(r[n] for r in rels)
    return E, b


def dd_facets(v: VRep, ray_limit: int = DEFAULT_RAY_LIMIT, verify: bool = True) -> HRep:
    """Facets of conv(v): affine-hull equalities plus irredundant inequalities."""
    if not v.vertices:
        raise ValueError("empty vertex set")
    E, b = affine_hull(v.vertices)
    ch = chart_from_equalities(E, b)
    free = ch.free
    n = len(v.vertices[0])
    if not free:
        return HRep(E, b, RatMatrix([], n), ())
    # valid inequalities a·y ≤ β in free coordinates form the cone β − a·y_v ≥ 0
    rows = []
    for p in v.vertices:
        y = [p[j] for j in free]
        rows.append(_int_row([ONE] + [-c for c in y]))
    rays = double_description(rows, ray_limit)
    ineq_rows = []
    ineq_c = []
    for r in rays:
        beta = r[0]
        a = [ZERO] * n
        for j, c in zip(free, r[1:]):
            a[j] = Fraction(c)
        ineq_rows.append(tuple(a))
        ineq_c.append(Fraction(beta))
    order = sorted(range(len(ineq_rows)), key=lambda i: (ineq_rows[i], ineq_c[i]))
    h = HRep(E, b, RatMatrix([ineq_rows[i] for i in order], n), tuple(ineq_c[i] for i in order))
    if verify:
        _verify_facets(h, v)
    return h


def _verify_facets(h: HRep, v: VRep) -> None:
    ch = chart(h)
    ys = [_int_row([ONE] + [p[j] for j in ch.free]) for p in v.vertices]
    for r, c in zip(h.ineq_A.rows, h.ineq_c):
        vals = [dot(r, p) for p in v.vertices]
        if any(val > c for val in vals):
            raise AssertionError("facet cuts off a vertex")
        tight = [ys[i] for i, val in enumerate(vals) if val == c]
        if integer_rank(tight) != ch.dim:
            raise AssertionError("inequality is not facet-defining")


# polytope constructions ---------------------------------------------------


def deterministic_vertices(scenario: Scenario) -> VRep:
    return VRep(tuple(P.coeffs for P in enumerate_deterministic(scenario)))


def causal_vertices(card_a, card_b) -> VRep:
    """Deterministic behaviors of either fixed order A-then-B or B-then-A.

    Vectors live in the fully signaling two-party scenario.
    """
    a = card_a if isinstance(card_a, PartyCard) else PartyCard(card_a)
    b = card_b if isinstance(card_b, PartyCard) else PartyCard(card_b)
    seen: dict[RatVector, None] = {}
    for edges in ([(0, 1)], [(1, 0)]):
        for P in enumerate_deterministic(Scenario((a, b), edges)):
            seen.setdefault(P.coeffs, None)
    return VRep(tuple(seen))


# facet classification -----------------------------------------------------


@dataclass(frozen=True)
class FacetClass:
    representative: BellExpression
    orbit_size: int
    members: tuple[BellExpression, ...] = field(default=())


def relabeling_permutations(scenario: Scenario) -> list[tuple[int, ...]]:
    """Coefficient permutations π with (φΛ)_j = φ_{π(j)} for every relabeling Λ."""
    per_party = []
    for card in scenario.parties:
        perms = []
        for m in relabelings(card):
            hits = m.image_positions()
            perms.append(tuple(h[0] for h in hits))
        per_party.append(perms)
    dims = scenario.dims
    out = []
    for combo in product(*per_party):
        perm = []
        for idx in product(*(range(d) for d in dims)):
            pos = 0
            for k, i in enumerate(idx):
                pos = pos * dims[k] + combo[k][i]
            perm.append(pos)
        out.append(tuple(perm))
    return out


def classify_facets(h: HRep, scenario: Scenario, keep_members: bool = True) -> list[FacetClass]:
    """Group facets into orbits of the per-party relabeling group.

    Each facet is first put in zero-bound canonical form with primitive
    integer coefficients; relabelings then act by permuting coefficients.
    """
    canon = []
    for r, c in zip(h.ineq_A.rows, h.ineq_c):
        cf = canonicalize(BellExpression(scenario, r, c), ZERO_BOUND, PRIMITIVE)
        canon.append(cf.coeffs)
    pool = set(canon)
    perms = relabeling_permutations(scenario)
    classes = []
    remaining = set(pool)
    for v in sorted(pool):
        if v not in remaining:
            continue
        orbit = {tuple(v[p] for p in perm) for perm in perms}
        missing = orbit - pool
        if missing:
            raise ValueError("facet set is not closed under relabelings")
        remaining -= orbit
        members = tuple(BellExpression(scenario, w, 0) for w in sorted(orbit)) if keep_members else ()
        rep = min(orbit)
        classes.append(FacetClass(BellExpression(scenario, rep, 0), len(orbit), members))
    return classes


def facet_families(h: HRep, scenario: Scenario, families: dict) -> dict[str, int]:
    """Count facets matching each named family of inequalities.

    Facets and family members are compared in zero-bound primitive form.
    Facets matching no family are counted under ``"other"``.
    """
    lookup: dict[RatVector, str] = {}
    for name, members in families.items():
        for phi in members:
            lookup.setdefault(canonicalize(phi, ZERO_BOUND, PRIMITIVE).coeffs, name)
    counts = {name: 0 for name in families}
    counts["other"] = 0
    for r, c in zip(h.ineq_A.rows, h.ineq_c):
        key = canonicalize(BellExpression(scenario, r, c), ZERO_BOUND, PRIMITIVE).coeffs
        counts[lookup.get(key, "other")] += 1
    return counts

import os
import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from loctrans.detmap import DetMap
from loctrans.scenario import PartyCard

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def acceptance_line():
    def record(n: int, ok: bool, detail: str) -> None:
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[n] = line
        print(line)

    return record


# strategies ---------------------------------------------------------------

small_fractions = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def cards(max_inputs: int = 3, max_outputs: int = 3, min_outputs: int = 1):
    return st.lists(st.integers(min_outputs, max_outputs), min_size=1, max_size=max_inputs).map(PartyCard)


@st.composite
def detmaps(draw, source=None, target=None, max_inputs=3, max_outputs=3):
    src = source if source is not None else draw(cards(max_inputs, max_outputs))
    tgt = target if target is not None else draw(cards(max_inputs, max_outputs))
    xi = [draw(st.integers(1, src.X)) for _ in range(tgt.X)]
    alphas = [
        [draw(st.integers(1, tgt.A(z))) for _ in range(src.A(x))]
        for z, x in enumerate(xi, start=1)
    ]
    return DetMap(src, tgt, xi, alphas)


@st.composite
def rat_matrices(draw, max_rows=4, max_cols=4, elements=small_fractions):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    return [[draw(elements) for _ in range(c)] for _ in range(r)]


# seeded helpers for fixed-count suites ------------------------------------


def random_card(rng: random.Random, max_inputs: int = 3, max_outputs: int = 3) -> PartyCard:
    return PartyCard(rng.randint(1, max_outputs) for _ in range(rng.randint(1, max_inputs)))


def random_detmap(rng: random.Random, src: PartyCard, tgt: PartyCard) -> DetMap:
    xi = [rng.randint(1, src.X) for _ in range(tgt.X)]
    alphas = [[rng.randint(1, tgt.A(z)) for _ in range(src.A(x))] for z, x in enumerate(xi, start=1)]
    return DetMap(src, tgt, xi, alphas)


def random_fraction(rng: random.Random, lo: int = -5, hi: int = 5, den: int = 6) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den), rng.randint(1, den))


def _random_distribution(rng: random.Random, n: int, max_weight: int = 4) -> list[Fraction]:
    w = [rng.randint(0, max_weight) for _ in range(n)]
    if not any(w):
        w[rng.randrange(n)] = 1
    total = sum(w)
    return [Fraction(v, total) for v in w]


def random_valid_matrix(rng: random.Random, src: PartyCard, tgt: PartyCard):
    """Λ_{(a',x'),(a,x)} = P(x|x') P(a'|a,x,x') with random rational kernels."""
    from loctrans.ratlin import RatMatrix

    rows = [[Fraction(0)] * src.dim for _ in range(tgt.dim)]
    for z in range(1, tgt.X + 1):
        px = _random_distribution(rng, src.X)
        for x in range(1, src.X + 1):
            if not px[x - 1]:
                continue
            for a in range(1, src.A(x) + 1):
                pa = _random_distribution(rng, tgt.A(z))
                for a2 in range(1, tgt.A(z) + 1):
                    rows[tgt.flatten(a2, z)][src.flatten(a, x)] = px[x - 1] * pa[a2 - 1]
    return RatMatrix(rows, src.dim)


def perturb_matrix(rng: random.Random, M, src: PartyCard, tgt: PartyCard):
    """Normalization-preserving perturbation that usually breaks nonnegativity."""
    from loctrans.ratlin import RatMatrix

    rows = [list(r) for r in M.rows]
    z = rng.randint(1, tgt.X)
    r0 = tgt.offsets[z - 1]
    delta = Fraction(rng.randint(1, 6), rng.randint(1, 3))
    if src.X > 1 and rng.random() < 0.5:
        # move input weight between two source inputs, same output kernel
        x1, x2 = rng.sample(range(1, src.X + 1), 2)
        for a in range(1, src.A(x1) + 1):
            rows[r0][src.flatten(a, x1)] += delta
        for a in range(1, src.A(x2) + 1):
            rows[r0][src.flatten(a, x2)] -= delta
    elif tgt.A(z) > 1:
        x = rng.randint(1, src.X)
        a = rng.randint(1, src.A(x))
        i, j = rng.sample(range(tgt.A(z)), 2)
        col = src.flatten(a, x)
        rows[r0 + i][col] += delta
        rows[r0 + j][col] -= delta
    else:
        col = rng.randrange(src.dim)
        rows[r0][col] -= delta
    return RatMatrix(rows, src.dim)

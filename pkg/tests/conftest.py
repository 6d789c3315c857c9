import random

import pytest
from hypothesis import strategies as st

from circlesum.polysys import Polynomial


def random_polynomial(rng: random.Random, n: int, max_deg: int, terms: int = 5,
                      coef: int = 9, homogeneous: int | None = None) -> Polynomial:
    coeffs = {}
    for _ in range(terms):
        if homogeneous is not None:
            exps = [0] * n
            for _ in range(homogeneous):
                exps[rng.randrange(n)] += 1
        else:
            deg = rng.randint(0, max_deg)
            exps = [0] * n
            for _ in range(deg):
                exps[rng.randrange(n)] += 1
        coeffs[tuple(exps)] = coeffs.get(tuple(exps), 0) + rng.randint(-coef, coef)
    return Polynomial(n, coeffs)


@st.composite
def polynomials(draw, n=2, max_deg=3, coef=20):
    k = draw(st.integers(0, 6))
    coeffs = {}
    for _ in range(k):
        exps = tuple(draw(st.lists(st.integers(0, max_deg), min_size=n, max_size=n)))
        coeffs[exps] = draw(st.integers(-coef, coef))
    return Polynomial(n, coeffs)


@pytest.fixture
def rng():
    return random.Random(20240601)

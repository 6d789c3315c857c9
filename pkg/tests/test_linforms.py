import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from circlesum.errors import ShapeError
from circlesum.linforms import LinearBlock, b1, b1_support, restrict, restriction_gap
from circlesum.polysys import GradedSystem, parse_polynomial
from circlesum.weyl import rank_exact


def lam_oracle(M, L):
    """Minimum support of lambda^T M over integer lambda in [-L, L]^r minus 0."""
    M = np.asarray(M, dtype=np.int64)
    r = M.shape[0]
    lams = np.array(list(itertools.product(range(-L, L + 1), repeat=r)), dtype=np.int64)
    lams = lams[np.any(lams != 0, axis=1)]
    return int(np.count_nonzero(lams @ M, axis=1).min())


L = LinearBlock.from_rows


@pytest.mark.parametrize("rows,expected", [
    ([[1, 0], [0, 1]], 1),
    ([[1, 1, 1]], 3),
    ([[1, 1, 0], [0, 1, 1]], 2),
    ([[1], [1]], 0),
])
def test_b1_examples(rows, expected):
    assert b1(L(rows)) == expected


def test_b1_empty_is_infinite():
    assert b1(LinearBlock((), 4)) == math.inf
    assert b1_support(LinearBlock((), 4)) is None


def test_support_is_lexicographically_first():
    assert b1_support(L([[1, 1, 0], [0, 1, 1]])) == (0, 1)
    assert b1_support(L([[1, 1, 1], [0, 1, 1]])) == (0,)
    assert b1_support(L([[1, 2, 3]])) == (0, 1, 2)


def test_from_system():
    s = GradedSystem.from_blocks(3, {1: ["x1 + x2 - 2", "x2 + x3"], 2: ["x1^2"]})
    blk = LinearBlock.from_system(s)
    assert blk.M == ((1, 1, 0), (0, 1, 1))
    with pytest.raises(ShapeError):
        LinearBlock.from_forms([parse_polynomial("x1*x2", 2)], 2)


def test_restrict_examples():
    assert restrict(L([[1, 1, 1]]), 1).M == ((0, 1, 1),)
    blk = LinearBlock.from_rows([[1, 0, 0], [0, 1, 0]])
    assert restrict(blk, 3) == blk
    assert restrict(L([[1]]), 1).M == ((0,),)
    with pytest.raises(ShapeError):
        restrict(L([[1, 2]]), 3)
    with pytest.raises(ShapeError):
        restrict(L([[1, 2]]), 0)


def test_gap_examples():
    assert restriction_gap(L([[1, 1, 1]]), 1) == -1
    assert restriction_gap(LinearBlock.from_rows([[1, 0, 0], [0, 1, 0]]), 3) == 0
    assert restriction_gap(L([[1]]), 1) == -1


def test_positive_iff_independent(rng):
    for _ in range(300):
        r, n = rng.randint(1, 3), rng.randint(1, 5)
        M = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(r)]
        assert (b1(L(M)) > 0) == (rank_exact(M) == r)


def test_matches_oracle_random(rng):
    # a minimal lambda is a kernel vector of a rank r-1 column subset, so by
    # Cramer its entries are (r-1)-minors: |lambda| <= 3 for r = 2 and
    # <= 18 for r = 3 with entries in [-3, 3]
    for _ in range(300):
        r, n = rng.randint(1, 3), rng.randint(1, 6)
        M = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(r)]
        assert b1(L(M)) == lam_oracle(M, {1: 1, 2: 3, 3: 18}[r])


def test_small_box_oracle_is_only_an_upper_bound():
    M = [[-1, -3], [3, 0], [3, -2]]
    assert b1(L(M)) == 0
    assert lam_oracle(M, 10) == 1
    assert lam_oracle(M, 11) == 0


def test_gap_lower_bound_random(rng):
    for _ in range(300):
        r, n = rng.randint(1, 3), rng.randint(1, 6)
        M = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(r)]
        for j in range(1, n + 1):
            assert restriction_gap(L(M), j) >= -1


def test_row_operation_invariance(rng):
    for _ in range(200):
        r, n = rng.randint(1, 3), rng.randint(1, 6)
        M = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(r)]
        base = b1(L(M))
        perm = M[:]
        rng.shuffle(perm)
        assert b1(L(perm)) == base
        i = rng.randrange(r)
        c = rng.choice([-3, -2, 2, 5])
        scaled = [row if k != i else [v * c for v in row] for k, row in enumerate(M)]
        assert b1(L(scaled)) == base
        if r > 1:
            a, c = rng.sample(range(r), 2)
            t = rng.randint(-4, 4)
            added = [row if k != a else [x + t * y for x, y in zip(row, M[c])]
                     for k, row in enumerate(M)]
            assert b1(L(added)) == base

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from phyloag.exactalg import (Poly, Rat, mat_det, mat_rank_nullspace, minors,
                              normalize_poly, parse_poly, rat)

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=20)


def test_rat_from_string():
    assert rat("3/4") == Rat(3, 4)
    assert rat("-7") == Rat(-7)
    assert rat(5, 10) == Rat(1, 2)


def test_poly_basic_arithmetic():
    x, y = Poly.var("x"), Poly.var("y")
    p = (x + y) * (x - y)
    assert p == x * x - y * y
    assert (p - p).is_zero()
    assert p.degree() == 2
    assert (x + 1) ** 3 == x ** 3 + 3 * x ** 2 + 3 * x + 1


def test_poly_eval_and_derivative():
    x, y = Poly.var("x"), Poly.var("y")
    p = 3 * x ** 2 * y - y + 7
    assert p.eval({"x": Rat(2), "y": Rat(1, 3)}) == Rat(4) - Rat(1, 3) + 7
    assert p.derivative("x") == 6 * x * y
    assert p.derivative("y") == 3 * x ** 2 - 1
    with pytest.raises(KeyError):
        p.eval({"x": 1})


def test_substitute_expands():
    x, y, u = Poly.var("x"), Poly.var("y"), Poly.var("u")
    p = x ** 2 + y
    q = p.substitute({"x": u + 1, "y": Poly.const(2)})
    assert q == u ** 2 + 2 * u + 3


def test_coefficient_lookup():
    x, y = Poly.var("x"), Poly.var("y")
    p = 5 * x ** 2 * y - Rat(1, 2) * y
    assert p.coefficient({"x": 2, "y": 1}) == 5
    assert p.coefficient({"y": 1}) == Rat(-1, 2)
    assert p.coefficient({"x": 1}) == 0


@st.composite
def polys(draw):
    nterms = draw(st.integers(0, 5))
    p = Poly()
    for _ in range(nterms):
        c = draw(rationals)
        if c == 0:
            continue
        mono = Poly.const(Rat(c.numerator, c.denominator))
        for name in ("x", "y", "z"):
            mono = mono * Poly.var(name, draw(st.integers(0, 3)))
        p = p + mono
    return p


@given(polys())
@settings(max_examples=60)
def test_text_round_trip(p):
    assert parse_poly(str(p)) == p


@given(polys(), polys())
@settings(max_examples=40)
def test_ring_laws(p, q):
    assert p + q == q + p
    assert p * q == q * p
    assert (p + q) * p == p * p + q * p


def test_normalize_poly():
    x, y = Poly.var("x"), Poly.var("y")
    p = Rat(-2, 3) * x * y + Rat(4, 3) * y ** 2
    n = normalize_poly(p)
    assert n == x * y - 2 * y ** 2
    assert normalize_poly(n) == n
    assert normalize_poly(Poly()).is_zero()


# -- matrices ---------------------------------------------------------------


def naive_rank(mat):
    """Plain fraction Gaussian elimination, used as an oracle."""
    m = [[Fraction(int(x.numerator), int(x.denominator)) for x in row]
         for row in mat]
    rank = 0
    ncols = len(m[0])
    for c in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                f = m[i][c] / m[rank][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def perm_det(mat):
    n = len(mat)
    total = Rat(0)
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = Rat(sign)
        for i in range(n):
            term *= Rat(mat[i][perm[i]])
        total += term
    return total


def rand_matrix(rng, nrows, ncols, lowrank=None):
    if lowrank is None:
        return [[Rat(rng.randint(-9, 9), rng.randint(1, 9))
                 for _ in range(ncols)] for _ in range(nrows)]
    left = rand_matrix(rng, nrows, lowrank)
    right = rand_matrix(rng, lowrank, ncols)
    return [[sum((left[i][t] * right[t][j] for t in range(lowrank)), Rat(0))
             for j in range(ncols)] for i in range(nrows)]


def test_rank_matches_naive_elimination():
    rng = random.Random(5)
    for trial in range(20):
        nrows, ncols = rng.randint(1, 6), rng.randint(1, 6)
        lr = rng.choice([None, 1, 2])
        mat = rand_matrix(rng, nrows, ncols, lowrank=lr)
        rank, basis = mat_rank_nullspace(mat)
        assert rank == naive_rank(mat)
        assert rank + len(basis) == ncols


def test_nullspace_vectors_annihilate():
    rng = random.Random(11)
    for trial in range(10):
        mat = rand_matrix(rng, 4, 6, lowrank=2)
        _, basis = mat_rank_nullspace(mat)
        for v in basis:
            for row in mat:
                assert sum((a * b for a, b in zip(row, v)), Rat(0)) == 0


def test_det_matches_permanent_expansion():
    rng = random.Random(3)
    for n in (1, 2, 3, 4):
        for _ in range(5):
            mat = rand_matrix(rng, n, n)
            assert mat_det(mat) == perm_det(mat)


def test_det_singular():
    mat = [[Rat(1), Rat(2)], [Rat(2), Rat(4)]]
    assert mat_det(mat) == 0


def test_det_polynomial_entries():
    a, b, c, d = (Poly.var(n) for n in "abcd")
    assert mat_det([[a, b], [c, d]]) == a * d - b * c


def test_minors_order_and_count():
    mat = [[Rat(i * 3 + j + 1) for j in range(3)] for i in range(2)]
    out = minors(mat, 2)
    assert len(out) == 3
    # first minor = rows (0,1), cols (0,1)
    assert out[0] == mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    with pytest.raises(ValueError):
        minors(mat, 3)


def test_empty_matrix_rank():
    rank, basis = mat_rank_nullspace([])
    assert rank == 0 and basis == []

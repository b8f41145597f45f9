import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from exactinterp.kron import det_exact
from exactinterp.symcomb import (
    SingularSystemError,
    binomial,
    central_binomial,
    elem_sym,
    gen_vandermonde_minor,
    solve_cramer_univariate,
    vandermonde_det,
)
from oracles import det_leibniz, elem_sym_enumerate

F = Fraction
small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=12)


def vandermonde_rows(nodes):
    n = len(nodes)
    return [[x ** j for j in range(n)] for x in nodes]


def direct_minor(nodes, i, j):
    rows = vandermonde_rows(nodes)
    sub = [r[:j] + r[j + 1:] for k, r in enumerate(rows) if k != i]
    return det_leibniz(sub) if sub else F(1)


@pytest.mark.parametrize("k,expected", [(0, 1), (2, 11), (3, 6), (4, 0)])
def test_elem_sym_small(k, expected):
    vals = [F(1), F(2), F(3)]
    assert elem_sym_enumerate(k, vals) == expected
    assert elem_sym(k, vals) == expected


@given(st.lists(small_fracs, max_size=8), st.integers(0, 8))
def test_elem_sym_matches_enumeration(vals, k):
    if k > len(vals):
        assert elem_sym(k, vals) == 0
    else:
        assert elem_sym(k, vals) == elem_sym_enumerate(k, vals)


def pascal(n):
    row = [1]
    for _ in range(n):
        row = [a + b for a, b in zip([0] + row, row + [0])]
    return row


def test_binomial_examples():
    assert binomial(8, 4) == pascal(8)[4] == 70
    assert binomial(11, 0) == 1
    assert binomial(3, 1) == 3
    assert binomial(3, 5) == 0


def test_central_binomial_is_row_max():
    for n in range(0, 65):
        row = pascal(n)
        assert max(row) == central_binomial(n) == binomial(n, n // 2)


def test_leave_one_out_symmetric_sum():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(1, 10)
        xs = [F(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(n + 1)]
        k = rng.randint(0, n)
        lhs = sum(elem_sym(k, xs[:j] + xs[j + 1:]) for j in range(n + 1))
        assert lhs == (n + 1 - k) * elem_sym(k, xs)


def test_vandermonde_det():
    assert vandermonde_det([F(1), F(2), F(3)]) == 2
    assert vandermonde_det([F(5)]) == 1
    assert vandermonde_det([]) == 1
    assert vandermonde_det([F(1), F(4), F(1)]) == 0


@given(st.lists(small_fracs, min_size=1, max_size=5))
def test_vandermonde_det_matches_elimination(nodes):
    assert vandermonde_det(nodes) == det_exact(vandermonde_rows(nodes))


@pytest.mark.parametrize("i,j,expected", [(0, 1, 5), (2, 2, 1), (1, 0, 6)])
def test_minor_examples(i, j, expected):
    nodes = [F(1), F(2), F(3)]
    assert direct_minor(nodes, i, j) == expected
    assert gen_vandermonde_minor(nodes, i, j) == expected


def test_minor_index_checked():
    with pytest.raises(IndexError):
        gen_vandermonde_minor([F(1), F(2)], 2, 0)


def test_minor_identity_random():
    rng = random.Random(11)
    for _ in range(50):
        n = rng.randint(1, 6)
        nodes = [F(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n + 1)]
        for i in range(n + 1):
            for j in range(n + 1):
                assert gen_vandermonde_minor(nodes, i, j) == direct_minor(nodes, i, j)


def test_cramer_examples():
    assert solve_cramer_univariate([F(0), F(1), F(2)], [F(1), F(2), F(5)]) == [1, 0, 1]
    c = F(7, 3)
    assert solve_cramer_univariate([F(0), F(1)], [c, c]) == [c, 0]
    assert solve_cramer_univariate([F(0), F(1), F(2)], [F(0)] * 3) == [0, 0, 0]


def test_cramer_repeated_nodes():
    with pytest.raises(SingularSystemError):
        solve_cramer_univariate([F(1), F(1)], [F(0), F(1)])


def test_cramer_recovers_polynomial():
    rng = random.Random(5)
    for _ in range(40):
        n = rng.randint(0, 8)
        coeffs = [F(rng.randint(-30, 30), rng.randint(1, 12)) for _ in range(n + 1)]
        nodes = rng.sample(range(-15, 15), n + 1)
        nodes = [F(x, rng.randint(1, 3)) for x in nodes]
        if len(set(nodes)) != len(nodes):
            continue
        data = [sum(c * x ** k for k, c in enumerate(coeffs)) for x in nodes]
        assert solve_cramer_univariate(nodes, data) == coeffs

"""Elementary symmetric polynomials, binomials and Vandermonde determinants.

Everything here is exact.  :func:`solve_cramer_univariate` is the closed-form
(cofactor) interpolation solver; it is slow and exists as a reference for the
Newton solver in :mod:`exactinterp.interp`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence


class SingularSystemError(ArithmeticError):
    """Raised when a linear system has no unique solution."""


def elem_sym(k: int, values: Sequence[Fraction]) -> Fraction:
    """Sum over all k-subsets of ``values`` of the subset product.

    ``k == 0`` gives 1 and ``k > len(values)`` gives 0.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > len(values):
        return Fraction(0)
    # e[j] holds the degree-j symmetric polynomial of the prefix seen so far
    e = [Fraction(1)] + [Fraction(0)] * k
    for v in values:
        for j in range(k, 0, -1):
            e[j] += v * e[j - 1]
    return e[k]


def binomial(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def central_binomial(n: int) -> int:
    """Largest binomial coefficient of row ``n``, C(n, floor(n/2))."""
    return math.comb(n, n // 2)


def vandermonde_det(nodes: Sequence[Fraction]) -> Fraction:
    det = Fraction(1)
    for j in range(len(nodes)):
        for i in range(j):
            det *= nodes[j] - nodes[i]
    return det


def gen_vandermonde_minor(nodes: Sequence[Fraction], i: int, j: int) -> Fraction:
    """Minor of the Vandermonde matrix with row ``i`` and column ``j`` deleted.

    Rows are ``(1, x, x^2, ..., x^n)``; the minor factors as
    ``e_{n-j}(rest) * V(rest)`` where ``rest`` omits ``nodes[i]``.
    """
    n = len(nodes) - 1
    if not (0 <= i <= n and 0 <= j <= n):
        raise IndexError(f"minor index ({i}, {j}) out of range for {n + 1} nodes")
    rest = list(nodes[:i]) + list(nodes[i + 1:])
    return elem_sym(n - j, rest) * vandermonde_det(rest)


def assert_distinct(nodes: Sequence[Fraction]) -> None:
    seen = set()
    for x in nodes:
        if x in seen:
            raise SingularSystemError(f"repeated interpolation node {x}")
        seen.add(x)


def solve_cramer_univariate(nodes: Sequence[Fraction], data: Sequence[Fraction]) -> list[Fraction]:
    """Monomial coefficients of the interpolant via the cofactor formula."""
    if len(nodes) != len(data):
        raise ValueError("nodes and data must have equal length")
    assert_distinct(nodes)
    n1 = len(nodes)
    vdet = vandermonde_det(nodes)
    coeffs = []
    for j in range(n1):
        acc = Fraction(0)
        for i in range(n1):
            if data[i]:
                term = gen_vandermonde_minor(nodes, i, j) * data[i]
                acc += term if (i + j) % 2 == 0 else -term
        coeffs.append(acc / vdet)
    return coeffs

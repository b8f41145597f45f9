"""Error budgets for exact recovery from approximate interpolation data.

With ``n_k`` the degree bound in variable ``k``, ``lambda_k`` the smallest
gap between its nodes and ``M_k = max(1, max |node|)``, perturbing every
datum by less than

    eps = prod(lambda_k**n_k) / (2 N**2 * prod((n_k+1) * M_k**n_k * C(n_k, n_k//2)))

moves every interpolated coefficient by less than ``1 / (2 N**2)``, which is
exactly the tolerance continued-fraction recovery needs for denominators up
to ``N``.  All arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .expr import Add, Const, Det, Expr, Mul, Neg, Pow, Sub, UnsupportedExpressionError, Var
from .symcomb import central_binomial


class DuplicateNodeError(ValueError):
    pass


@dataclass(frozen=True)
class NodeStats:
    """Smallest node gap and ``max(1, max |node|)`` for one variable."""

    lam: Fraction
    m_bound: Fraction

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("minimum node gap must be positive")
        if self.m_bound < 1:
            raise ValueError("node magnitude bound must be >= 1")


def node_stats(nodes: Sequence[Fraction]) -> NodeStats:
    """Exact gap/magnitude statistics; a single node gets gap 1 by convention."""
    if not nodes:
        raise ValueError("need at least one node")
    xs = sorted(Fraction(x) for x in nodes)
    m = max(Fraction(1), max(abs(x) for x in xs))
    if len(xs) == 1:
        return NodeStats(Fraction(1), m)
    gaps = [b - a for a, b in zip(xs, xs[1:])]
    lam = min(gaps)
    if lam == 0:
        dup = xs[gaps.index(lam)]
        raise DuplicateNodeError(f"node {dup} appears more than once")
    return NodeStats(lam, m)


def _check_n(N: int) -> None:
    if N < 2:
        raise ValueError(f"denominator bound must be >= 2, got {N}")


def _amplification(n: int, s: NodeStats) -> Fraction:
    # worst-case growth of a data error into one coefficient, along one axis
    return (n + 1) * central_binomial(n) * s.m_bound ** n / s.lam ** n


def epsilon_multivariate(degrees: Sequence[int], stats: Sequence[NodeStats], N: int) -> Fraction:
    if len(degrees) != len(stats):
        raise ValueError("degrees and node stats differ in length")
    _check_n(N)
    eps = Fraction(1, 2 * N * N)
    for n, s in zip(degrees, stats):
        eps /= _amplification(n, s)
    return eps


def epsilon_univariate(n: int, stats: NodeStats, N: int) -> Fraction:
    return epsilon_multivariate([n], [stats], N)


def coefficient_error_bound(degrees: Sequence[int], stats: Sequence[NodeStats], eps: Fraction) -> Fraction:
    """Largest possible coefficient deviation when every datum is off by at most ``eps``."""
    if len(degrees) != len(stats):
        raise ValueError("degrees and node stats differ in length")
    out = Fraction(eps)
    for n, s in zip(degrees, stats):
        out *= _amplification(n, s)
    return out


@dataclass(frozen=True)
class BoundSet:
    degrees: tuple[int, ...]
    denom_bound: int
    stats: tuple[NodeStats, ...]
    epsilon: Fraction

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.epsilon != epsilon_multivariate(self.degrees, self.stats, self.denom_bound):
            raise ValueError("epsilon does not match the degree/node/denominator bounds")

    @classmethod
    def build(cls, degrees: Sequence[int], stats: Sequence[NodeStats], N: int) -> "BoundSet":
        return cls(tuple(degrees), N, tuple(stats), epsilon_multivariate(degrees, stats, N))

    @property
    def coefficient_tolerance(self) -> Fraction:
        return coefficient_error_bound(self.degrees, self.stats, self.epsilon)


# -- structural estimates ----------------------------------------------------

def estimate_degree_bounds(expr: Expr, variables: Sequence[str]) -> list[int]:
    """Per-variable degree bound read off the tree shape."""
    index = {v: i for i, v in enumerate(variables)}
    r = len(variables)

    def walk(e) -> list[int]:
        if isinstance(e, Const):
            return [0] * r
        if isinstance(e, Var):
            out = [0] * r
            if e.name in index:
                out[index[e.name]] = 1
            return out
        if isinstance(e, Add):
            parts = [walk(a) for a in e.args]
            return [max(p[k] for p in parts) for k in range(r)]
        if isinstance(e, Sub):
            a, b = walk(e.left), walk(e.right)
            return [max(x, y) for x, y in zip(a, b)]
        if isinstance(e, Neg):
            return walk(e.arg)
        if isinstance(e, Mul):
            parts = [walk(a) for a in e.args]
            return [sum(p[k] for p in parts) for k in range(r)]
        if isinstance(e, Pow):
            return [e.exp * d for d in walk(e.base)]
        if isinstance(e, Det):
            total = [0] * r
            for row in e.rows:
                parts = [walk(x) for x in row]
                for k in range(r):
                    total[k] += max(p[k] for p in parts)
            return total
        raise UnsupportedExpressionError(f"cannot bound the degree of {e!r}")

    return walk(expr)


def estimate_denominator_bound(expr: Expr) -> int:
    """A common denominator of all coefficients (hence a bound), at least 2.

    Rules: constant ``p/q`` gives ``q``; sums and products multiply operand
    bounds; powers raise them; a determinant multiplies all entry bounds.
    """

    def walk(e) -> int:
        if isinstance(e, Const):
            return e.value.denominator
        if isinstance(e, Var):
            return 1
        if isinstance(e, (Add, Mul)):
            out = 1
            for a in e.args:
                out *= walk(a)
            return out
        if isinstance(e, Sub):
            return walk(e.left) * walk(e.right)
        if isinstance(e, Neg):
            return walk(e.arg)
        if isinstance(e, Pow):
            return walk(e.base) ** e.exp
        if isinstance(e, Det):
            out = 1
            for row in e.rows:
                for x in row:
                    out *= walk(x)
            return out
        raise UnsupportedExpressionError(f"cannot bound the denominators of {e!r}")

    return max(2, walk(expr))

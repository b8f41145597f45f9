"""Exact rational matrices, Kronecker products and the two-step Kronecker solve."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .symcomb import SingularSystemError


@dataclass(frozen=True)
class RMatrix:
    """Dense row-major matrix of exact rationals."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("matrix dimensions must be positive")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(f"expected {self.rows * self.cols} entries, got {len(self.entries)}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RMatrix":
        if not rows or not rows[0]:
            raise ValueError("empty matrix")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), width, tuple(Fraction(v) for r in rows for v in r))

    @classmethod
    def identity(cls, n: int, scale=1) -> "RMatrix":
        s = Fraction(scale)
        return cls(n, n, tuple(s if i == j else Fraction(0) for i in range(n) for j in range(n)))

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def to_rows(self) -> list[list[Fraction]]:
        c = self.cols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.rows)]

    @property
    def T(self) -> "RMatrix":
        return RMatrix(self.cols, self.rows,
                       tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def __matmul__(self, other: "RMatrix") -> "RMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        a, b = self.to_rows(), other.to_rows()
        out = []
        for i in range(self.rows):
            ai = a[i]
            for j in range(other.cols):
                out.append(sum((ai[k] * b[k][j] for k in range(self.cols)), Fraction(0)))
        return RMatrix(self.rows, other.cols, tuple(out))

    def scale(self, c) -> "RMatrix":
        c = Fraction(c)
        return RMatrix(self.rows, self.cols, tuple(c * v for v in self.entries))


def kron(a: RMatrix, b: RMatrix) -> RMatrix:
    """Block matrix ``[a_ij * b]``."""
    rows, cols = a.rows * b.rows, a.cols * b.cols
    out = []
    for i in range(a.rows):
        for p in range(b.rows):
            for j in range(a.cols):
                aij = a[i, j]
                out.extend(aij * b[p, q] for q in range(b.cols))
    return RMatrix(rows, cols, tuple(out))


def vec_cols(x: RMatrix) -> list[Fraction]:
    """Stack the columns of ``x`` top to bottom, first column first."""
    return [x[i, j] for j in range(x.cols) for i in range(x.rows)]


def unvec_cols(v: Sequence[Fraction], rows: int, cols: int) -> RMatrix:
    if len(v) != rows * cols:
        raise ValueError("length does not match shape")
    return RMatrix(rows, cols, tuple(Fraction(v[j * rows + i]) for i in range(rows) for j in range(cols)))


def det_exact(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by Gaussian elimination with first-nonzero pivoting."""
    m = [[Fraction(v) for v in r] for r in rows]
    n = len(m)
    if any(len(r) != n for r in m):
        raise ValueError("determinant needs a square matrix")
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        p = m[col][col]
        det *= p
        for r in range(col + 1, n):
            f = m[r][col]
            if f:
                f /= p
                row, prow = m[r], m[col]
                for c in range(col + 1, n):
                    row[c] -= f * prow[c]
    return det


def solve_exact(a: RMatrix, c: RMatrix, name: str = "matrix") -> RMatrix:
    """Solve ``a @ x = c`` for square nonsingular ``a``."""
    n = a.rows
    if a.cols != n:
        raise ValueError(f"{name} must be square")
    if c.rows != n:
        raise ValueError(f"right-hand side has {c.rows} rows, {name} has {n}")
    k = c.cols
    m = [ar + cr for ar, cr in zip(a.to_rows(), c.to_rows())]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise SingularSystemError(f"{name} is singular")
        m[col], m[piv] = m[piv], m[col]
        prow = m[col]
        p = prow[col]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col] / p
                row = m[r]
                for cc in range(col, n + k):
                    row[cc] -= f * prow[cc]
    return RMatrix(n, k, tuple(m[i][n + j] / m[i][i] for i in range(n) for j in range(k)))


def solve_kron_2d(a: RMatrix, b: RMatrix, c: RMatrix) -> RMatrix:
    """Find ``X`` with ``a @ X @ b.T == c``, i.e. ``kron(b, a) vec(X) = vec(c)``.

    Two small solves, ``a Y = c`` then ``b X^T = Y^T``; the Kronecker
    product itself is never formed.
    """
    if c.rows != a.rows or c.cols != b.rows:
        raise ValueError("shapes do not conform to a @ X @ b.T = c")
    y = solve_exact(a, c, name="left factor a")
    xt = solve_exact(b, y.T, name="right factor b")
    return xt.T

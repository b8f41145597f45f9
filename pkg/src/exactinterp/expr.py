"""Polynomial-valued expression trees and their two evaluators.

``eval_exact`` is plain rational arithmetic.  ``eval_approx`` evaluates the
same tree in outward-rounded interval arithmetic over dyadic rationals,
doubling the working precision until the enclosure is narrower than the
requested tolerance, and returns the enclosure midpoint.

The on-disk format is JSON with one object per node::

    {"kind": "const", "value": "1/3"}
    {"kind": "var", "name": "x"}
    {"kind": "add" | "mul", "args": [node, ...]}
    {"kind": "sub", "args": [node, node]}
    {"kind": "neg", "arg": node}
    {"kind": "pow", "base": node, "exp": 3}
    {"kind": "det", "rows": [[node, ...], ...]}

Constant values may be JSON integers or strings holding an integer, ``p/q``
or a decimal.  JSON decimals are read from their text, never through a
binary float.
"""

from __future__ import annotations

import ast
import json
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .kron import det_exact
from .rational import as_rational, decimal_to_rational, format_rational

DEFAULT_START_BITS = 64
DEFAULT_MAX_BITS = 16384
PRECISION_ENV = "EXACTINTERP_MAX_PRECISION_BITS"

NODE_KINDS = ("const", "var", "add", "sub", "neg", "mul", "pow", "det")


class ExpressionError(ValueError):
    pass


class UnboundVariableError(ExpressionError, KeyError):
    def __str__(self):
        return ValueError.__str__(self)


class UnsupportedExpressionError(ExpressionError):
    pass


class PrecisionBudgetExceeded(ArithmeticError):
    """The precision cap was reached before the enclosure got narrow enough."""

    def __init__(self, width: Fraction, bits: int, eps: Fraction):
        self.width = width
        self.bits = bits
        self.eps = eps
        super().__init__(
            f"enclosure width {float(width):.3e} still >= eps {float(eps):.3e} at {bits} bits")


# -- AST ---------------------------------------------------------------------

def _wrap(v) -> "Expr":
    if isinstance(v, Expr):
        return v
    return Const(as_rational(v))


class Expr:
    """Base class; operators build trees (``x**2 + Fraction(1, 3)``)."""

    __slots__ = ()

    def __add__(self, other):
        return Add((self, _wrap(other)))

    def __radd__(self, other):
        return Add((_wrap(other), self))

    def __sub__(self, other):
        return Sub(self, _wrap(other))

    def __rsub__(self, other):
        return Sub(_wrap(other), self)

    def __mul__(self, other):
        return Mul((self, _wrap(other)))

    def __rmul__(self, other):
        return Mul((_wrap(other), self))

    def __truediv__(self, other):
        c = as_rational(other)
        return Mul((self, Const(1 / c)))

    def __neg__(self):
        return Neg(self)

    def __pow__(self, k: int):
        return Pow(self, k)


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_rational(self.value))


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Add(Expr):
    args: tuple


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Mul(Expr):
    args: tuple


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: int

    def __post_init__(self):
        if isinstance(self.exp, bool) or not isinstance(self.exp, int) or self.exp < 0:
            raise UnsupportedExpressionError(f"pow exponent must be a nonnegative integer, got {self.exp!r}")


@dataclass(frozen=True)
class Det(Expr):
    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(_wrap(e) for e in r) for r in self.rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise UnsupportedExpressionError("det needs a square grid of size >= 1")
        object.__setattr__(self, "rows", rows)


ExprAst = Expr


def children(e: Expr) -> tuple:
    if isinstance(e, (Add, Mul)):
        return e.args
    if isinstance(e, Sub):
        return (e.left, e.right)
    if isinstance(e, Neg):
        return (e.arg,)
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, Det):
        return tuple(x for r in e.rows for x in r)
    return ()


def free_variables(e: Expr) -> set[str]:
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.name)
        stack.extend(children(node))
    return out


def det_of(rows: Sequence[Sequence]) -> Det:
    return Det(tuple(tuple(r) for r in rows))


# -- serialization -----------------------------------------------------------

def to_json(e: Expr):
    if isinstance(e, Const):
        return {"kind": "const", "value": format_rational(e.value)}
    if isinstance(e, Var):
        return {"kind": "var", "name": e.name}
    if isinstance(e, Add):
        return {"kind": "add", "args": [to_json(a) for a in e.args]}
    if isinstance(e, Mul):
        return {"kind": "mul", "args": [to_json(a) for a in e.args]}
    if isinstance(e, Sub):
        return {"kind": "sub", "args": [to_json(e.left), to_json(e.right)]}
    if isinstance(e, Neg):
        return {"kind": "neg", "arg": to_json(e.arg)}
    if isinstance(e, Pow):
        return {"kind": "pow", "base": to_json(e.base), "exp": e.exp}
    if isinstance(e, Det):
        return {"kind": "det", "rows": [[to_json(x) for x in r] for r in e.rows]}
    raise UnsupportedExpressionError(f"unknown node {e!r}")


def _need(obj: dict, key: str):
    if key not in obj:
        raise ExpressionError(f"{obj.get('kind')!r} node is missing {key!r}")
    return obj[key]


def from_json(obj) -> Expr:
    if not isinstance(obj, dict):
        raise ExpressionError(f"expected a node object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind not in NODE_KINDS:
        raise UnsupportedExpressionError(f"unknown node kind {kind!r}")
    if kind == "const":
        v = _need(obj, "value")
        if isinstance(v, float):
            raise ExpressionError("binary float constants are not allowed")
        return Const(as_rational(v))
    if kind == "var":
        name = _need(obj, "name")
        if not isinstance(name, str) or not name:
            raise ExpressionError("variable name must be a non-empty string")
        return Var(name)
    if kind in ("add", "mul"):
        args = _need(obj, "args")
        if not isinstance(args, list) or not args:
            raise ExpressionError(f"{kind} needs a non-empty args list")
        cls = Add if kind == "add" else Mul
        return cls(tuple(from_json(a) for a in args))
    if kind == "sub":
        args = _need(obj, "args")
        if not isinstance(args, list) or len(args) != 2:
            raise ExpressionError("sub needs exactly two args")
        return Sub(from_json(args[0]), from_json(args[1]))
    if kind == "neg":
        return Neg(from_json(_need(obj, "arg")))
    if kind == "pow":
        return Pow(from_json(_need(obj, "base")), _need(obj, "exp"))
    rows = _need(obj, "rows")
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ExpressionError("det rows must be a list of lists")
    return Det(tuple(tuple(from_json(x) for x in r) for r in rows))


def _json_decimal(text: str):
    return decimal_to_rational(text)


def loads(text: str) -> Expr:
    try:
        obj = json.loads(text, parse_float=_json_decimal)
    except json.JSONDecodeError as exc:
        raise ExpressionError(f"invalid JSON: {exc}") from exc
    if isinstance(obj, dict) and "expr" in obj and "kind" not in obj:
        obj = obj["expr"]
    return from_json(_fractions_to_text(obj))


def _fractions_to_text(obj):
    # parse_float hands back Fractions; turn them into the string form from_json expects
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, list):
        return [_fractions_to_text(x) for x in obj]
    if isinstance(obj, dict):
        return {k: _fractions_to_text(v) for k, v in obj.items()}
    return obj


def dumps(e: Expr, **kw) -> str:
    return json.dumps(to_json(e), **kw)


_BINOPS = {ast.Add: "add", ast.Sub: "sub", ast.Mult: "mul", ast.Pow: "pow", ast.Div: "div"}


def parse_infix(text: str) -> Expr:
    """Parse a small infix language: ``+ - * / ^ **``, names, integers, decimals.

    Division is only allowed by constants.  ``det(...)`` is not available
    here; use :class:`Det` or the JSON form.
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from exc

    def conv(node) -> Expr:
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Const(Fraction(node.value))
        if isinstance(node, ast.Constant) and isinstance(node.value, float):
            seg = ast.get_source_segment(src, node)
            return Const(decimal_to_rational(seg))
        if isinstance(node, ast.Name):
            return Var(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = conv(node.operand)
            return Neg(inner) if isinstance(node.op, ast.USub) else inner
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op = _BINOPS[type(node.op)]
            left = conv(node.left)
            if op == "pow":
                k = _const_value(node.right)
                if k is None or k.denominator != 1 or k < 0:
                    raise UnsupportedExpressionError("exponents must be nonnegative integer literals")
                return Pow(left, int(k))
            right = conv(node.right)
            if op == "add":
                return Add((left, right))
            if op == "sub":
                return Sub(left, right)
            if op == "mul":
                return Mul((left, right))
            c = _const_value(node.right)
            if c is None or c == 0:
                raise UnsupportedExpressionError("division is only allowed by nonzero constants")
            return Mul((left, Const(1 / c)))
        raise UnsupportedExpressionError(f"unsupported syntax: {ast.dump(node)}")

    def _const_value(node):
        try:
            e = conv(node)
        except ExpressionError:
            return None
        if free_variables(e):
            return None
        return eval_exact(e, {})

    src = text.replace("^", "**")
    return conv(tree.body)


# -- exact evaluation --------------------------------------------------------

def eval_exact(e: Expr, point: Mapping[str, Fraction]) -> Fraction:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return Fraction(point[e.name])
        except KeyError:
            raise UnboundVariableError(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Add):
        return sum((eval_exact(a, point) for a in e.args), Fraction(0))
    if isinstance(e, Mul):
        out = Fraction(1)
        for a in e.args:
            out *= eval_exact(a, point)
        return out
    if isinstance(e, Sub):
        return eval_exact(e.left, point) - eval_exact(e.right, point)
    if isinstance(e, Neg):
        return -eval_exact(e.arg, point)
    if isinstance(e, Pow):
        return eval_exact(e.base, point) ** e.exp
    if isinstance(e, Det):
        return det_exact([[eval_exact(x, point) for x in r] for r in e.rows])
    raise UnsupportedExpressionError(f"unknown node {e!r}")


# -- interval evaluation -----------------------------------------------------

def _round(x: Fraction, prec: int, up: bool) -> Fraction:
    """Round to a dyadic with about ``prec`` significant bits, toward +/- infinity."""
    n, d = x.numerator, x.denominator
    if n == 0 or (d == 1 and abs(n).bit_length() <= prec):
        return x
    e = abs(n).bit_length() - d.bit_length() - prec
    if e >= 0:
        num, den = n, d << e
    else:
        num, den = n << -e, d
    q, r = divmod(num, den)
    if up and r:
        q += 1
    return Fraction(q << e) if e >= 0 else Fraction(q, 1 << -e)


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    @classmethod
    def around(cls, x: Fraction, prec: int) -> "Interval":
        return cls(_round(x, prec, False), _round(x, prec, True))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0

    def add(self, o: "Interval", prec: int) -> "Interval":
        return Interval(_round(self.lo + o.lo, prec, False), _round(self.hi + o.hi, prec, True))

    def sub(self, o: "Interval", prec: int) -> "Interval":
        return Interval(_round(self.lo - o.hi, prec, False), _round(self.hi - o.lo, prec, True))

    def neg(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def mul(self, o: "Interval", prec: int) -> "Interval":
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(_round(min(ps), prec, False), _round(max(ps), prec, True))

    def div(self, o: "Interval", prec: int) -> "Interval":
        if not o.excludes_zero():
            raise ZeroDivisionError("interval divisor contains zero")
        qs = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Interval(_round(min(qs), prec, False), _round(max(qs), prec, True))

    def pow(self, k: int, prec: int) -> "Interval":
        if k == 0:
            return Interval(Fraction(1), Fraction(1))
        a, b = self.lo ** k, self.hi ** k
        if k % 2 == 1 or self.lo >= 0:
            lo, hi = a, b
        elif self.hi <= 0:
            lo, hi = b, a
        else:
            lo, hi = Fraction(0), max(a, b)
        return Interval(_round(lo, prec, False), _round(hi, prec, True))

    def intersect(self, o: "Interval") -> "Interval":
        return Interval(max(self.lo, o.lo), min(self.hi, o.hi))


@dataclass(frozen=True)
class ApproxValue:
    """A rational ball: the true value lies within ``radius`` of ``midpoint``."""

    midpoint: Fraction
    radius: Fraction

    @classmethod
    def from_interval(cls, iv: Interval) -> "ApproxValue":
        return cls(iv.mid, iv.width / 2)

    def contains(self, x) -> bool:
        return abs(Fraction(x) - self.midpoint) <= self.radius


def _interval_det(m: list[list[Interval]], prec: int) -> Interval:
    n = len(m)
    work = [row[:] for row in m]
    det = Interval(Fraction(1), Fraction(1))
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col].excludes_zero()), None)
        if piv is None:
            return _interval_det_expansion(m, prec)
        if piv != col:
            work[col], work[piv] = work[piv], work[col]
            det = det.neg()
        p = work[col][col]
        det = det.mul(p, prec)
        for r in range(col + 1, n):
            f = work[r][col].div(p, prec)
            row, prow = work[r], work[col]
            for c in range(col + 1, n):
                row[c] = row[c].sub(f.mul(prow[c], prec), prec)
    return det


def _interval_det_expansion(m: list[list[Interval]], prec: int) -> Interval:
    # Division-free Laplace expansion over column subsets; used when no pivot
    # can be certified nonzero (e.g. the matrix is singular at this point).
    n = len(m)
    zero = Interval(Fraction(0), Fraction(0))
    table = {0: Interval(Fraction(1), Fraction(1))}
    for mask in range(1, 1 << n):
        k = bin(mask).count("1")
        row = m[k - 1]
        acc = zero
        for j in range(n):
            if mask >> j & 1:
                term = row[j].mul(table[mask ^ (1 << j)], prec)
                if bin(mask >> (j + 1)).count("1") % 2:
                    acc = acc.sub(term, prec)
                else:
                    acc = acc.add(term, prec)
        table[mask] = acc
    return table[(1 << n) - 1]


def eval_interval(e: Expr, point: Mapping[str, Interval], prec: int) -> Interval:
    """Enclosure of ``e`` over the box ``point`` at ``prec`` working bits."""
    if isinstance(e, Const):
        return Interval.around(e.value, prec)
    if isinstance(e, Var):
        try:
            return point[e.name]
        except KeyError:
            raise UnboundVariableError(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Add):
        parts = [eval_interval(a, point, prec) for a in e.args]
        out = parts[0]
        for p in parts[1:]:
            out = out.add(p, prec)
        return out
    if isinstance(e, Mul):
        parts = [eval_interval(a, point, prec) for a in e.args]
        out = parts[0]
        for p in parts[1:]:
            out = out.mul(p, prec)
        return out
    if isinstance(e, Sub):
        return eval_interval(e.left, point, prec).sub(eval_interval(e.right, point, prec), prec)
    if isinstance(e, Neg):
        return eval_interval(e.arg, point, prec).neg()
    if isinstance(e, Pow):
        return eval_interval(e.base, point, prec).pow(e.exp, prec)
    if isinstance(e, Det):
        return _interval_det([[eval_interval(x, point, prec) for x in r] for r in e.rows], prec)
    raise UnsupportedExpressionError(f"unknown node {e!r}")


def default_precision_cap() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw:
        try:
            bits = int(raw)
        except ValueError:
            raise ValueError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from None
        if bits < DEFAULT_START_BITS:
            raise ValueError(f"{PRECISION_ENV} must be >= {DEFAULT_START_BITS}")
        return bits
    return DEFAULT_MAX_BITS


def eval_ball(e: Expr, point: Mapping[str, Fraction], eps: Fraction,
              precision_cap: int | None = None) -> tuple[ApproxValue, int]:
    """Refine an enclosure of ``e(point)`` until its width is below ``eps``.

    Returns the ball and the working precision that achieved it.  Each
    refinement is intersected with the previous enclosure, so widths never
    grow from one round to the next.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    cap = default_precision_cap() if precision_cap is None else precision_cap
    values = {k: Fraction(v) for k, v in point.items()}
    bits = DEFAULT_START_BITS
    best = None
    while True:
        box = {k: Interval.around(v, bits) for k, v in values.items()}
        iv = eval_interval(e, box, bits)
        best = iv if best is None else best.intersect(iv)
        if best.width < eps:
            return ApproxValue.from_interval(best), bits
        if bits * 2 > cap:
            raise PrecisionBudgetExceeded(best.width, bits, eps)
        bits *= 2


def eval_approx(e: Expr, point: Mapping[str, Fraction], eps: Fraction,
                precision_cap: int | None = None) -> Fraction:
    """A rational within ``eps`` of ``e(point)``, certified by interval evaluation."""
    ball, _ = eval_ball(e, point, eps, precision_cap)
    return ball.midpoint

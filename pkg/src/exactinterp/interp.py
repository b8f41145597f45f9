"""Tensor-grid interpolation and the end-to-end exact recovery pipeline.

Grid data and coefficients are stored flat in row-major order over the
index tuple ``(i_1, ..., i_r)``, so the last variable varies fastest.  The
coefficient at ``(i_1, ..., i_r)`` belongs to ``X_1**i_1 * ... * X_r**i_r``.
"""

from __future__ import annotations

import logging
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

from .bounds import (
    BoundSet,
    estimate_degree_bounds,
    estimate_denominator_bound,
    node_stats,
)
from .expr import Expr, ExpressionError, eval_ball, eval_exact, free_variables
from .rational import as_rational, format_rational, recover_signed
from .symcomb import assert_distinct

log = logging.getLogger(__name__)


class ShapeError(ValueError):
    pass


class InterpolationFailed(RuntimeError):
    """Verification kept failing until the retry budget ran out."""

    def __init__(self, message: str, report: "RunReport"):
        super().__init__(message)
        self.report = report


# -- data types --------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    variables: tuple[str, ...]
    nodes: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.variables) != len(self.nodes):
            raise ShapeError("one node list per variable is required")
        if len(set(self.variables)) != len(self.variables):
            raise ShapeError("variable names must be distinct")
        for v, ns in zip(self.variables, self.nodes):
            if not ns:
                raise ShapeError(f"variable {v!r} has no nodes")
            assert_distinct(ns)

    @classmethod
    def create(cls, variables: Sequence[str], nodes: Sequence[Sequence]) -> "Grid":
        return cls(tuple(variables), tuple(tuple(as_rational(x) for x in ns) for ns in nodes))

    @classmethod
    def default(cls, variables: Sequence[str], degrees: Sequence[int]) -> "Grid":
        """Integer nodes ``0, 1, ..., n_k`` per variable."""
        return cls(tuple(variables), tuple(tuple(Fraction(i) for i in range(n + 1)) for n in degrees))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(ns) for ns in self.nodes)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(ns) - 1 for ns in self.nodes)

    def points(self):
        """Grid points in storage order (last variable fastest)."""
        for combo in product(*self.nodes):
            yield dict(zip(self.variables, combo))

    def extended(self) -> "Grid":
        """One more node per variable, appended past the current maximum."""
        return Grid(self.variables, tuple(ns + (max(ns) + 1,) for ns in self.nodes))

    def fresh_point(self) -> dict[str, Fraction]:
        return {v: max(ns) + 1 for v, ns in zip(self.variables, self.nodes)}


@dataclass(frozen=True)
class DataTensor:
    shape: tuple[int, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.values) != math.prod(self.shape):
            raise ShapeError(f"{len(self.values)} values do not fill shape {self.shape}")


@dataclass(frozen=True)
class PolyTensor:
    variables: tuple[str, ...]
    shape: tuple[int, ...]
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.variables) != len(self.shape):
            raise ShapeError("shape and variables differ in length")
        if any(s < 1 for s in self.shape):
            raise ShapeError("shape entries must be positive")
        if len(self.coeffs) != math.prod(self.shape):
            raise ShapeError(f"{len(self.coeffs)} coefficients do not fill shape {self.shape}")

    @classmethod
    def zeros(cls, variables: Sequence[str], shape: Sequence[int]) -> "PolyTensor":
        return cls(tuple(variables), tuple(shape), (Fraction(0),) * math.prod(shape))

    @classmethod
    def from_terms(cls, variables: Sequence[str], terms: Mapping[tuple, Fraction],
                   shape: Sequence[int] | None = None) -> "PolyTensor":
        r = len(variables)
        if shape is None:
            shape = [1 + max((e[k] for e in terms), default=0) for k in range(r)]
        shape = tuple(shape)
        coeffs = [Fraction(0)] * math.prod(shape)
        for exps, c in terms.items():
            if len(exps) != r or any(not 0 <= e < s for e, s in zip(exps, shape)):
                raise ShapeError(f"exponent {exps} does not fit shape {shape}")
            coeffs[flat_index(exps, shape)] += Fraction(c)
        return cls(tuple(variables), shape, tuple(coeffs))

    def terms(self) -> dict[tuple[int, ...], Fraction]:
        """Nonzero coefficients keyed by exponent tuple."""
        return {idx: c for idx, c in zip(product(*(range(s) for s in self.shape)), self.coeffs) if c}

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        if any(e >= s for e, s in zip(exps, self.shape)):
            return Fraction(0)
        return self.coeffs[flat_index(exps, self.shape)]

    def same_polynomial(self, other: "PolyTensor") -> bool:
        return self.variables == other.variables and self.terms() == other.terms()

    def __str__(self) -> str:
        return format_poly(self)


def flat_index(idx: Sequence[int], shape: Sequence[int]) -> int:
    out = 0
    for i, s in zip(idx, shape):
        out = out * s + i
    return out


def _fibers(shape: Sequence[int], axis: int):
    stride = math.prod(shape[axis + 1:])
    length = shape[axis]
    outer = math.prod(shape[:axis])
    for o in range(outer):
        base0 = o * length * stride
        for inner in range(stride):
            base = base0 + inner
            yield [base + i * stride for i in range(length)]


# -- solvers -----------------------------------------------------------------

def divided_differences(nodes: Sequence[Fraction], data: Sequence[Fraction]) -> list[Fraction]:
    c = [Fraction(v) for v in data]
    n = len(c)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            c[i] = (c[i] - c[i - 1]) / (nodes[i] - nodes[i - j])
    return c


def solve_newton_univariate(nodes: Sequence[Fraction], data: Sequence[Fraction]) -> list[Fraction]:
    """Monomial coefficients ``a_0..a_n`` of the interpolant through ``(nodes, data)``."""
    if len(nodes) != len(data):
        raise ShapeError("nodes and data must have equal length")
    if not nodes:
        return []
    assert_distinct(nodes)
    c = divided_differences(nodes, data)
    n = len(c) - 1
    poly = [c[n]]
    for k in range(n - 1, -1, -1):
        # poly <- poly * (x - nodes[k]) + c[k]
        xk = nodes[k]
        nxt = [Fraction(0)] * (len(poly) + 1)
        for i, a in enumerate(poly):
            nxt[i + 1] += a
            nxt[i] -= xk * a
        nxt[0] += c[k]
        poly = nxt
    return poly


def solve_tensor(grid: Grid, data: DataTensor) -> PolyTensor:
    """Exact coefficient tensor interpolating ``data`` on ``grid``.

    The system matrix is the Kronecker product of the per-variable
    Vandermonde matrices, so it is inverted one axis at a time: every fiber
    along an axis gets a univariate Newton solve.
    """
    if tuple(data.shape) != grid.shape:
        raise ShapeError(f"data shape {data.shape} does not match grid shape {grid.shape}")
    vals = list(data.values)
    for axis, nodes in enumerate(grid.nodes):
        if len(nodes) == 1:
            continue
        for idx in _fibers(grid.shape, axis):
            solved = solve_newton_univariate(nodes, [vals[i] for i in idx])
            for i, v in zip(idx, solved):
                vals[i] = v
    return PolyTensor(grid.variables, grid.shape, tuple(vals))


def poly_eval(p: PolyTensor, point: Mapping[str, Fraction]) -> Fraction:
    """Exact nested-Horner evaluation, innermost on the last variable."""
    try:
        xs = [Fraction(point[v]) for v in p.variables]
    except KeyError as exc:
        raise ExpressionError(f"variable {exc.args[0]!r} is not bound") from None
    vals = list(p.coeffs)
    for axis in range(len(p.shape) - 1, -1, -1):
        s = p.shape[axis]
        x = xs[axis]
        out = []
        for start in range(0, len(vals), s):
            acc = Fraction(0)
            for c in reversed(vals[start:start + s]):
                acc = acc * x + c
            out.append(acc)
        vals = out
    return vals[0]


def recover_poly(p_approx: PolyTensor, N: int) -> PolyTensor:
    return replace(p_approx, coeffs=tuple(recover_signed(c, N) for c in p_approx.coeffs))


# -- printing ----------------------------------------------------------------

def _monomial(variables, exps) -> str:
    parts = []
    for v, e in zip(variables, exps):
        if e == 1:
            parts.append(v)
        elif e > 1:
            parts.append(f"{v}^{e}")
    return "*".join(parts)


def format_poly(p: PolyTensor) -> str:
    """Canonical text: exponent tuples in descending lex order, zero terms dropped."""
    terms = sorted(p.terms().items(), reverse=True)
    if not terms:
        return "0"
    out = []
    for k, (exps, c) in enumerate(terms):
        mono = _monomial(p.variables, exps)
        mag = abs(c)
        if not mono:
            body = format_rational(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{format_rational(mag)}*{mono}"
        if k == 0:
            out.append(f"-{body}" if c < 0 else body)
        else:
            out.append(f" - {body}" if c < 0 else f" + {body}")
    return "".join(out)


_TERM = re.compile(r"\s*([+-])?\s*([^+-]+)")
_FACTOR = re.compile(r"([A-Za-z_][A-Za-z_0-9]*)(?:\^(\d+))?|(\d+(?:/\d+)?)")


def parse_poly(text: str, variables: Sequence[str], shape: Sequence[int] | None = None) -> PolyTensor:
    """Inverse of :func:`format_poly`.

    ``shape`` defaults to the smallest one holding every term; pass the
    original shape to get an identical tensor back.
    """
    index = {v: i for i, v in enumerate(variables)}
    s = text.strip()
    if not s:
        raise ExpressionError("empty polynomial text")
    terms: dict[tuple, Fraction] = {}
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ExpressionError(f"cannot parse polynomial at position {pos} in {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        coeff = Fraction(sign)
        exps = [0] * len(variables)
        for factor in m.group(2).strip().split("*"):
            f = _FACTOR.fullmatch(factor.strip())
            if f is None:
                raise ExpressionError(f"bad factor {factor!r} in {text!r}")
            if f.group(3):
                coeff *= Fraction(f.group(3))
            else:
                name = f.group(1)
                if name not in index:
                    raise ExpressionError(f"unknown variable {name!r}")
                exps[index[name]] += int(f.group(2) or 1)
        key = tuple(exps)
        terms[key] = terms.get(key, Fraction(0)) + coeff
        pos = m.end()
    terms = {k: v for k, v in terms.items() if v}
    return PolyTensor.from_terms(variables, terms, shape)


# -- pipeline ----------------------------------------------------------------

@dataclass
class RunReport:
    bound_set: BoundSet
    retries: int
    grid: Grid
    wall_time: float
    result: PolyTensor | None
    verified: bool = False
    precision_bits: int = 0
    eval_time: float = 0.0
    solve_time: float = 0.0
    verification_point: dict = field(default_factory=dict)
    attempts: list = field(default_factory=list)

    def to_dict(self) -> dict:
        b = self.bound_set
        return {
            "variables": list(self.grid.variables),
            "bound_set": {
                "degrees": list(b.degrees),
                "denom_bound": b.denom_bound,
                "lambda": [format_rational(s.lam) for s in b.stats],
                "m_bound": [format_rational(s.m_bound) for s in b.stats],
                "epsilon": format_rational(b.epsilon),
                "epsilon_approx": f"{float(b.epsilon):.4e}",
            },
            "grid": [[format_rational(x) for x in ns] for ns in self.grid.nodes],
            "retries": self.retries,
            "verified": self.verified,
            "precision_bits": self.precision_bits,
            "wall_time": round(self.wall_time, 6),
            "eval_time": round(self.eval_time, 6),
            "solve_time": round(self.solve_time, 6),
            "verification_point": {k: format_rational(v) for k, v in self.verification_point.items()},
            "attempts": self.attempts,
            "result": None if self.result is None else {
                "shape": list(self.result.shape),
                "text": format_poly(self.result),
                "coeffs": [format_rational(c) for c in self.result.coeffs],
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        from .bounds import NodeStats

        variables = tuple(d["variables"])
        b = d["bound_set"]
        stats = tuple(NodeStats(Fraction(l), Fraction(m)) for l, m in zip(b["lambda"], b["m_bound"]))
        bound_set = BoundSet(tuple(b["degrees"]), b["denom_bound"], stats, Fraction(b["epsilon"]))
        res = d.get("result")
        result = None
        if res is not None:
            result = PolyTensor(variables, tuple(res["shape"]), tuple(Fraction(c) for c in res["coeffs"]))
        return cls(
            bound_set=bound_set,
            retries=d["retries"],
            grid=Grid.create(variables, d["grid"]),
            wall_time=d["wall_time"],
            result=result,
            verified=d["verified"],
            precision_bits=d["precision_bits"],
            eval_time=d["eval_time"],
            solve_time=d["solve_time"],
            verification_point={k: Fraction(v) for k, v in d["verification_point"].items()},
            attempts=list(d["attempts"]),
        )


def _eval_point(args):
    expr, point, eps, cap = args
    ball, bits = eval_ball(expr, point, eps, cap)
    return ball.midpoint, bits


def sample_grid(expr: Expr, grid: Grid, eps: Fraction, precision_cap: int | None = None,
                workers: int | None = None) -> tuple[DataTensor, int]:
    """Certified approximations of ``expr`` at every grid point, error < ``eps``."""
    jobs = [(expr, pt, eps, precision_cap) for pt in grid.points()]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_eval_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_eval_point(j) for j in jobs]
    values = tuple(v for v, _ in results)
    bits = max((b for _, b in results), default=0)
    return DataTensor(grid.shape, values), bits


def interpolate_exact(expr: Expr, variables: Sequence[str], *, degrees: Sequence[int] | None = None,
                      N: int | None = None, grid: Grid | None = None, retry_limit: int = 3,
                      precision_cap: int | None = None, workers: int | None = None
                      ) -> tuple[PolyTensor, RunReport]:
    """Recover the exact polynomial behind ``expr`` from approximate values.

    Degree and denominator bounds default to structural estimates and the
    grid to integer nodes.  After recovery the result is checked exactly at
    one point off the grid; on a mismatch ``N`` is doubled (and from the
    second failure on, every degree bound is raised by one) and the whole
    computation is repeated, at most ``retry_limit`` times.
    """
    t0 = time.perf_counter()
    variables = tuple(variables)
    unknown = free_variables(expr) - set(variables)
    if unknown:
        raise ExpressionError(f"expression uses undeclared variables {sorted(unknown)}")

    if grid is not None:
        if grid.variables != variables:
            raise ShapeError(f"grid variables {grid.variables} differ from {variables}")
        if degrees is not None and tuple(degrees) != grid.degrees:
            raise ShapeError(f"degrees {tuple(degrees)} do not match grid sizes {grid.shape}")
        degs = list(grid.degrees)
    elif degrees is not None:
        if len(degrees) != len(variables):
            raise ShapeError("one degree bound per variable is required")
        if any(d < 0 for d in degrees):
            raise ShapeError("degree bounds must be nonnegative")
        degs = list(degrees)
    else:
        degs = estimate_degree_bounds(expr, variables)
    denom = estimate_denominator_bound(expr) if N is None else N
    if denom < 2:
        raise ValueError("denominator bound must be >= 2")
    cur_grid = grid if grid is not None else Grid.default(variables, degs)

    if not free_variables(expr):
        # constant: nothing to interpolate
        bounds = BoundSet.build(cur_grid.degrees, [node_stats(ns) for ns in cur_grid.nodes], denom)
        coeffs = [Fraction(0)] * math.prod(cur_grid.shape)
        coeffs[0] = eval_exact(expr, {})
        poly = PolyTensor(variables, cur_grid.shape, tuple(coeffs))
        report = RunReport(bounds, 0, cur_grid, time.perf_counter() - t0, poly, verified=True)
        return poly, report

    attempts = []
    retries = 0
    while True:
        bounds = BoundSet.build(cur_grid.degrees, [node_stats(ns) for ns in cur_grid.nodes], denom)
        t1 = time.perf_counter()
        data, bits = sample_grid(expr, cur_grid, bounds.epsilon, precision_cap, workers)
        t2 = time.perf_counter()
        approx = solve_tensor(cur_grid, data)
        poly = recover_poly(approx, denom)
        t3 = time.perf_counter()
        probe = cur_grid.fresh_point()
        got, want = poly_eval(poly, probe), eval_exact(expr, probe)
        ok = got == want
        attempts.append({
            "degrees": list(cur_grid.degrees),
            "denom_bound": denom,
            "verified": ok,
            "seconds": round(t3 - t1, 6),
        })
        report = RunReport(bounds, retries, cur_grid, time.perf_counter() - t0, poly, verified=ok,
                           precision_bits=bits, eval_time=t2 - t1, solve_time=t3 - t2,
                           verification_point=probe, attempts=attempts)
        if ok:
            return poly, report
        log.info("verification failed at %s (degrees %s, N=%d)", probe, cur_grid.degrees, denom)
        if retries >= retry_limit:
            raise InterpolationFailed(
                f"recovered polynomial disagrees with the expression at {probe} "
                f"after {retries} retries (last N={denom}, degrees={cur_grid.degrees})", report)
        retries += 1
        denom *= 2
        if retries >= 2:
            cur_grid = cur_grid.extended() if grid is not None else Grid.default(
                variables, [d + 1 for d in cur_grid.degrees])


def interpolate_exact_reference(expr: Expr, grid: Grid) -> PolyTensor:
    """Plain exact interpolation: exact values at every node, exact solve."""
    data = DataTensor(grid.shape, tuple(eval_exact(expr, pt) for pt in grid.points()))
    return solve_tensor(grid, data)

"""Determinants of random polynomial matrices: approximate path vs exact interpolation."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .expr import Add, Const, Det, Expr, Mul, Pow, Var
from .interp import Grid, interpolate_exact, interpolate_exact_reference

CSV_FIELDS = ("size", "variables", "trial", "terms", "epsilon", "epsilon_exact",
              "approx_seconds", "exact_seconds", "match")


def random_entry(rng: random.Random, variables: Sequence[str], degree: int,
                 max_den: int = 1, max_terms: int = 3) -> Expr:
    """A small random polynomial with per-variable degree at most ``degree``."""
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        c = Fraction(rng.randint(-5, 5), rng.randint(1, max_den))
        if c == 0:
            c = Fraction(1)
        factors: list[Expr] = [Const(c)]
        for v in variables:
            e = rng.randint(0, degree)
            if e == 1:
                factors.append(Var(v))
            elif e > 1:
                factors.append(Pow(Var(v), e))
        terms.append(Mul(tuple(factors)) if len(factors) > 1 else factors[0])
    return Add(tuple(terms)) if len(terms) > 1 else terms[0]


def random_det(rng: random.Random, size: int, variables: Sequence[str], degree: int = 1,
               max_den: int = 1) -> Det:
    return Det(tuple(tuple(random_entry(rng, variables, degree, max_den) for _ in range(size))
                     for _ in range(size)))


def variable_names(count: int) -> list[str]:
    base = ["x", "y", "z", "w", "u", "v"]
    if count <= len(base):
        return base[:count]
    return [f"x{i}" for i in range(1, count + 1)]


@dataclass
class BenchRow:
    size: int
    variables: int
    trial: int
    terms: int
    epsilon: Fraction
    approx_seconds: float
    exact_seconds: float | None
    match: bool | None
    degrees: tuple[int, ...] = ()
    lambdas: tuple[Fraction, ...] = ()
    m_bounds: tuple[Fraction, ...] = ()
    denom_bound: int = 0

    def as_csv(self) -> dict:
        return {
            "size": self.size,
            "variables": self.variables,
            "trial": self.trial,
            "terms": self.terms,
            "epsilon": f"{float(self.epsilon):.4e}",
            "epsilon_exact": f"{self.epsilon.numerator}/{self.epsilon.denominator}",
            "approx_seconds": f"{self.approx_seconds:.4f}",
            "exact_seconds": "" if self.exact_seconds is None else f"{self.exact_seconds:.4f}",
            "match": "" if self.match is None else str(self.match).lower(),
        }


def run_bench(sizes: Sequence[int], nvars: int, trials: int, *, compare_exact: bool = True,
              seed: int = 0, degree: int = 1, max_den: int = 1, precision_cap: int | None = None,
              workers: int | None = None):
    """Yield one :class:`BenchRow` per (size, trial)."""
    rng = random.Random(seed)
    names = variable_names(nvars)
    for size in sizes:
        for trial in range(trials):
            expr = random_det(rng, size, names, degree, max_den)
            t0 = time.perf_counter()
            poly, report = interpolate_exact(expr, names, precision_cap=precision_cap, workers=workers)
            approx_s = time.perf_counter() - t0
            exact_s = match = None
            if compare_exact:
                t1 = time.perf_counter()
                ref = interpolate_exact_reference(expr, Grid.default(names, report.bound_set.degrees))
                exact_s = time.perf_counter() - t1
                match = ref.same_polynomial(poly)
            b = report.bound_set
            yield BenchRow(size, nvars, trial, len(poly.terms()), b.epsilon, approx_s, exact_s, match,
                           b.degrees, tuple(s.lam for s in b.stats), tuple(s.m_bound for s in b.stats),
                           b.denom_bound)

"""Exact rationals, continued fractions and denominator-bounded recovery.

Rationals are plain :class:`fractions.Fraction` objects, which are always
stored reduced with a positive denominator.  Approximations enter as exact
rationals too (decimal strings are converted losslessly), so the
``remainder == 0`` test of the recovery loop is exact.

    >>> recover_signed(decimal_to_rational("-0.027777777777775996307"), 181)
    Fraction(-1, 36)
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

Rational = Fraction

DEFAULT_MAX_TERMS = 10_000


class RationalParseError(ValueError):
    """Raised for malformed numeric text; ``position`` is the offending index."""

    def __init__(self, text: str, position: int, reason: str = "unexpected character"):
        self.text = text
        self.position = position
        shown = repr(text[position]) if position < len(text) else "end of input"
        super().__init__(f"{reason} at position {position} ({shown}) in {text!r}")


class RecoveryError(ArithmeticError):
    """Raised when exact recovery cannot run (bad bound, negative input, runaway expansion)."""


_DECIMAL = re.compile(r"([+-]?)(\d*)(?:\.(\d*))?(?:[eE]([+-]?\d+))?")
_FRACTION = re.compile(r"([+-]?\d+)/(\d+)")


def _first_bad_position(text: str) -> int:
    # Walk the grammar by hand so the error can name a position.
    i, n = 0, len(text)
    if i < n and text[i] in "+-":
        i += 1
    digits = 0
    while i < n and text[i].isdigit():
        i += 1
        digits += 1
    if i < n and text[i] == ".":
        i += 1
        while i < n and text[i].isdigit():
            i += 1
            digits += 1
    if digits == 0:
        return i
    if i < n and text[i] in "eE":
        i += 1
        if i < n and text[i] in "+-":
            i += 1
        start = i
        while i < n and text[i].isdigit():
            i += 1
        if i == start:
            return i
    return i


def decimal_to_rational(text: str) -> Fraction:
    """Convert a finite decimal string (optional sign and exponent) exactly."""
    s = text.strip()
    m = _DECIMAL.fullmatch(s)
    if m is None or not (m.group(2) or m.group(3)):
        pos = _first_bad_position(s)
        raise RationalParseError(s, pos, "malformed decimal")
    sign, whole, frac, exp = m.groups()
    frac = frac or ""
    digits = int((whole or "0") + frac)
    scale = int(exp or 0) - len(frac)
    value = Fraction(digits * 10**scale) if scale >= 0 else Fraction(digits, 10**-scale)
    return -value if sign == "-" else value


def parse_rational(text: str) -> Fraction:
    """Parse an integer, ``p/q`` or decimal string into an exact rational."""
    s = text.strip()
    m = _FRACTION.fullmatch(s)
    if m is not None:
        den = int(m.group(2))
        if den == 0:
            raise RationalParseError(s, s.index("/") + 1, "zero denominator")
        return Fraction(int(m.group(1)), den)
    if "/" in s:
        raise RationalParseError(s, s.index("/"), "malformed fraction")
    return decimal_to_rational(s)


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and numeric strings; binary floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational; pass a string")


def format_rational(x: Fraction) -> str:
    """Reduced ``p/q`` text, or just ``p`` for integers."""
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def continued_fraction_expand(x: Fraction, max_terms: int = DEFAULT_MAX_TERMS) -> list[int]:
    """Partial quotients ``[a0; a1, ...]`` of ``x``, at most ``max_terms`` of them."""
    if max_terms < 1:
        raise ValueError("max_terms must be >= 1")
    num, den = x.numerator, x.denominator
    terms = []
    while den and len(terms) < max_terms:
        a, rem = divmod(num, den)
        terms.append(a)
        num, den = den, rem
    return terms


@dataclass(frozen=True)
class ConvergentState:
    """Two-term convergent recurrence state; ``push`` returns a new state."""

    h_prev: int = 1
    h_prevprev: int = 0
    k_prev: int = 0
    k_prevprev: int = 1
    partial_quotients: tuple[int, ...] = field(default=())

    def push(self, a: int) -> "ConvergentState":
        if self.partial_quotients and a < 1:
            raise ValueError("partial quotients after the first must be positive")
        return ConvergentState(
            h_prev=a * self.h_prev + self.h_prevprev,
            h_prevprev=self.h_prev,
            k_prev=a * self.k_prev + self.k_prevprev,
            k_prevprev=self.k_prev,
            partial_quotients=self.partial_quotients + (a,),
        )

    @property
    def value(self) -> Fraction:
        if not self.partial_quotients:
            raise ValueError("no convergent before the first quotient")
        return Fraction(self.h_prev, self.k_prev)


def evaluate_convergents(terms) -> ConvergentState:
    state = ConvergentState()
    for a in terms:
        state = state.push(a)
    return state


def recover_rational(r: Fraction, N: int, max_terms: int = DEFAULT_MAX_TERMS) -> Fraction:
    """Recover the fraction with denominator <= ``N`` lying within 1/(2N^2) of ``r``.

    Runs the convergent recurrence on the exact expansion of ``r`` and stops
    just before the first convergent whose denominator exceeds ``N``.  If the
    expansion ends first, ``r`` itself is returned.  When no such fraction
    exists the result is simply the last admissible convergent; callers
    that need certainty must verify it.
    """
    if N < 2:
        raise RecoveryError(f"denominator bound must be >= 2, got {N}")
    r = Fraction(r)
    if r < 0:
        raise RecoveryError("recover_rational needs r >= 0; use recover_signed")
    state = ConvergentState()
    tem = r
    for _ in range(max_terms):
        a = math.floor(tem)
        rem = tem - a
        nxt = state.push(a)
        if nxt.k_prev > N:
            return Fraction(state.h_prev, state.k_prev)
        state = nxt
        if rem == 0:
            return Fraction(state.h_prev, state.k_prev)
        tem = 1 / rem
    raise RecoveryError(f"continued fraction of {r} exceeded {max_terms} terms")


def recover_signed(r: Fraction, N: int, max_terms: int = DEFAULT_MAX_TERMS) -> Fraction:
    """Sign-aware :func:`recover_rational`."""
    if N < 2:
        raise RecoveryError(f"denominator bound must be >= 2, got {N}")
    r = Fraction(r)
    if r == 0:
        return Fraction(0)
    if r < 0:
        return -recover_rational(-r, N, max_terms)
    return recover_rational(r, N, max_terms)

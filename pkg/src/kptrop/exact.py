"""Exact rational kernels: parsing, symmetric polynomials, Vandermonde
products, the c-coefficients of index sets and a Gaussian-elimination solver.

Everything here works on :class:`fractions.Fraction`; no floating point is
ever introduced.
"""

from __future__ import annotations

import re
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .errors import InvalidInput

Rational = Fraction

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")
_DECIMAL_RE = re.compile(r"^\s*[+-]?(\d+\.?\d*|\.\d+)\s*$")


def parse_rational(text, allow_decimal: bool = False) -> Fraction:
    """Parse ``"num/den"`` or an integer string into a Fraction.

    Decimal strings such as ``"-5.7"`` are accepted only when
    ``allow_decimal`` is set; they are converted exactly (``-57/10``).
    """
    if isinstance(text, bool):
        raise InvalidInput(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if not isinstance(text, str):
        raise InvalidInput(f"rationals must be given as strings or integers, got {text!r}")
    m = _RATIONAL_RE.match(text)
    if m:
        den = int(m.group(2)) if m.group(2) is not None else 1
        if den == 0:
            raise InvalidInput(f"zero denominator in {text!r}")
        return Fraction(int(m.group(1)), den)
    if allow_decimal and _DECIMAL_RE.match(text):
        return Fraction(text.strip())
    raise InvalidInput(f"not a rational: {text!r} (expected 'num/den' or an integer)")


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and rational strings; reject floats."""
    if isinstance(value, float):
        raise InvalidInput(f"floating point value {value!r} not accepted; use 'num/den'")
    return parse_rational(value)


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def h_poly(m: int, values: Sequence[Fraction]) -> Fraction:
    """Complete homogeneous symmetric polynomial h_m evaluated at ``values``.

    Uses the recurrence h_k(x_1..x_j) = h_k(x_1..x_{j-1}) + x_j h_{k-1}(x_1..x_j),
    which costs O(m * len(values)).
    """
    if len(values) == 0:
        raise InvalidInput("h_poly needs at least one value")
    if m < 0:
        return Fraction(0)
    h = [Fraction(1)] + [Fraction(0)] * m
    for x in values:
        for k in range(1, m + 1):
            h[k] = h[k] + x * h[k - 1]
    return h[m]


def vandermonde(values: Sequence[Fraction]) -> Fraction:
    """Product of (v_j - v_i) over i < j, in the given order."""
    out = Fraction(1)
    for i, j in combinations(range(len(values)), 2):
        out *= values[j] - values[i]
    return out


def index_set(S: Iterable[int], size: int | None = None) -> tuple[int, ...]:
    """Normalise an index collection to a sorted, duplicate-free tuple.

    ``size`` is the number of phases; indices must lie in 1..size.
    """
    items = list(S)
    out = tuple(sorted(set(items)))
    if not out:
        raise InvalidInput("index set must be non-empty")
    if len(out) != len(items):
        raise InvalidInput(f"repeated index in {items}")
    if size is not None and (out[0] < 1 or out[-1] > size):
        raise InvalidInput(f"indices {out} outside 1..{size}")
    return out


def c_coeff(p: Sequence[Fraction], c: Sequence[Fraction], S: Iterable[int]) -> Fraction:
    """Partial-fraction coefficient of an index set.

    sum_i c_{k_i} / prod_{j != i} (p_{k_i} - p_{k_j}); a single index returns
    its own constant. Indices are 1-based.
    """
    ks = list(S)
    if not ks:
        raise InvalidInput("c_coeff needs a non-empty index set")
    ps = [p[k - 1] for k in ks]
    if len(set(ps)) != len(ps):
        raise InvalidInput(f"repeated p values on index set {ks}")
    total = Fraction(0)
    for a, k in enumerate(ks):
        den = Fraction(1)
        for b in range(len(ks)):
            if b != a:
                den *= ps[a] - ps[b]
        total += c[k - 1] / den
    return total


def determinant(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant by fraction-valued Gaussian elimination."""
    a = [[Fraction(v) for v in row] for row in matrix]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                for k in range(col, n):
                    a[r][k] -= f * a[col][k]
    return det


def solve_linear(matrix: Sequence[Sequence[Fraction]], rhs: Sequence) -> list:
    """Solve ``matrix @ x = rhs`` exactly.

    The right-hand side entries only need to support ``+``, ``-`` and
    multiplication/division by a Fraction, so vectors of exact log-linear
    numbers work as well as plain rationals.
    """
    n = len(matrix)
    a = [[Fraction(v) for v in row] for row in matrix]
    b = list(rhs)
    if any(len(row) != n for row in a) or len(b) != n:
        raise InvalidInput("solve_linear needs a square system")
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular linear system")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            b[col], b[pivot] = b[pivot], b[col]
        for r in range(n):
            if r == col or a[r][col] == 0:
                continue
            f = a[r][col] / a[col][col]
            for k in range(col, n):
                a[r][k] -= f * a[col][k]
            b[r] = b[r] - b[col] * f
    return [b[i] / a[i][i] for i in range(n)]


def c_coeff_det(p: Sequence[Fraction], c: Sequence[Fraction], S: Iterable[int]) -> Fraction:
    """Determinant route for :func:`c_coeff`.

    The ratio of the Vandermonde matrix with its last column replaced by the
    c's, over the Vandermonde determinant itself.
    """
    ks = list(S)
    n = len(ks)
    rows = [[p[k - 1] ** e for e in range(n)] for k in ks]
    delta = determinant(rows)
    if delta == 0:
        raise InvalidInput(f"repeated p values on index set {ks}")
    kappa = determinant([row[:-1] + [c[k - 1]] for row, k in zip(rows, ks)])
    return kappa / delta

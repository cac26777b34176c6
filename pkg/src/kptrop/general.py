"""Wedge-product solutions with exact log constants.

A wedge solution is tau = f_1 ^ ... ^ f_n with f_k = sum_j eps_kj e_j and
e_j = exp(theta_j). Expanding gives a sum over n-subsets I of the M+1 phases
with coefficients A_I = det(eps[:, I]) * Vandermonde(p_I). In the tropical
limit each term contributes the phase

    theta_I = sum_{i in I} theta_i + log|A_I|

so phase constants become rationals plus rational multiples of logs. Those
are held exactly by :class:`LogNumber` (prime-exponent normal form) and
compared with :func:`certified_sign`, which raises interval precision until
the sign is certain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import mpmath
import sympy

from .errors import ConsistencyError, InvalidInput, ResourceGuard
from .exact import as_rational, determinant, format_rational, solve_linear, vandermonde
from .model import SolitonConfig

MAX_PRECISION = 1 << 16


def _factor(q: Fraction) -> dict[int, int]:
    if q <= 0:
        raise InvalidInput(f"log of non-positive rational {q}")
    out: dict[int, int] = {}
    for prime, e in sympy.factorint(q.numerator).items():
        out[prime] = out.get(prime, 0) + e
    for prime, e in sympy.factorint(q.denominator).items():
        out[prime] = out.get(prime, 0) - e
    return out


@dataclass(frozen=True)
class LogNumber:
    """rational + sum_k coeff_k * log(prime_k), in canonical form.

    ``logs`` is sorted by prime with no zero coefficients, so two values are
    equal exactly when their fields are equal (logs of primes are linearly
    independent over the rationals).
    """

    rational: Fraction = Fraction(0)
    logs: tuple[tuple[int, Fraction], ...] = ()

    @staticmethod
    def of(value) -> "LogNumber":
        if isinstance(value, LogNumber):
            return value
        return LogNumber(as_rational(value))

    @staticmethod
    def log(q) -> "LogNumber":
        """Exact log of a positive rational."""
        q = as_rational(q)
        return LogNumber(Fraction(0), _canon((p, Fraction(e)) for p, e in _factor(q).items()))

    @property
    def is_rational(self) -> bool:
        return not self.logs

    @property
    def log_argument(self) -> str:
        """The log part written as log of a product of prime powers."""
        if not self.logs:
            return "1"
        return "*".join(f"{p}^({format_rational(e)})" for p, e in self.logs)

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        merged = dict(self.logs)
        for p, e in other.logs:
            merged[p] = merged.get(p, Fraction(0)) + e
        return LogNumber(self.rational + other.rational, _canon(merged.items()))

    __radd__ = __add__

    def __neg__(self):
        return LogNumber(-self.rational, tuple((p, -e) for p, e in self.logs))

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _scale(self, k: Fraction) -> "LogNumber":
        return LogNumber(self.rational * k, _canon((p, e * k) for p, e in self.logs))

    def __mul__(self, other):
        if isinstance(other, LogNumber):
            if other.is_rational:
                return self._scale(other.rational)
            if self.is_rational:
                return other._scale(self.rational)
            raise InvalidInput("product of two log terms is not log-linear")
        if isinstance(other, (int, Fraction)):
            return self._scale(Fraction(other))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, LogNumber):
            if not other.is_rational:
                raise InvalidInput("division by a log term is not log-linear")
            other = other.rational
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("LogNumber division by zero")
            return self._scale(1 / Fraction(other))
        return NotImplemented

    def ratio(self, other: "LogNumber") -> Fraction | None:
        """The rational k with self == k * other, if there is one."""
        other = LogNumber.of(other)
        if other == LogNumber():
            raise ZeroDivisionError("ratio to zero")
        if other.rational:
            k = self.rational / other.rational
        elif self.rational:
            return None
        else:
            k = self.logs[0][1] / other.logs[0][1] if self.logs else Fraction(0)
        return k if self == other._scale(k) else None

    def sign(self) -> int:
        return certified_sign(self)

    def _cmp(self, other) -> int:
        return certified_sign(self - _coerce_strict(other))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return False
        return self.rational == other.rational and self.logs == other.logs

    def __hash__(self):
        return hash((self.rational, self.logs))

    def __float__(self):
        value = mpmath.mpf(self.rational.numerator) / self.rational.denominator
        for p, e in self.logs:
            value += mpmath.log(p) * e.numerator / e.denominator
        return float(value)

    def __str__(self):
        parts = []
        if self.rational or not self.logs:
            parts.append(format_rational(self.rational))
        for p, e in self.logs:
            parts.append(f"{format_rational(e)}*log({p})")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"LogNumber({self})"


def _canon(items: Iterable[tuple[int, Fraction]]) -> tuple[tuple[int, Fraction], ...]:
    merged: dict[int, Fraction] = {}
    for p, e in items:
        merged[p] = merged.get(p, Fraction(0)) + e
    return tuple(sorted((p, e) for p, e in merged.items() if e))


def _coerce(value):
    if isinstance(value, LogNumber):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return LogNumber(Fraction(value))
    return NotImplemented


def _coerce_strict(value) -> LogNumber:
    out = _coerce(value)
    if out is NotImplemented:
        raise InvalidInput(f"cannot compare LogNumber with {value!r}")
    return out


def certified_sign(value, start_precision: int = 64, max_precision: int = MAX_PRECISION) -> int:
    """Sign of a log-linear number, never guessed.

    Symbolic zero is detected exactly. Otherwise the value is transcendental
    or a nonzero rational, so an enclosing interval eventually excludes zero;
    each round doubles the working precision in a private interval context.
    """
    value = LogNumber.of(value)
    if not value.logs:
        return (value.rational > 0) - (value.rational < 0)
    prec = start_precision
    while prec <= max_precision:
        ctx = mpmath.ctx_iv.MPIntervalContext()
        ctx.prec = prec
        acc = ctx.mpf(value.rational.numerator) / value.rational.denominator
        for p, e in value.logs:
            acc += ctx.log(ctx.mpf(p)) * e.numerator / e.denominator
        if acc.a > 0:
            return 1
        if acc.b < 0:
            return -1
        prec *= 2
    raise ResourceGuard(f"sign of {value} not certified at {max_precision} bits")


def cross_ratio_log(pi, pj, pk, pl) -> LogNumber:
    """log of (pk-pi)(pl-pj) / ((pl-pi)(pk-pj))."""
    pi, pj, pk, pl = (as_rational(v) for v in (pi, pj, pk, pl))
    return LogNumber.log((pk - pi) * (pl - pj) / ((pl - pi) * (pk - pj)))


@dataclass(frozen=True)
class GeneralPhase:
    """Linear form sum_r linear[r-1] * t_r plus a log-linear constant."""

    linear: tuple[Fraction, ...]
    constant: LogNumber

    def value(self, point: Sequence) -> LogNumber:
        """Evaluate at coordinates (t_1, t_2, ...); entries may be LogNumbers."""
        if len(point) != len(self.linear):
            raise InvalidInput(f"point needs {len(self.linear)} coordinates, got {len(point)}")
        acc = self.constant
        for a, t in zip(self.linear, point):
            if a:
                acc = acc + LogNumber.of(t) * a
        return acc

    def __sub__(self, other: "GeneralPhase") -> "GeneralPhase":
        return GeneralPhase(tuple(a - b for a, b in zip(self.linear, other.linear)),
                            self.constant - other.constant)


def compare_phases(a: GeneralPhase, b: GeneralPhase, point: Sequence) -> int:
    """-1, 0 or 1 as a is below, equal to or above b at ``point``."""
    return certified_sign((a - b).value(point))


@dataclass(frozen=True)
class WedgeSpec:
    """Coefficient matrix of the factors; entry [k][j] multiplies e_{j+1} in f_{k+1}."""

    size: int
    epsilon: tuple[tuple[Fraction, ...], ...]

    @property
    def n(self) -> int:
        return len(self.epsilon)

    def factor_support(self, k: int) -> tuple[int, ...]:
        return tuple(j + 1 for j, v in enumerate(self.epsilon[k]) if v)

    def to_json(self) -> dict:
        return {"factors": [
            [{"index": j + 1, "sign": 1 if v > 0 else -1, **({"weight": format_rational(abs(v))} if abs(v) != 1 else {})}
             for j, v in enumerate(row) if v]
            for row in self.epsilon]}

    def __str__(self):
        def term(j, v):
            mag = "" if abs(v) == 1 else f"{format_rational(abs(v))} "
            return ("-" if v < 0 else "+") + mag + f"e{j + 1}"

        factors = []
        for row in self.epsilon:
            body = "".join(term(j, v) for j, v in enumerate(row) if v)
            factors.append("(" + body.lstrip("+") + ")")
        return "^".join(factors)


def wedge_spec(size: int, factors: Sequence, strict: bool = True) -> WedgeSpec:
    """Build a spec from ``factors``: lists of index -> coefficient pairs.

    Each factor is a mapping {index: coefficient} or a sequence of
    (index, coefficient) pairs. ``strict`` enforces entries in {-1, 0, 1} and
    factors with disjoint supports.
    """
    if not isinstance(size, int) or size < 2:
        raise InvalidInput(f"need at least two phases, got {size!r}")
    rows = []
    for k, factor in enumerate(factors, start=1):
        items = factor.items() if isinstance(factor, Mapping) else factor
        row = [Fraction(0)] * size
        for index, coeff in items:
            if not isinstance(index, int) or not 1 <= index <= size:
                raise InvalidInput(f"factor {k}: index {index!r} outside 1..{size}")
            coeff = as_rational(coeff)
            if row[index - 1]:
                raise InvalidInput(f"factor {k}: index {index} repeated")
            if coeff == 0:
                raise InvalidInput(f"factor {k}: zero coefficient on e{index}")
            row[index - 1] = coeff
        if not any(row):
            raise InvalidInput(f"factor {k} is empty")
        rows.append(tuple(row))
    if not rows:
        raise InvalidInput("a wedge needs at least one factor")
    if len(rows) > size:
        raise InvalidInput(f"{len(rows)} factors over {size} phases vanish identically")
    if strict:
        for k, row in enumerate(rows, start=1):
            bad = [v for v in row if v not in (0, 1, -1)]
            if bad:
                raise InvalidInput(f"factor {k}: coefficients must be +-1, got {bad}")
        for (k1, r1), (k2, r2) in combinations(enumerate(rows, start=1), 2):
            shared = [j + 1 for j in range(size) if r1[j] and r2[j]]
            if shared:
                raise InvalidInput(f"factors {k1} and {k2} share e{shared[0]}")
    return WedgeSpec(size, tuple(rows))


def spec_from_json(data: Mapping, size: int, strict: bool = True) -> WedgeSpec:
    """Read {"factors": [[{"index": 1, "sign": 1}, ...], ...]}.

    An entry may carry a positive rational "weight" (non-strict specs only).
    """
    if not isinstance(data, Mapping) or "factors" not in data:
        raise InvalidInput("wedge spec must be an object with a 'factors' list")
    factors = []
    for k, factor in enumerate(data["factors"], start=1):
        if not isinstance(factor, list):
            raise InvalidInput(f"factor {k} must be a list")
        items = []
        for entry in factor:
            if not isinstance(entry, Mapping) or "index" not in entry:
                raise InvalidInput(f"factor {k}: entries need an 'index'")
            sign = entry.get("sign", 1)
            if sign not in (1, -1):
                raise InvalidInput(f"factor {k}: sign must be 1 or -1, got {sign!r}")
            w = as_rational(entry.get("weight", 1))
            if w <= 0:
                raise InvalidInput(f"factor {k}: weight must be positive")
            items.append((entry["index"], sign * w))
        factors.append(items)
    return wedge_spec(size, factors, strict=strict)


@dataclass(frozen=True)
class GeneralTau:
    p: tuple[Fraction, ...]
    c: tuple[LogNumber, ...]
    horizon: int
    terms: dict
    phases: dict = field(compare=False)
    spec: WedgeSpec | None = None

    @property
    def size(self) -> int:
        return len(self.p)

    @property
    def regular(self) -> bool:
        return bool(self.terms) and all(a >= 0 for a in self.terms.values())

    @property
    def verdict(self) -> str:
        return "regular" if self.regular else "singular"

    @property
    def keys(self) -> list[tuple[int, ...]]:
        return sorted(self.terms)

    def point(self, coords) -> tuple:
        """Coordinates (t_1..t_N) from a sequence or a mapping {r: value}."""
        out = [Fraction(0)] * self.horizon
        if isinstance(coords, Mapping):
            for r, v in coords.items():
                if not 1 <= r <= self.horizon:
                    raise InvalidInput(f"time index {r} outside 1..{self.horizon}")
                out[r - 1] = v if isinstance(v, LogNumber) else as_rational(v)
        else:
            if len(coords) > self.horizon:
                raise InvalidInput(f"point has {len(coords)} coordinates, horizon is {self.horizon}")
            for r, v in enumerate(coords):
                out[r] = v if isinstance(v, LogNumber) else as_rational(v)
        return tuple(out)

    def phase_values(self, coords) -> dict:
        pt = self.point(coords)
        return {key: ph.value(pt) for key, ph in self.phases.items()}

    def dominant(self, coords) -> tuple[tuple[int, ...], ...]:
        """Keys attaining the maximal phase at a point (several on a tie)."""
        pt = self.point(coords)
        best: list = []
        best_value = None
        for key in self.keys:
            v = self.phases[key].value(pt)
            if best_value is None:
                best, best_value = [key], v
                continue
            s = certified_sign(v - best_value)
            if s > 0:
                best, best_value = [key], v
            elif s == 0:
                best.append(key)
        return tuple(best)


def _phase_for(p, c, horizon, key, coefficient) -> GeneralPhase:
    linear = tuple(sum((p[i - 1] ** r for i in key), Fraction(0)) for r in range(1, horizon + 1))
    constant = LogNumber.log(abs(coefficient))
    for i in key:
        constant = constant + c[i - 1]
    return GeneralPhase(linear, constant)


def _check_p(p) -> tuple[Fraction, ...]:
    ps = tuple(as_rational(v) for v in p)
    if any(a >= b for a, b in zip(ps, ps[1:])):
        raise InvalidInput("p not strictly increasing")
    return ps


def tau_from_terms(p: Sequence, c: Sequence, terms: Mapping, horizon: int = 3,
                   spec: WedgeSpec | None = None) -> GeneralTau:
    """Assemble a tau from explicit coefficients {index set: A}; zero terms are dropped."""
    ps = _check_p(p)
    cs = tuple(LogNumber.of(v) for v in c)
    if len(cs) != len(ps):
        raise InvalidInput(f"p has {len(ps)} entries but c has {len(cs)}")
    if horizon < 2:
        raise InvalidInput("horizon must cover x and y")
    clean = {}
    for key, a in terms.items():
        key = tuple(sorted(key))
        if not key or key[0] < 1 or key[-1] > len(ps):
            raise InvalidInput(f"term {key} outside 1..{len(ps)}")
        a = as_rational(a)
        if a:
            clean[key] = a
    if not clean:
        raise InvalidInput("tau vanishes identically")
    phases = {key: _phase_for(ps, cs, horizon, key, a) for key, a in clean.items()}
    return GeneralTau(ps, cs, horizon, clean, phases, spec)


def build_tau(config: SolitonConfig | None, spec: WedgeSpec, p: Sequence | None = None,
              c: Sequence | None = None, horizon: int | None = None) -> GeneralTau:
    """Expand the wedge product of ``spec`` over the phases of ``config``.

    ``p``, ``c`` and ``horizon`` override the configuration (and are required
    without one); ``c`` may hold LogNumbers.
    """
    if config is not None:
        p = config.p if p is None else p
        c = config.c if c is None else c
        horizon = config.horizon if horizon is None else horizon
    if p is None or c is None:
        raise InvalidInput("build_tau needs p and c")
    ps = _check_p(p)
    if len(ps) != spec.size:
        raise InvalidInput(f"spec covers {spec.size} phases, p has {len(ps)}")
    terms = {}
    for key in combinations(range(1, spec.size + 1), spec.n):
        minor = determinant([[row[i - 1] for i in key] for row in spec.epsilon])
        if minor:
            terms[key] = minor * vandermonde([ps[i - 1] for i in key])
    if not terms:
        raise InvalidInput(f"{spec} vanishes identically")
    return tau_from_terms(ps, c, terms, horizon or 3, spec)


def dual_tau(tau: GeneralTau) -> GeneralTau:
    """Same coefficients on the complementary index sets."""
    full = set(range(1, tau.size + 1))
    terms = {tuple(sorted(full - set(key))): a for key, a in tau.terms.items()}
    if () in terms:
        raise InvalidInput("dual of a tau with a full-size term has an empty term")
    return tau_from_terms(tau.p, tau.c, terms, tau.horizon)


def equivalent_up_to_gauge(first: GeneralTau, second: GeneralTau) -> bool:
    """True when the taus differ only by an overall positive factor and a
    shift of the individual constants c_i.

    Needs identical p and support; then A2_I / A1_I must be positive and of
    the form k * prod_{i in I} g_i. Taking logs, that is a rational linear
    system per prime in the factorisations (logs of primes are independent).
    """
    if first.p != second.p or set(first.terms) != set(second.terms):
        return False
    keys = sorted(first.terms)
    ratios = []
    for key in keys:
        # constants enter the coefficient through exp(c), fold them in
        r = LogNumber.log(abs(second.terms[key])) - LogNumber.log(abs(first.terms[key]))
        for i in key:
            r = r + second.c[i - 1] - first.c[i - 1]
        if (second.terms[key] > 0) != (first.terms[key] > 0):
            return False
        ratios.append(r)
    size = first.size
    matrix = sympy.Matrix([[1] + [1 if i in key else 0 for i in range(1, size + 1)] for key in keys])
    rank = matrix.rank()
    primes = sorted({p for r in ratios for p, _ in r.logs})
    columns = [[r.rational for r in ratios]] + [[dict(r.logs).get(p, Fraction(0)) for r in ratios] for p in primes]
    for col in columns:
        rhs = sympy.Matrix([sympy.Rational(v.numerator, v.denominator) for v in col])
        if matrix.row_join(rhs).rank() != rank:
            return False
    return True


def is_self_dual(tau: GeneralTau) -> bool:
    return equivalent_up_to_gauge(tau, dual_tau(tau))


@dataclass(frozen=True)
class BoundaryLine:
    """theta_S1 - theta_S2 = sum_r coefficients[r-1] t_r + constant = 0."""

    left: tuple[int, ...]
    right: tuple[int, ...]
    coefficients: tuple[Fraction, ...]
    constant: LogNumber

    @property
    def kind(self) -> str:
        if self.coefficients[0]:
            return "x-form"
        if self.coefficients[1]:
            return "x-parallel"
        return "time-only"

    def x_form(self) -> tuple[tuple[Fraction, ...], LogNumber]:
        """(a_2..a_N, k) with x = sum_{r>=2} a_r t_r + k on the line."""
        if self.kind != "x-form":
            raise InvalidInput(f"{self.name} cannot be solved for x")
        a1 = self.coefficients[0]
        return tuple(-a / a1 for a in self.coefficients[1:]), -self.constant / a1

    def y_form(self) -> tuple[tuple[Fraction, ...], LogNumber]:
        """(a_3..a_N, k) with y = sum_{r>=3} a_r t_r + k, for x-parallel lines."""
        if self.kind != "x-parallel":
            raise InvalidInput(f"{self.name} is not parallel to the x axis")
        a2 = self.coefficients[1]
        return tuple(-a / a2 for a in self.coefficients[2:]), -self.constant / a2

    def x_at(self, rest: Sequence) -> LogNumber:
        """x on the line given (t_2, t_3, ...)."""
        slopes, k = self.x_form()
        if len(rest) != len(slopes):
            raise InvalidInput(f"need {len(slopes)} coordinates beyond x")
        acc = k
        for a, t in zip(slopes, rest):
            acc = acc + LogNumber.of(t) * a
        return acc

    @property
    def name(self) -> str:
        return "x_{%s,%s}" % ("".join(map(str, self.left)), "".join(map(str, self.right)))


def boundary_line(tau: GeneralTau, S1, S2) -> BoundaryLine:
    a, b = tuple(sorted(S1)), tuple(sorted(S2))
    if a == b:
        raise InvalidInput("boundary between a phase and itself")
    for key in (a, b):
        if key not in tau.phases:
            raise InvalidInput(f"{key} is not a term of tau")
    diff = tau.phases[a] - tau.phases[b]
    return BoundaryLine(a, b, diff.linear, diff.constant)


def boundary_visible_at(tau: GeneralTau, S1, S2, rest: Sequence) -> bool:
    """Is the boundary between S1 and S2 visible at the point with (t_2, ...) = rest?

    Visible means no third phase strictly exceeds the common value there.
    """
    line = boundary_line(tau, S1, S2)
    x = line.x_at(rest)
    pt = tau.point([x, *rest])
    common = tau.phases[line.left].value(pt)
    for key, ph in tau.phases.items():
        if key in (line.left, line.right):
            continue
        if certified_sign(ph.value(pt) - common) > 0:
            return False
    return True


def triple_point(tau: GeneralTau, S1, S2, S3, rest: Sequence = ()) -> tuple[LogNumber, LogNumber]:
    """(x, y) where three phases coincide, with (t_3, ...) = rest."""
    keys = [tuple(sorted(S)) for S in (S1, S2, S3)]
    first = boundary_line(tau, keys[0], keys[1])
    second = boundary_line(tau, keys[1], keys[2])
    rows, rhs = [], []
    for line in (first, second):
        rows.append(list(line.coefficients[:2]))
        acc = line.constant
        for a, t in zip(line.coefficients[2:], rest):
            acc = acc + LogNumber.of(t) * a
        rhs.append(-acc)
    try:
        x, y = solve_linear(rows, rhs)
    except ZeroDivisionError as exc:
        raise InvalidInput(f"lines {first.name} and {second.name} are parallel") from exc
    return x, y


def coincidence_time(tau: GeneralTau, first: tuple, second: tuple, y=0) -> LogNumber:
    """t at which two parallel boundary lines (pairs of keys) coincide."""
    l1, l2 = boundary_line(tau, *first), boundary_line(tau, *second)
    (s1, k1), (s2, k2) = l1.x_form(), l2.x_form()
    if s1[0] != s2[0]:
        raise InvalidInput(f"{l1.name} and {l2.name} are not parallel")
    dt = s1[1] - s2[1]
    if dt == 0:
        raise InvalidInput(f"{l1.name} and {l2.name} move together")
    return (k2 - k1) / dt


# -- parallel (P-type) solitons ---------------------------------------------

@dataclass(frozen=True)
class ParallelEvents:
    t_minus: LogNumber
    t_zero: Fraction
    t_plus: LogNumber
    delta: LogNumber


def parallel_parameters(q, a, b) -> tuple[Fraction, ...]:
    """p's with p1 + p4 = p2 + p3 = q, inner gap a and outer gaps b."""
    q, a, b = (as_rational(v) for v in (q, a, b))
    if a <= 0 or b <= 0:
        raise InvalidInput("parallel solitons need a > 0 and b > 0")
    return ((q - a - b) / 2, (q - a) / 2, (q + a) / 2, (q + a + b) / 2)


def parallel_tau(q, a, b, c: Sequence = (0, 0, 0, 0)) -> GeneralTau:
    """(e1 - e4) ^ (e2 + e3) on the parallel parametrisation."""
    p = parallel_parameters(q, a, b)
    spec = wedge_spec(4, [{1: 1, 4: -1}, {2: 1, 3: 1}])
    return build_tau(None, spec, p=p, c=c, horizon=3)


def parallel_events(q, a, b, c: Sequence = (0, 0, 0, 0)) -> ParallelEvents:
    """Times at which three of the parallel boundary lines merge.

    Computed from line coincidences and checked against the closed forms
    t0 = 4(a(c1-c4) - (a+b)(c2-c3)) / (ab(a+b)(2a+b)) and
    dt = 4 log(1 + 2a/b) / (a(a+b)(2a+b)).
    """
    q, a, b = (as_rational(v) for v in (q, a, b))
    tau = parallel_tau(q, a, b, c)
    cs = [as_rational(v) for v in c]
    t_zero = 4 * (a * (cs[0] - cs[3]) - (a + b) * (cs[1] - cs[2])) / (a * b * (a + b) * (2 * a + b))
    delta = LogNumber.log(1 + 2 * a / b) * 4 / (a * (a + b) * (2 * a + b))
    lower = coincidence_time(tau, ((1, 3), (2, 4)), ((1, 3), (3, 4)))
    lower_check = coincidence_time(tau, ((1, 3), (2, 4)), ((2, 4), (3, 4)))
    upper = coincidence_time(tau, ((1, 2), (1, 3)), ((1, 2), (2, 4)))
    upper_check = coincidence_time(tau, ((1, 2), (1, 3)), ((1, 3), (2, 4)))
    if lower != lower_check or upper != upper_check:
        raise ConsistencyError("parallel boundary lines do not merge in triples")
    if lower != t_zero - delta or upper != t_zero + delta:
        raise ConsistencyError(f"coincidence times {lower}, {upper} disagree with t0 -+ dt")
    return ParallelEvents(lower, t_zero, upper, delta)


def visible_boundaries(tau: GeneralTau, rest: Sequence) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Pairs of terms whose boundary is visible at the given (t_2, ...).

    Only boundaries solvable for x are examined.
    """
    out = []
    for k1, k2 in combinations(tau.keys, 2):
        if boundary_line(tau, k1, k2).kind != "x-form":
            continue
        if boundary_visible_at(tau, k1, k2, rest):
            out.append((k1, k2))
    return out


# -- limits of neighbouring p's ----------------------------------------------

def normalize_spec(spec: WedgeSpec) -> tuple[WedgeSpec, tuple[Fraction, ...]]:
    """Scale rows and columns so that a spanning forest of entries is +-1.

    The bipartite graph joins factor k to column j when eps_kj != 0. Edges are
    taken column by column from the right, so the entries left non-unit sit
    as far left as possible. Returns the new spec and the column scales s_j
    (new e_j = s_j * old e_j, i.e. c_j gains log s_j); row scales are an
    overall constant and dropped.
    """
    n, size = spec.n, spec.size
    parent = list(range(n + size))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    tree = {}
    for j in reversed(range(size)):
        for k in range(n):
            if spec.epsilon[k][j]:
                a, b = find(k), find(n + j)
                if a != b:
                    parent[a] = b
                    tree.setdefault(k, []).append(n + j)
                    tree.setdefault(n + j, []).append(k)
    scale = [None] * (n + size)
    for start in [n + j for j in reversed(range(size))] + list(range(n)):
        if scale[start] is not None:
            continue
        scale[start] = Fraction(1)
        stack = [start]
        while stack:
            v = stack.pop()
            for w in tree.get(v, []):
                if scale[w] is None:
                    k, j = (v, w - n) if v < n else (w, v - n)
                    scale[w] = abs(spec.epsilon[k][j]) / scale[v]
                    stack.append(w)
    rows = tuple(tuple(v / (scale[k] * scale[n + j]) for j, v in enumerate(row))
                 for k, row in enumerate(spec.epsilon))
    return WedgeSpec(size, rows), tuple(scale[n:])


def p_limit(tau: GeneralTau, i: int, weight=1) -> GeneralTau:
    """Let p_{i+1} approach p_i with e_{i+1} ~ weight * e_i.

    Column i+1 is folded into column i, p_{i+1} and c_{i+1} are dropped and
    the indices above shift down by one. The result is renormalised by
    :func:`normalize_spec`; any coefficient that cannot be scaled to +-1 is
    kept as a parameter.
    """
    if tau.spec is None:
        raise InvalidInput("p_limit needs a tau built from a wedge spec")
    if not isinstance(i, int) or not 1 <= i < tau.size:
        raise InvalidInput(f"limit index {i} outside 1..{tau.size - 1}")
    w = as_rational(weight)
    if w <= 0:
        raise InvalidInput("limit weight must be positive")
    rows = []
    for row in tau.spec.epsilon:
        merged = list(row)
        merged[i - 1] = row[i - 1] + w * row[i]
        del merged[i]
        rows.append(tuple(merged))
    if any(not any(r) for r in rows):
        raise InvalidInput(f"limit p{i + 1} -> p{i} kills a factor")
    raw = WedgeSpec(tau.size - 1, tuple(rows))
    spec, scales = normalize_spec(raw)
    p = tau.p[:i] + tau.p[i + 1:]
    c = tau.c[:i] + tau.c[i + 1:]
    c = tuple(ck + LogNumber.log(s) for ck, s in zip(c, scales))
    try:
        return build_tau(None, spec, p=p, c=c, horizon=tau.horizon)
    except InvalidInput as exc:
        raise InvalidInput(f"limit p{i + 1} -> p{i} leaves tau identically zero") from exc


def chain_spec(M: int) -> WedgeSpec:
    """(e1 + e2) ^ (e2 + e3) ^ ... ^ (e_M + e_{M+1})."""
    return wedge_spec(M + 1, [{k: 1, k + 1: 1} for k in range(1, M + 1)], strict=False)


def chain_tau_for(config: SolitonConfig) -> tuple[GeneralTau, dict]:
    """A chain wedge whose field, read at (x, -y, t, ...), is that of ``config``.

    Phase i of the wedge uses p = -p'_{M+2-i} and a constant chosen so that
    the term missing i equals theta'_{M+2-i} plus a common shift. Returns the
    tau and the map from its keys to the simple-class indices.
    """
    M = config.M
    size = M + 1
    p = tuple(-config.p[size - i] for i in range(1, size + 1))
    spec = chain_spec(M)
    full = vandermonde(list(p))
    c = []
    for i in range(1, size + 1):
        a_i = Fraction(1)
        for j in range(1, size + 1):
            if j != i:
                a_i /= abs(p[i - 1] - p[j - 1])
        c.append(LogNumber.log(full * a_i) - config.c[size - i])
    tau = build_tau(None, spec, p=p, c=c, horizon=config.horizon)
    mapping = {tuple(k for k in range(1, size + 1) if k != i): size + 1 - i for i in range(1, size + 1)}
    return tau, mapping


def reflect_point(point: Sequence) -> tuple:
    """t_r -> (-1)**(r+1) t_r, which is (x, y, t) -> (x, -y, t) for three times."""
    return tuple(v if r % 2 else -v for r, v in enumerate(point, start=1))

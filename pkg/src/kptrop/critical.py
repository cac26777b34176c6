"""Critical values and points of phase coincidences.

For an index set S of size n+1 the n+1 phases in S coincide on a plane whose
t_n coordinate is

    t_n^S = -sum_{r=1}^{N-n} h_r(p_S) t_{n+r} - c_S

given the higher times t_{n+1}..t_N. Two routes are provided: that formula
(fast path) and an exact linear solve of theta_{k_1} = ... = theta_{k_{n+1}}
(the oracle used by the visibility checks and the tests).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import groupby
from typing import Mapping, Sequence

from .errors import ConsistencyError, InvalidInput
from .exact import c_coeff, h_poly, index_set, solve_linear
from .model import SolitonConfig, all_phases, time_name


def label(indices: Sequence[int]) -> str:
    """Conventional symbol for a critical value: x12, y123, t1234, t4_12345."""
    n = len(indices) - 1
    digits = "".join(str(i) if i < 10 else f"({i})" for i in indices)
    if n <= 3:
        return f"{time_name(n)}{digits}"
    return f"t{n}_{digits}"


@dataclass(frozen=True)
class CriticalValue:
    level: int
    indices: tuple[int, ...]
    value: Fraction

    @property
    def label(self) -> str:
        return label(self.indices)


@dataclass(frozen=True)
class CriticalPoint:
    indices: tuple[int, ...]
    coordinates: tuple[Fraction, ...]
    phase: Fraction

    def __getitem__(self, r: int) -> Fraction:
        return self.coordinates[r - 1]


@dataclass(frozen=True)
class LevelCriticalValue:
    left: tuple[int, ...]
    right: tuple[int, ...]
    level: int
    value: Fraction

    @property
    def label(self) -> str:
        n = self.level
        l = "".join(map(str, self.left))
        r = "".join(map(str, self.right))
        return f"{time_name(n)}_{l};{r}" if n > 3 else f"{time_name(n)}{l};{r}"


def _checked_set(config: SolitonConfig, S, minimum: int = 2) -> tuple[int, ...]:
    ks = index_set(S, config.size)
    if len(ks) < minimum:
        raise InvalidInput(f"index set {ks} needs at least {minimum} indices")
    if len(ks) - 1 > config.horizon:
        raise InvalidInput(f"index set {ks} exceeds horizon {config.horizon}")
    return ks


def _set_coefficients(config: SolitonConfig, ks: tuple) -> tuple:
    """Time-independent parts of a critical value: c_S and h_1..h_{N-n}(p_S).

    Memoised per configuration object (configurations are immutable).
    """
    cache = config.__dict__.get("_coefficient_cache")
    if cache is None:
        cache = {}
        object.__setattr__(config, "_coefficient_cache", cache)
    hit = cache.get(ks)
    if hit is None:
        n = len(ks) - 1
        ps = [config.p[k - 1] for k in ks]
        hit = (c_coeff(config.p, config.c, ks),
               tuple(h_poly(r, ps) for r in range(1, config.horizon - n + 1)))
        cache[ks] = hit
    return hit


def _value_from_vector(config: SolitonConfig, ks: Sequence[int], vec: Sequence[Fraction]) -> Fraction:
    n = len(ks) - 1
    c_s, hs = _set_coefficients(config, tuple(ks))
    value = -c_s
    for r, h in enumerate(hs, start=1):
        if vec[n + r]:
            value -= h * vec[n + r]
    return value


def critical_value(config: SolitonConfig, S, times: Mapping | None = None) -> CriticalValue:
    """t_n at which the phases of S coincide, higher times frozen."""
    ks = _checked_set(config, S)
    vec = config.time_vector(times)
    return CriticalValue(len(ks) - 1, ks, _value_from_vector(config, ks, vec))


def critical_point(config: SolitonConfig, S, times: Mapping | None = None) -> CriticalPoint:
    """Point of the plane of S at the frozen higher times (formula route).

    Solves t_n from S, then t_{n-1} from the first n indices at that t_n, and
    so on down to x.
    """
    ks = _checked_set(config, S)
    vec = config.time_vector(times)
    for m in range(len(ks), 1, -1):
        prefix = ks[:m]
        vec[m - 1] = _value_from_vector(config, prefix, vec)
    coords = tuple(vec[1:])
    phase = all_phases(config, coords)[ks[0] - 1]
    return CriticalPoint(ks, coords, phase)


def critical_point_solve(config: SolitonConfig, S, times: Mapping | None = None) -> CriticalPoint:
    """Oracle route: exact Gaussian elimination on the coincidence system.

    Unknowns are the common value -t_0 and t_1..t_n; each row reads
    t_0 + sum_r p_k^r t_r = -c_k - sum_{r>n} p_k^r t_r.
    """
    ks = _checked_set(config, S)
    n = len(ks) - 1
    vec = config.time_vector(times)
    rows, rhs = [], []
    for k in ks:
        pk = config.p[k - 1]
        rows.append([pk ** r for r in range(n + 1)])
        tail = config.c[k - 1]
        for r in range(n + 1, config.horizon + 1):
            tail += pk ** r * vec[r]
        rhs.append(-tail)
    try:
        sol = solve_linear(rows, rhs)
    except ZeroDivisionError as exc:  # distinct p's make the system regular
        raise ConsistencyError(f"singular coincidence system for {ks}") from exc
    for r in range(1, n + 1):
        vec[r] = sol[r]
    return CriticalPoint(ks, tuple(vec[1:]), -sol[0])


def difference_identity_check(config: SolitonConfig, S, i: int, j: int,
                              times: Mapping | None = None) -> tuple[Fraction, Fraction]:
    """Both sides of the child difference identity for a parent S.

    With S of size n+2 (level n+1) and i, j members of S:
    t_n^{S-i} - t_n^{S-j} = (p_i - p_j) (t_{n+1} - t_{n+1}^S).
    """
    ks = _checked_set(config, S, minimum=3)
    if i == j or i not in ks or j not in ks:
        raise InvalidInput(f"need two distinct members of {ks}, got {i}, {j}")
    vec = config.time_vector(times)
    level = len(ks) - 1
    lhs = (_value_from_vector(config, [k for k in ks if k != i], vec)
           - _value_from_vector(config, [k for k in ks if k != j], vec))
    rhs = (config.p[i - 1] - config.p[j - 1]) * (vec[level] - _value_from_vector(config, ks, vec))
    return lhs, rhs


@dataclass(frozen=True)
class ChildOrder:
    parent: tuple[int, ...]
    values: tuple[CriticalValue, ...]
    side: str
    degenerate: bool
    ties: tuple[tuple[tuple[int, ...], ...], ...]


def predicted_child_order(parent: Sequence[int], side: str) -> list[tuple[int, ...]]:
    """Ascending order of the children of a sorted parent on one side.

    Below the parent's critical value the child missing the largest index is
    smallest; above it the order reverses.
    """
    ks = tuple(parent)
    below = [tuple(k for k in ks if k != d) for d in reversed(ks)]
    return below if side == "below" else list(reversed(below))


def order_critical_values(config: SolitonConfig, parent, times: Mapping | None = None) -> ChildOrder:
    """Children of ``parent`` sorted by their exact critical values.

    The order is checked against the sign rule relative to the parent's own
    critical value; ties (only possible at that value, or in degenerate
    configurations) are reported rather than broken.
    """
    ks = _checked_set(config, parent, minimum=3)
    vec = config.time_vector(times)
    level = len(ks) - 1
    children = [tuple(k for k in ks if k != d) for d in ks]
    values = [CriticalValue(level - 1, ch, _value_from_vector(config, ch, vec)) for ch in children]
    values.sort(key=lambda cv: (cv.value, cv.indices))
    parent_value = _value_from_vector(config, ks, vec)
    ties = tuple(
        tuple(cv.indices for cv in grp)
        for grp in (list(g) for _, g in groupby(values, key=lambda cv: cv.value))
        if len(grp) > 1
    )
    if vec[level] == parent_value:
        side = "at"
    else:
        side = "below" if vec[level] < parent_value else "above"
        if not ties and [cv.indices for cv in values] != predicted_child_order(ks, side):
            raise ConsistencyError(f"child order of {ks} contradicts the {side} ordering rule")
    return ChildOrder(ks, tuple(values), side, bool(ties), ties)


def phase_difference_on_plane(config: SolitonConfig, chain: Sequence[int],
                              times: Mapping | None = None) -> tuple[Fraction, Fraction]:
    """Factored form of theta_{k_1} - theta_{k_{n+1}} on the plane of k_1..k_n.

    Returns ``(coefficient, offset)`` with
    theta_{k_1} - theta_{k_{n+1}} = coefficient * (t_n - offset),
    where offset is the critical value of the full chain.
    """
    ks = list(chain)
    if len(set(ks)) != len(ks) or len(ks) < 2:
        raise InvalidInput(f"chain needs at least two distinct indices, got {ks}")
    _checked_set(config, ks)
    last = config.p[ks[-1] - 1]
    coefficient = Fraction(-1)
    for k in ks[:-1]:
        coefficient *= last - config.p[k - 1]
    offset = critical_value(config, ks, times).value
    return coefficient, offset


def level_critical_value(config: SolitonConfig, T1, T2, times: Mapping | None = None) -> LevelCriticalValue:
    """Value of t_m at which the level-(m-1) critical values of T1 and T2 agree.

    T1 and T2 have the same size m; the p-sums must differ.
    """
    a = _checked_set(config, T1)
    b = _checked_set(config, T2)
    if len(a) != len(b):
        raise InvalidInput("level critical values need index sets of equal size")
    if a == b:
        raise InvalidInput("level critical value of a set with itself is undefined")
    m = len(a)
    if m > config.horizon:
        raise InvalidInput(f"t{m} is beyond the horizon {config.horizon}")
    pa = [config.p[k - 1] for k in a]
    pb = [config.p[k - 1] for k in b]
    slope = h_poly(1, pa) - h_poly(1, pb)
    if slope == 0:
        raise InvalidInput(f"undefined (parallel): equal p-sums on {a} and {b}")
    vec = config.time_vector(times)
    rest = c_coeff(config.p, config.c, a) - c_coeff(config.p, config.c, b)
    for r in range(2, config.horizon - (m - 1) + 1):
        rest += (h_poly(r, pa) - h_poly(r, pb)) * vec[m - 1 + r]
    return LevelCriticalValue(a, b, m, -rest / slope)

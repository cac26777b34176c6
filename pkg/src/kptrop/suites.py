"""Randomised self-checks shared by ``kptrop check`` and the test suite.

Every suite compares two independent computations and raises
:class:`~kptrop.errors.ConsistencyError` on the first disagreement. They
return counts of what was verified.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .combinatorics import apply_op, level_sequences, parse_word
from .critical import critical_point_solve, difference_identity_check, phase_difference_on_plane
from .errors import ConsistencyError, InvalidInput
from .evolution import (classify_evolution, t4_order_region, table_conditions, table_thresholds)
from .exact import c_coeff, c_coeff_det, h_poly
from .model import SolitonConfig, all_phases, resolve_offsets, validate_config
from .visibility import prune_level, side_of, times_around, visible_sets

SIX_PHASE_P = (Fraction(-2), Fraction(-3, 2), Fraction(-1), Fraction(1, 2), Fraction(5, 4), Fraction(2))
SIX_PHASE_C = (Fraction(10), Fraction(0), Fraction(0), Fraction(0), Fraction(0), Fraction(-10))


def random_rational(rng: random.Random, bound: int = 12, max_den: int = 6) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(-bound * den, bound * den), den)


def random_config(rng: random.Random, M: int, frozen: bool = True) -> SolitonConfig:
    """Distinct sorted rational p's, rational c's and random frozen t4..tM."""
    ps: set = set()
    while len(ps) < M + 1:
        ps.add(random_rational(rng, bound=3, max_den=4))
    c = [random_rational(rng) for _ in range(M + 1)]
    times = {r: random_rational(rng, bound=3) for r in range(4, M + 1)} if frozen else {}
    return validate_config(M, sorted(ps), c, times)


# -- identities ----------------------------------------------------------------

def identity_suite(rng: random.Random, cases: int = 100, max_level: int = 5) -> dict:
    """Exact checks of the four critical-value identities.

    * difference: t_n^{S-i} - t_n^{S-j} = (p_i - p_j)(t_{n+1} - t_{n+1}^S)
    * recursion: c_S = (c_{S-i} - c_{S-j}) / (p_j - p_i), and the sum formula
      agrees with the determinant ratio
    * substitution: c_k -> c_k + p_k^r t shifts c_S by h_{r-|S|+1}(p_S) t
    * factored difference: theta_{k_1} - theta_{k_{n+1}} on the plane of
      k_1..k_n equals -prod_j (p_{k_{n+1}} - p_{k_j}) (t_n - t_n^{k_1..k_{n+1}})
    """
    counts = {"difference": 0, "recursion": 0, "substitution": 0, "factored": 0}
    for _ in range(cases):
        M = rng.randint(2, max_level + 1)
        config = random_config(rng, M)
        times = {r: random_rational(rng, bound=4) for r in range(1, config.horizon + 1)}
        # difference identity at level n+1 = |S| - 1
        size = rng.randint(3, min(M + 1, max_level + 2))
        S = sorted(rng.sample(range(1, M + 2), size))
        i, j = rng.sample(S, 2)
        lhs, rhs = difference_identity_check(config, S, i, j, times)
        if lhs != rhs:
            raise ConsistencyError(f"difference identity fails on {S}, {i}, {j}")
        counts["difference"] += 1
        # recursion of the c-coefficients
        T = sorted(rng.sample(range(1, M + 2), rng.randint(2, min(M + 1, max_level + 1))))
        i, j = rng.sample(T, 2)
        left = c_coeff(config.p, config.c, T)
        right = (c_coeff(config.p, config.c, [k for k in T if k != i])
                 - c_coeff(config.p, config.c, [k for k in T if k != j])) / (config.p[j - 1] - config.p[i - 1])
        if left != right or left != c_coeff_det(config.p, config.c, T):
            raise ConsistencyError(f"c-coefficient recursion fails on {T}")
        counts["recursion"] += 1
        # substitution law
        r = rng.randint(1, 8)
        t = random_rational(rng)
        shifted = [ck + config.p[k] ** r * t for k, ck in enumerate(config.c)]
        expect = c_coeff(config.p, config.c, T) + h_poly(r - len(T) + 1, [config.p[k - 1] for k in T]) * t
        if c_coeff(config.p, shifted, T) != expect:
            raise ConsistencyError(f"substitution law fails on {T} with r={r}")
        counts["substitution"] += 1
        # factored phase difference, chain in random order
        n = rng.randint(1, min(M, max_level))
        chain = rng.sample(range(1, M + 2), n + 1)
        if n == 1:
            coords = [times[r] for r in range(1, config.horizon + 1)]
        else:
            free = {r: times[r] for r in range(n, config.horizon + 1)}
            coords = list(critical_point_solve(config, chain[:n], free).coordinates)
        th = all_phases(config, coords)
        higher = {r: coords[r - 1] for r in range(n + 1, config.horizon + 1)}
        coefficient, offset = phase_difference_on_plane(config, chain, higher)
        if th[chain[0] - 1] - th[chain[-1] - 1] != coefficient * (coords[n - 1] - offset):
            raise ConsistencyError(f"factored phase difference fails on chain {chain}")
        counts["factored"] += 1
    return counts


# -- visibility ------------------------------------------------------------------

def visibility_suite(rng: random.Random, M: int, configs: int = 20) -> int:
    """Analytic visibility versus the dominance oracle on both sides of every
    parent critical value; returns the number of point checks."""
    total = 0
    for _ in range(configs):
        config = random_config(rng, M)
        for size in range(3, M + 2):
            n = size - 2  # level of the children
            for parent in combinations(range(1, M + 2), size):
                around = times_around(config, parent, None, delta=Fraction(1, 97))
                for side in ("below", "above"):
                    times = around[side]
                    if side_of(config, parent, times) != side:
                        raise ConsistencyError(f"times_around misplaced {parent}")
                    if n + 1 == M:
                        parents = [tuple(range(1, M + 2))]
                    else:
                        parents = visible_sets(config, n + 1, times, verify=False).visible_sets
                    total += prune_level(config, n, parents, times, verify=True).checks
    return total


# -- braid relations ---------------------------------------------------------------

BRAID_RELATIONS = (
    ("a{s}a{t}a{s}", "a{t}b{s}a{t}"),
    ("b{s}b{t}a{s}", "a{t}b{s}b{t}"),
    ("a{s}b{t}b{s}", "b{t}b{s}a{t}"),
    ("b{s}b{t}b{s}", "b{t}b{s}b{t}"),
)
COMMUTING = (("a", "a"), ("a", "b"), ("b", "a"), ("b", "b"))


def _try(word, seq):
    try:
        for op, s in reversed(word):
            seq = apply_op(seq, op, s)
        return seq
    except InvalidInput:
        return None


def braid_suite(rng: random.Random | None = None, max_r: int = 6) -> int:
    """Each braid and commutation relation, on every level sequence where its
    left side applies, also applies on the right and ends at the same place."""
    checked = 0
    for r in range(3, max_r + 1):
        for seq in level_sequences(r):
            for s in range(1, r - 1):
                for lhs, rhs in BRAID_RELATIONS:
                    w1 = parse_word(lhs.format(s=s, t=s + 1))
                    w2 = parse_word(rhs.format(s=s, t=s + 1))
                    a = _try(w1, seq)
                    if a is None:
                        continue
                    if _try(w2, seq) != a:
                        raise ConsistencyError(f"{lhs} = {rhs} fails at s={s} on {seq}")
                    checked += 1
            for s, t in combinations(range(1, r), 2):
                if t - s < 2:
                    continue
                for x, y in COMMUTING:
                    w1 = ((x, s), (y, t))
                    a = _try(w1, seq)
                    if a is None:
                        continue
                    if _try(((y, t), (x, s)), seq) != a:
                        raise ConsistencyError(f"{x}{s} {y}{t} do not commute on {seq}")
                    checked += 1
    return checked


# -- the M = 5 region tables --------------------------------------------------------

def region_intervals(p: Sequence[Fraction]) -> list[tuple[int, int, Fraction | None, Fraction | None]]:
    """(region, sign of mu, lower, upper) bounds on lambda/mu; None is unbounded."""
    th = table_thresholds(p)
    neg = [None, th["1/(p5-p6)"], th["A4"], th["1/(p3-p6)"], th["1/(p1-p6)"], th["A1"], None]
    pos = [None, th["1/(p4-p6)"], th["B7"], th["1/(p2-p6)"], None]
    out = []
    for region, lo, hi in zip((6, 5, 4, 3, 2, 1), neg, neg[1:]):
        out.append((region, -1, lo, hi))
    for region, lo, hi in zip((9, 8, 7, 6), pos, pos[1:]):
        out.append((region, 1, lo, hi))
    return out


def sample_in(rng: random.Random, lo, hi) -> Fraction:
    u = Fraction(rng.randint(1, 99), 100)
    if lo is None and hi is None:
        return random_rational(rng)
    if lo is None:
        return hi - 3 * u
    if hi is None:
        return lo + 3 * u
    if hi <= lo:
        raise InvalidInput(f"empty interval ({lo}, {hi})")
    return lo + (hi - lo) * u


@dataclass(frozen=True)
class RegionSample:
    expected: int
    mu: Fraction
    lam: Fraction
    conditions: int | None
    t4_region: int | None
    evolution: int | None
    generic: bool


def region_samples(rng: random.Random, per_region: int = 6, p=SIX_PHASE_P, c=SIX_PHASE_C) -> list[RegionSample]:
    """Sample lambda/mu inside every region, then classify three ways."""
    base = validate_config(5, p, c)
    out = []
    for region, sign, lo, hi in region_intervals(base.p):
        for _ in range(per_region):
            mu = sign * Fraction(rng.randint(5, 30), 10)
            lam = sample_in(rng, lo, hi) * mu
            if lam == 0:
                continue
            config = resolve_offsets(base, {5: lam, 4: mu})
            chain = classify_evolution(config)
            cond = table_conditions(config)
            t4r = t4_order_region(config)
            generic = not chain.degenerate_events and not cond.degenerate and not t4r.degenerate
            out.append(RegionSample(region, mu, lam, cond.region, t4r.region, chain.chain_type, generic))
    return out


def table_suite(rng: random.Random, per_region: int = 6) -> int:
    samples = region_samples(rng, per_region)
    for s in samples:
        if s.generic and not (s.expected == s.conditions == s.t4_region == s.evolution):
            raise ConsistencyError(
                f"region {s.expected} sample mu={s.mu} lambda={s.lam}: conditions={s.conditions}, "
                f"t4 order={s.t4_region}, evolution={s.evolution}")
    return sum(s.generic for s in samples)

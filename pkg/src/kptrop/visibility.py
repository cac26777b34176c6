"""Visibility of phase coincidences.

A coincidence of the phases in S is visible when no other phase strictly
exceeds the common value at the coincidence point. Two routes decide it:

* :func:`is_visible` evaluates every phase exactly at the solved point;
* :func:`prune_level` derives the visible set of a level from the visible
  set one level up, using the child ordering, the alternating half-line rule
  and the requirement that a visible child has a visible parent.

``prune_level`` checks every verdict against the oracle and raises
:class:`~kptrop.errors.ConsistencyError` on any disagreement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .critical import CriticalValue, critical_point_solve, critical_value, order_critical_values
from .errors import ConsistencyError, InvalidInput
from .model import SolitonConfig, all_phases

SIDES = ("below", "above")


@dataclass(frozen=True)
class VisibilityVerdict:
    indices: tuple[int, ...]
    visible: bool
    witness: int | None
    generic: bool
    ties: tuple[int, ...] = ()


def is_visible(config: SolitonConfig, S, times: Mapping | None = None) -> VisibilityVerdict:
    """Exact dominance test at the coincidence point of S.

    ``witness`` is the outside index with the largest phase when that phase
    beats the common value. ``ties`` lists outside indices whose phase equals
    it; a visible point with ties is not generic.
    """
    point = critical_point_solve(config, S, times)
    phases = all_phases(config, point.coordinates)
    common = point.phase
    inside = set(point.indices)
    best, witness, ties = None, None, []
    for k, th in enumerate(phases, start=1):
        if k in inside:
            continue
        if th > common and (best is None or th > best):
            best, witness = th, k
        elif th == common:
            ties.append(k)
    return VisibilityVerdict(point.indices, witness is None, witness, not ties, tuple(ties))


def _child(parent: Sequence[int], position: int) -> tuple[int, ...]:
    """Parent with its ``position``-th entry (1-based) removed."""
    return tuple(parent[:position - 1]) + tuple(parent[position:])


def deleted_positions(size: int, side: str) -> list[int]:
    """1-based positions whose removal gives a non-visible child half-line.

    For a parent with ``size`` = n+2 indices, below its critical value the
    children missing positions n+1, n-1, ... are hidden; above it those
    missing n+2, n, ... are.
    """
    if side not in SIDES:
        raise InvalidInput(f"side must be 'below' or 'above', got {side!r}")
    top = size - 1 if side == "below" else size
    return list(range(top, 0, -2))


def halfline_visibility_rule(parent, side: str) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    """Split the children of ``parent`` into (non-visible, potentially visible)."""
    ks = tuple(sorted(parent))
    if len(ks) < 3:
        raise InvalidInput("half-line rule needs a parent of at least three indices")
    hidden = set(deleted_positions(len(ks), side))
    dead = [_child(ks, pos) for pos in sorted(hidden)]
    alive = [_child(ks, pos) for pos in range(1, len(ks) + 1) if pos not in hidden]
    return dead, alive


def two_step_bounds(size: int, side: str) -> int:
    """Largest admissible ``s`` in :func:`two_step_rule` for a parent of ``size``."""
    n = size - 2
    return (n + 2) // 2 - 1 if side == "below" else (n + 1) // 2


def two_step_rule(parent, r: int, s: int, side: str) -> tuple[int, ...]:
    """Grandchild of ``parent`` whose whole line is hidden on ``side``.

    With parent size n+2, below the parent's critical value the set missing
    positions n+1-2s and n+1-2r (0 <= r < s) is never visible as the next
    time varies; above, positions n+2-2s and n+2-2r.
    """
    ks = tuple(sorted(parent))
    if side not in SIDES:
        raise InvalidInput(f"side must be 'below' or 'above', got {side!r}")
    if len(ks) < 4:
        raise InvalidInput("two-step rule needs a parent of at least four indices")
    if not (isinstance(r, int) and isinstance(s, int)) or not 0 <= r < s <= two_step_bounds(len(ks), side):
        raise InvalidInput(f"malformed (r, s) = ({r}, {s}) for parent of size {len(ks)} {side}")
    base = len(ks) - 1 if side == "below" else len(ks)
    drop = {base - 2 * s, base - 2 * r}
    return tuple(k for pos, k in enumerate(ks, start=1) if pos not in drop)


def two_step_hidden(parent, side: str) -> list[tuple[int, ...]]:
    ks = tuple(sorted(parent))
    top = two_step_bounds(len(ks), side)
    return sorted({two_step_rule(ks, r, s, side) for s in range(1, top + 1) for r in range(s)})


def side_of(config: SolitonConfig, parent, times: Mapping | None = None) -> str:
    """Where the frozen time sits relative to the parent's critical value."""
    cv = critical_value(config, parent, times)
    t = config.time_vector(times)[cv.level]
    if t == cv.value:
        return "at"
    return "below" if t < cv.value else "above"


@dataclass
class LevelResult:
    level: int
    visible: list[CriticalValue]
    hidden: list[CriticalValue]
    relations: list[tuple[tuple[int, ...], tuple[int, ...]]]
    degenerate: list[tuple[int, ...]] = field(default_factory=list)
    conjecture_mismatch: list[tuple[int, ...]] = field(default_factory=list)
    checks: int = 0

    @property
    def visible_sets(self) -> list[tuple[int, ...]]:
        return [cv.indices for cv in self.visible]


def transitive_reduction(nodes: Iterable, edges: Iterable[tuple]) -> list[tuple]:
    """Cover relations of the order generated by ``edges``; raises on a cycle."""
    nodes = list(nodes)
    succ = {v: set() for v in nodes}
    for a, b in edges:
        if a != b:
            succ[a].add(b)
    reach = {}

    def visit(v, stack):
        if v in reach:
            return reach[v]
        if v in stack:
            raise ConsistencyError(f"order relations contain a cycle through {v}")
        stack.add(v)
        out = set()
        for w in succ[v]:
            out.add(w)
            out |= visit(w, stack)
        stack.discard(v)
        reach[v] = out
        return out

    for v in nodes:
        visit(v, set())
    covers = []
    for a in nodes:
        for b in succ[a]:
            if not any(b in reach[m] for m in succ[a] if m != b):
                covers.append((a, b))
    return sorted(covers)


def prune_level(config: SolitonConfig, n: int, visible_parents: Iterable, times: Mapping | None = None,
                verify: bool = True) -> LevelResult:
    """Visible level-n critical values from the visible level-(n+1) parents.

    ``times`` must freeze t_{n+1} and above. A child is hidden when the rule
    of a visible parent removes it on the current side, or when none of its
    parents is visible. At the parent's own critical value all children
    coincide with the parent and are kept (flagged degenerate).
    """
    if not 1 <= n < config.M:
        raise InvalidInput(f"level {n} outside 1..{config.M - 1}")
    parents_visible = {tuple(sorted(P)) for P in visible_parents}
    size = n + 1
    all_parents = list(combinations(range(1, config.size + 1), size + 1))
    killed, conj_killed, has_parent = set(), set(), set()
    degenerate = set()
    relations = []
    for P in all_parents:
        order = order_critical_values(config, P, times)
        if order.side == "at":
            if P in parents_visible:
                degenerate.update(cv.indices for cv in order.values)
                has_parent.update(cv.indices for cv in order.values)
            continue
        dead, _ = halfline_visibility_rule(P, order.side)
        conj_killed.update(dead)
        if P in parents_visible:
            killed.update(dead)
            has_parent.update(cv.indices for cv in order.values)
        survivors = [cv.indices for cv in order.values if cv.indices not in dead]
        relations.extend(zip(survivors, survivors[1:]))
    children = list(combinations(range(1, config.size + 1), size))
    visible, hidden = [], []
    mismatch = []
    checks = 0
    for ch in children:
        analytic = ch in has_parent and (ch not in killed or ch in degenerate)
        cv = critical_value(config, ch, times)
        if verify:
            verdict = is_visible(config, ch, times)
            checks += 1
            if verdict.visible != analytic:
                if verdict.generic and ch not in degenerate:
                    raise ConsistencyError(
                        f"level {n}: {cv.label} analytic={'visible' if analytic else 'hidden'} "
                        f"but oracle={'visible' if verdict.visible else 'hidden'}")
                degenerate.add(ch)
                analytic = verdict.visible
            elif not verdict.generic:
                degenerate.add(ch)
        (visible if analytic else hidden).append(cv)
        if (ch not in conj_killed) != analytic and ch not in degenerate:
            mismatch.append(ch)
    key = lambda cv: (cv.value, cv.indices)
    visible.sort(key=key)
    hidden.sort(key=key)
    vis = {cv.indices for cv in visible}
    rel = {(a, b) for a, b in relations if a in vis and b in vis}
    covers = transitive_reduction(sorted(vis), rel)
    return LevelResult(n, visible, hidden, covers, sorted(degenerate), mismatch, checks)


def visible_sets(config: SolitonConfig, level: int, times: Mapping | None = None,
                 verify: bool = True) -> LevelResult:
    """Visible critical values of one level, recursing down from the top.

    The full index set is the only level-M coincidence and is always visible.
    """
    if not 1 <= level <= config.M:
        raise InvalidInput(f"level {level} outside 1..{config.M}")
    full = tuple(range(1, config.size + 1))
    if level == config.M:
        return LevelResult(level, [critical_value(config, full, times)], [], [])
    parents = [full]
    result = None
    for n in range(config.M - 1, level - 1, -1):
        result = prune_level(config, n, parents, times, verify=verify)
        parents = result.visible_sets
    return result


def visible_points_at(config: SolitonConfig, level: int, times: Mapping | None = None) -> list[tuple[int, ...]]:
    """Index sets whose coincidence is visible, straight from the oracle."""
    out = []
    for S in combinations(range(1, config.size + 1), level + 1):
        if is_visible(config, S, times).visible:
            out.append(S)
    return out


def oracle_agreement(config: SolitonConfig, times: Mapping | None = None) -> int:
    """Run the analytic pipeline on every level, each one verified by the oracle.

    Returns the number of point checks made.
    """
    total = 0
    full = tuple(range(1, config.size + 1))
    parents = [full]
    for n in range(config.M - 1, 0, -1):
        res = prune_level(config, n, parents, times, verify=True)
        total += res.checks
        parents = res.visible_sets
    return total


def times_around(config: SolitonConfig, parent, times: Mapping | None = None,
                 delta: Fraction = Fraction(1, 7)) -> dict:
    """Frozen-time mappings just below and just above the parent's critical value."""
    cv = critical_value(config, parent, times)
    base = dict(times or {})
    return {
        "below": {**base, cv.level: cv.value - delta},
        "above": {**base, cv.level: cv.value + delta},
    }

"""Soliton trees at an event and their evolution through critical times.

At a generic time the visible triple points y_ijk, sorted from the top
(largest y) down, build a rooted binary tree: starting from the line between
phases 1 and M+1, the node (i,j,k) splits the line (i,k) into (i,j) and
(j,k). Crossing a visible critical time t_ijkl right-rotates the node (i,k,l)
over its left child (i,j,k).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, groupby
from typing import Mapping, Sequence

from .combinatorics import (
    decode_levels,
    leaves,
    left_comb,
    right_comb,
    right_rotations,
    tree_triples,
    tree_ycode,
)
from .critical import critical_value, label, level_critical_value
from .errors import ConsistencyError, DegenerateEvent, InvalidInput
from .model import SolitonConfig
from .visibility import visible_sets

# Row -> sequence of critical times, for M = 5.
CHAIN_TYPE_SEQUENCES = {
    1: ["t1234", "t1245", "t2345", "t1256", "t2356", "t3456"],
    2: ["t1234", "t1245", "t1256", "t2345", "t2356", "t3456"],
    3: ["t1234", "t1245", "t1256", "t2456", "t2346"],
    4: ["t1234", "t1456", "t1246", "t2346"],
    5: ["t1456", "t1234", "t1246", "t2346"],
    6: ["t1456", "t1346", "t1236"],
    7: ["t1345", "t1356", "t3456", "t1236"],
    8: ["t1345", "t1356", "t1236", "t3456"],
    9: ["t1345", "t1235", "t1256", "t2356", "t3456"],
}


@dataclass(frozen=True)
class SolitonTree:
    triples: tuple[tuple[int, int, int], ...]  # top to bottom
    y_values: tuple[Fraction, ...]
    level_code: tuple[int, ...]
    tree: object

    @property
    def ycode(self) -> tuple[int, ...]:
        return tree_ycode(self.tree)

    @property
    def labels(self) -> list[str]:
        return [label(t) for t in self.triples]


def level_code_of(triples: Sequence[tuple[int, int, int]], M: int) -> tuple[int, ...]:
    """Split positions of an ordered node list, starting from line (1, M+1)."""
    lines = [(1, M + 1)]
    code = []
    for i, j, k in triples:
        try:
            pos = lines.index((i, k))
        except ValueError:
            raise ConsistencyError(f"node y{i}{j}{k} splits line x{i}{k}, which is not present") from None
        code.append(pos + 1)
        lines[pos:pos + 1] = [(i, j), (j, k)]
    if lines != [(m, m + 1) for m in range(1, M + 1)]:
        raise ConsistencyError(f"nodes {list(triples)} do not end in the asymptotic lines")
    return tuple(code)


def _level_times(times: Mapping | None) -> dict:
    return dict(times or {})


def _order_with_ties(nodes, M):
    """Top-to-bottom order in which every node finds its line already split off."""
    lines = {(1, M + 1)}
    pending = list(nodes)
    out = []
    while pending:
        top = pending[0].value
        group = [cv for cv in pending if cv.value == top]
        pick = next((cv for cv in group if (cv.indices[0], cv.indices[2]) in lines), None)
        if pick is None:
            raise ConsistencyError("triple points of equal height cannot be ordered into a tree")
        i, j, k = pick.indices
        lines -= {(i, k)}
        lines |= {(i, j), (j, k)}
        out.append(pick)
        pending.remove(pick)
    return out


def tree_at_event(config: SolitonConfig, times: Mapping | None = None, verify: bool = True,
                  allow_level_ties: bool = False) -> SolitonTree:
    """Tree formed by the visible triple points at the given times (t frozen).

    Equal heights of unrelated nodes leave the tree well defined but not its
    levels; they raise unless ``allow_level_ties`` is set.
    """
    if config.M < 2:
        return SolitonTree((), (), (), None)
    vec = config.time_vector(times)
    if config.M >= 3:
        crit = visible_sets(config, 3, times, verify=verify)
        hit = [cv for cv in crit.visible if cv.value == vec[3]]
        if hit:
            raise DegenerateEvent(f"t is a visible critical time ({hit[0].label})", [cv.indices for cv in hit])
        nodes = visible_sets(config, 2, times, verify=verify).visible
    else:
        nodes = [critical_value(config, (1, 2, 3), times)]
    nodes = sorted(nodes, key=lambda cv: (-cv.value, cv.indices))
    ties = [tuple(cv.indices for cv in g) for _, g in ((k, list(g)) for k, g in
            groupby(nodes, key=lambda cv: cv.value)) if len(g) > 1]
    if ties:
        if not allow_level_ties:
            raise DegenerateEvent("visible triple points share a y value", ties)
        nodes = _order_with_ties(nodes, config.M)
    triples = tuple(cv.indices for cv in nodes)
    code = level_code_of(triples, config.M)
    tree = decode_levels(code)
    if sorted(tree_triples(tree)) != sorted(triples):
        raise ConsistencyError("decoded tree disagrees with the visible triple points")
    return SolitonTree(triples, tuple(cv.value for cv in nodes), code, tree)


def apply_rotation(sequence: Sequence[tuple[int, int, int]], rotation: Sequence[int],
                   permute: bool = True) -> list[tuple[int, int, int]]:
    """Replace (y_ikl, y_ijk) by (y_ijl, y_jkl) in a top-to-bottom node list.

    When other nodes sit between the pair they are moved below it (a level
    exchange), which needs ``permute``.
    """
    i, j, k, l = rotation
    seq = [tuple(t) for t in sequence]
    upper, lower = (i, k, l), (i, j, k)
    if upper not in seq or lower not in seq:
        raise InvalidInput(f"rotation t{i}{j}{k}{l} needs nodes y{i}{k}{l} and y{i}{j}{k}")
    a, b = seq.index(upper), seq.index(lower)
    if b < a:
        raise InvalidInput(f"y{i}{j}{k} lies above y{i}{k}{l}; no right rotation possible")
    if b != a + 1:
        if not permute:
            raise InvalidInput(f"y{i}{k}{l} and y{i}{j}{k} are not adjacent")
        seq.pop(b)
        seq.insert(a + 1, lower)
    seq[a:a + 2] = [(i, j, l), (j, k, l)]
    return seq


def rotate_tree(tree, rotation: Sequence[int]):
    for lab, new in right_rotations(tree):
        if lab == tuple(rotation):
            return new
    raise InvalidInput(f"t{''.join(map(str, rotation))} is not a right rotation of this tree")


@dataclass
class EvolutionStep:
    time: Fraction
    rotations: tuple[tuple[int, ...], ...]
    tree: object
    triples: tuple[tuple[int, int, int], ...]

    @property
    def labels(self) -> list[str]:
        return [label(r) for r in self.rotations]

    @property
    def degenerate(self) -> bool:
        return len(self.rotations) > 1


@dataclass
class EvolutionChain:
    M: int
    initial: object
    steps: list[EvolutionStep]
    final: object
    chain_type: int | None = None
    relations: list = field(default_factory=list)

    @property
    def labels(self) -> list[str]:
        return [lab for st in self.steps for lab in st.labels]

    @property
    def times(self) -> list[Fraction]:
        return [st.time for st in self.steps for _ in st.rotations]

    @property
    def degenerate_events(self) -> list[EvolutionStep]:
        return [st for st in self.steps if st.degenerate]

    def trees(self) -> list:
        return [self.initial] + [st.tree for st in self.steps]


def _midpoints(values: Sequence[Fraction]) -> list[Fraction]:
    if not values:
        return [Fraction(0)]
    pts = [values[0] - 1]
    pts += [(a + b) / 2 for a, b in zip(values, values[1:])]
    pts.append(values[-1] + 1)
    return pts


def classify_evolution(config: SolitonConfig, times: Mapping | None = None,
                       verify: bool = True) -> EvolutionChain:
    """Evolution in t as a chain of right rotations, from left to right comb.

    ``times`` freezes t4 and above; any value given for t is ignored. With
    ``verify`` the tree between consecutive critical times is rebuilt from the
    visible triple points and compared with the rotated tree.
    """
    frozen = {k: v for k, v in _level_times(times).items() if k not in (3, "t")}
    r = config.M - 1
    if config.M < 3:
        tree = left_comb(max(r, 0)) if r >= 0 else None
        return EvolutionChain(config.M, tree, [], tree)
    crit = visible_sets(config, 3, frozen, verify=verify)
    events = []
    for value, grp in groupby(crit.visible, key=lambda cv: cv.value):
        events.append((value, [cv.indices for cv in grp]))
    tree = left_comb(r)
    initial = tree
    steps = []
    order = [tuple(t) for t in tree_triples(tree)]
    values = [v for v, _ in events]
    probes = _midpoints(values)
    if verify:
        first = tree_at_event(config, {**frozen, 3: probes[0]}, verify=False,
                              allow_level_ties=True)
        if first.tree != initial:
            raise ConsistencyError("initial tree is not the left comb")
        order = list(first.triples)
    for n, (value, rots) in enumerate(events):
        if len(rots) > 1:
            # coinciding critical times: the jump need not factor into these
            # rotations, so the tree after it is read off the triple points
            snap = tree_at_event(config, {**frozen, 3: probes[n + 1]}, verify=False,
                                 allow_level_ties=True)
            tree, order = snap.tree, list(snap.triples)
            steps.append(EvolutionStep(value, tuple(rots), tree, tuple(order)))
            continue
        rot = rots[0]
        if not any(lab == tuple(rot) for lab, _ in right_rotations(tree)):
            raise ConsistencyError(f"{label(rot)} is not a right rotation of the current tree")
        tree = rotate_tree(tree, rot)
        order = apply_rotation(order, rot)
        if verify:
            snap = tree_at_event(config, {**frozen, 3: probes[n + 1]}, verify=False,
                                 allow_level_ties=True)
            if snap.tree != tree:
                raise ConsistencyError(f"tree after {label(rot)} disagrees with the visible triple points")
            order = list(snap.triples)
        steps.append(EvolutionStep(value, tuple(rots), tree, tuple(order)))
    if tree != right_comb(r):
        raise ConsistencyError("evolution does not end in the right comb")
    chain = EvolutionChain(config.M, initial, steps, tree, relations=crit.relations)
    if config.M == 5:
        chain.chain_type = chain_type(chain.labels)
    return chain


def chain_type(labels: Sequence[str]) -> int | None:
    for row, seq in CHAIN_TYPE_SEQUENCES.items():
        if list(labels) == seq:
            return row
    return None


def is_maximal_tamari_chain(trees: Sequence, r: int) -> bool:
    """Consecutive trees differ by one right rotation, from left to right comb."""
    if not trees or trees[0] != left_comb(r) or trees[-1] != right_comb(r):
        return False
    return all(any(t == b for _, t in right_rotations(a)) for a, b in zip(trees, trees[1:]))


# --- refinement by levels ------------------------------------------------


@dataclass(frozen=True)
class RefinedEvent:
    time: Fraction
    kind: str  # "rotation" or "level"
    labels: tuple[str, ...]
    level_code: tuple[int, ...]


def _y_value(config, triple, frozen, t):
    return critical_value(config, triple, {**frozen, 3: t}).value


def _descendants(tree) -> dict:
    """Map each node triple to the set of triples below it."""
    out = {}

    def walk(t, first):
        if t is None:
            return set()
        L = leaves(t[0])
        me = (first, first + L, first + leaves(t))
        below = walk(t[0], first) | walk(t[1], first + L)
        out[me] = below
        return below | {me}

    walk(tree, 1)
    return out


def refine_with_levels(config: SolitonConfig, chain: EvolutionChain,
                       times: Mapping | None = None) -> list[RefinedEvent]:
    """Insert the level exchanges between consecutive rotations.

    Within an interval the tree is fixed; two nodes neither of which lies
    below the other swap heights at t_{ijk;lmn}. Equal p-sums mean parallel
    heights and no crossing.
    """
    frozen = {k: v for k, v in _level_times(times).items() if k not in (3, "t")}
    bounds = [None] + [st.time for st in chain.steps] + [None]
    trees = chain.trees()
    out = []
    for n, tree in enumerate(trees):
        lo, hi = bounds[n], bounds[n + 1]
        below = _descendants(tree)
        nodes = sorted(below)
        crossings = []
        for a, b in combinations(nodes, 2):
            if a in below[b] or b in below[a]:
                continue
            try:
                cross = level_critical_value(config, a, b, frozen).value
            except InvalidInput:
                continue
            if (lo is None or cross > lo) and (hi is None or cross < hi):
                crossings.append((cross, a, b))
        crossings.sort()
        for cross, a, b in crossings:
            probe = cross + Fraction(1, 10**6) if hi is None else (
                cross + min(Fraction(1, 10**6), (hi - cross) / 2))
            nxt = [c for c, _, _ in crossings if c > cross]
            if nxt:
                probe = min(probe, (cross + nxt[0]) / 2)
            order = sorted(nodes, key=lambda tr: (-_y_value(config, tr, frozen, probe), tr))
            out.append(RefinedEvent(cross, "level", (f"t{label(a)[1:]};{label(b)[1:]}",),
                                    level_code_of(order, config.M)))
        if n < len(chain.steps):
            st = chain.steps[n]
            out.append(RefinedEvent(st.time, "rotation", tuple(st.labels), level_code_of(st.triples, config.M)))
    return out


# --- the M = 5 parameter regions ---------------------------------------------


@dataclass(frozen=True)
class RegionReport:
    region: int | None
    mu: Fraction
    lam: Fraction
    degenerate: bool
    detail: str


def table_parameters(config: SolitonConfig, times: Mapping | None = None) -> tuple[Fraction, Fraction]:
    """(mu, lambda): t4 and t5 measured from their top critical values."""
    if config.M != 5:
        raise InvalidInput("the M = 5 tables need M = 5")
    vec = config.time_vector(times)
    lam = vec[5] - critical_value(config, range(1, 7), times).value
    mu = vec[4] - critical_value(config, range(1, 6), times).value
    return mu, lam


def table_thresholds(p: Sequence[Fraction]) -> dict:
    p1, p2, p3, p4, p5, p6 = p
    return {
        "A1": (p3 + p4 - p1 - p6) / ((p3 - p6) * (p4 - p6)),
        "A4": (p2 + p3 - p5 - p6) / ((p2 - p6) * (p3 - p6)),
        "B7": (p1 + p2 - p4 - p5) / (p1 * p2 - p4 * p5 + (p4 + p5 - p1 - p2) * p6),
        "1/(p1-p6)": 1 / (p1 - p6),
        "1/(p2-p6)": 1 / (p2 - p6),
        "1/(p3-p6)": 1 / (p3 - p6),
        "1/(p4-p6)": 1 / (p4 - p6),
        "1/(p5-p6)": 1 / (p5 - p6),
    }


def table_conditions(config: SolitonConfig, times: Mapping | None = None) -> RegionReport:
    """Region 1..9 from the inequalities in lambda/mu.

    For mu < 0 the ratio lambda/mu runs through regions 6, 5, 4, 3, 2, 1 as it
    increases; for mu > 0 through 9, 8, 7, 6. mu = 0 with lambda > 0 is region
    6. Equalities are degenerate.
    """
    mu, lam = table_parameters(config, times)
    th = table_thresholds(config.p)
    if lam == 0:
        return RegionReport(None, mu, lam, True, "lambda = 0: top level coincidence")
    if mu == 0:
        if lam > 0:
            return RegionReport(6, mu, lam, False, "mu = 0 < lambda")
        return RegionReport(None, mu, lam, True, "mu = 0 with lambda < 0")
    rho = lam / mu
    if mu < 0:
        cuts = [(th["1/(p5-p6)"], 6), (th["A4"], 5), (th["1/(p3-p6)"], 4),
                (th["1/(p1-p6)"], 3), (th["A1"], 2)]
        last = 1
    else:
        cuts = [(th["1/(p4-p6)"], 9), (th["B7"], 8), (th["1/(p2-p6)"], 7)]
        last = 6
    for bound, region in cuts:
        if rho == bound:
            return RegionReport(None, mu, lam, True, f"lambda/mu = {bound} on a region boundary")
        if rho < bound:
            return RegionReport(region, mu, lam, False, f"lambda/mu = {rho} < {bound}")
    return RegionReport(last, mu, lam, False, f"lambda/mu = {rho} above all thresholds")


def t4_values(config: SolitonConfig, times: Mapping | None = None) -> dict:
    """Critical t4 values used by the t4-only description, keyed by label."""
    out = {}
    for S in combinations(range(1, 7), 5):
        out["".join(map(str, S))] = critical_value(config, S, times).value
    for a, b in (((2, 3, 4, 5), (1, 2, 5, 6)), ((1, 2, 3, 6), (3, 4, 5, 6)), ((1, 2, 3, 4), (1, 4, 5, 6))):
        key = f"{''.join(map(str, a))};{''.join(map(str, b))}"
        try:
            out[key] = level_critical_value(config, a, b, times).value
        except InvalidInput:
            out[key] = None
    return out


def t4_order_region(config: SolitonConfig, times: Mapping | None = None) -> RegionReport:
    """Region from t4 against its critical values (t5 frozen).

    The split of regions 1 and 2 follows the sign of
    t_1256 - t_2345 = (p3+p4-p1-p6)(t4 - t4_{2345;1256}), and just above
    t4_12345 (for t5 below its critical value) lies region 9, in line with
    the lambda/mu description.
    """
    mu, lam = table_parameters(config, times)
    t4 = config.time_vector(times)[4]
    v = t4_values(config, times)
    p1, _, p3, p4, _, p6 = config.p
    L = v["2345;1256"]

    def region_1_or_2():
        if L is None:  # p1+p6 = p3+p4: the two times never swap
            return 1
        if t4 == L:
            return None
        ahead = (p3 + p4 - p1 - p6) * (t4 - L)
        return 1 if ahead > 0 else 2

    checks = [
        (lambda: t4 < min(v["12345"], v["23456"]), region_1_or_2),
        (lambda: v["23456"] < t4 < min(v["12345"], v["12456"]), lambda: 3),
        (lambda: v["12456"] < t4 < min(v["12346"], v["1234;1456"]), lambda: 4),
        (lambda: v["1234;1456"] < t4 < v["12346"], lambda: 5),
        (lambda: t4 > max(v["12346"], v["13456"]), lambda: 6),
        (lambda: v["12345"] < t4 < min(v["12356"], v["23456"]), lambda: 9),
        (lambda: v["12356"] < t4 < min(v["13456"], v["1236;3456"]), lambda: 8),
        (lambda: v["1236;3456"] < t4 < v["13456"], lambda: 7),
    ]
    if lam == 0 or t4 in {x for x in v.values() if x is not None}:
        return RegionReport(None, mu, lam, True, "t4 on a critical value")
    hits = [pick() for cond, pick in checks if cond()]
    hits = [h for h in hits if h is not None]
    if len(hits) != 1:
        return RegionReport(None, mu, lam, True, f"t4 conditions matched {hits}")
    return RegionReport(hits[0], mu, lam, False, "t4 conditions")


@dataclass(frozen=True)
class LevelOrderRow:
    side: str
    condition: str
    order: tuple[str, ...]
    present: bool


def top_level_order(config: SolitonConfig, times: Mapping | None = None) -> LevelOrderRow:
    """Order of the critical t4 values for the frozen t5.

    t4_{1256;2345} is realised when it lies below t4_12345 (t5 below its top
    value) or below t4_23456 (t5 above it).
    """
    mu, lam = table_parameters(config, times)
    if lam == 0:
        raise DegenerateEvent("t5 at its top critical value", [tuple(range(1, 7))])
    v = t4_values(config, times)
    p1, _, p3, p4, _, p6 = config.p
    cond = "p1+p6<p3+p4" if p1 + p6 < p3 + p4 else ("p1+p6>p3+p4" if p1 + p6 > p3 + p4 else "p1+p6=p3+p4")
    L = v["2345;1256"]
    if lam < 0:
        side = "below"
        base = ["12345", "12356", "1236;3456", "13456"]
        present = L is not None and L < v["12345"]
    else:
        side = "above"
        base = ["23456", "12456", "1234;1456", "12346"]
        present = L is not None and L < v["23456"]
    keys = (["2345;1256"] if present else []) + base
    order = sorted(keys, key=lambda k: v[k])
    return LevelOrderRow(side, cond, tuple(order), present)

"""Tropical fields on grids, boundary extraction, the exact solution and
deterministic SVG / DOT output.

The tropical field assigns each grid cell the phase(s) attaining the maximum
at the cell centre. The float raster kernel proposes a winner together with
its lead over the runner-up; cells whose lead is within the float error
bound are re-decided exactly (rational arithmetic for the simple class,
certified log comparisons for wedge solutions). Grids therefore agree with
exact evaluation at every cell centre.
"""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from . import kernels
from .combinatorics import Poset, tree_ycode
from .errors import InvalidInput
from .exact import as_rational, format_rational
from .general import GeneralTau, LogNumber, certified_sign
from .model import SolitonConfig

# relative float error budget for a phase value; far above the few-ulp
# error of evaluating a three-term affine form
_FLOAT_SLACK = 1e-9


@dataclass(frozen=True)
class BBox:
    x0: Fraction
    x1: Fraction
    y0: Fraction
    y1: Fraction

    @property
    def dx(self):
        return self.x1 - self.x0

    @property
    def dy(self):
        return self.y1 - self.y0


def parse_bbox(value) -> BBox:
    """"x0,x1,y0,y1" or a 4-sequence of rationals; decimals accepted in strings."""
    from .exact import parse_rational

    if isinstance(value, BBox):
        return value
    parts = value.split(",") if isinstance(value, str) else list(value)
    if len(parts) != 4:
        raise InvalidInput(f"bounding box needs four numbers, got {value!r}")
    nums = [parse_rational(v.strip(), allow_decimal=True) if isinstance(v, str) else as_rational(v) for v in parts]
    box = BBox(*nums)
    if box.x1 <= box.x0 or box.y1 <= box.y0:
        raise InvalidInput(f"degenerate bounding box {value!r}")
    return box


def parse_resolution(value) -> tuple[int, int]:
    if isinstance(value, str):
        try:
            nx, ny = (int(v) for v in value.lower().split("x"))
        except ValueError:
            raise InvalidInput(f"resolution must look like 200x150, got {value!r}") from None
    else:
        nx, ny = value
    if nx < 2 or ny < 2:
        raise InvalidInput("resolution must be at least 2x2")
    return nx, ny


@dataclass
class RegionGrid:
    """Dominant phase keys on an nx by ny raster; cell (i, j) at index j*nx + i.

    Each cell holds the tuple of keys attaining the maximum; generic cells
    hold one key. Keys are phase indices (simple class) or index tuples.
    """

    bbox: BBox
    nx: int
    ny: int
    cells: list
    p_sums: dict
    exact_checks: int = 0
    times: dict = field(default_factory=dict)

    def keys_at(self, i: int, j: int) -> tuple:
        return self.cells[j * self.nx + i]

    def key_at(self, i: int, j: int):
        ks = self.cells[j * self.nx + i]
        return ks[0] if len(ks) == 1 else None

    @property
    def ties(self) -> dict:
        return {(n % self.nx, n // self.nx): ks for n, ks in enumerate(self.cells) if len(ks) > 1}

    @property
    def keys(self) -> list:
        return sorted({k for ks in self.cells for k in ks}, key=_key_order)

    def center(self, i: int, j: int) -> tuple[Fraction, Fraction]:
        b = self.bbox
        return (b.x0 + b.dx * (2 * i + 1) / (2 * self.nx),
                b.y0 + b.dy * (2 * j + 1) / (2 * self.ny))


def _key_order(k):
    return (k,) if isinstance(k, int) else tuple(k)


@dataclass(frozen=True)
class _Affine:
    """Phases restricted to the (x, y) plane: ax*x + ay*y + const."""

    keys: tuple
    ax: tuple
    ay: tuple
    exact_value: object  # callable (key index, x, y) -> exact value
    floats: tuple


def _simple_affine(config: SolitonConfig, times: Mapping | None) -> _Affine:
    vec = config.time_vector(times)
    consts = []
    for pk, ck in zip(config.p, config.c):
        v = ck
        for r in range(3, config.horizon + 1):
            v += pk ** r * vec[r]
        consts.append(v)
    keys = tuple(range(1, config.size + 1))
    ax = tuple(config.p)
    ay = tuple(pk * pk for pk in config.p)

    def exact(k, x, y):
        return ax[k] * x + ay[k] * y + consts[k]

    return _Affine(keys, ax, ay, exact, tuple(float(v) for v in consts))


def _general_affine(tau: GeneralTau, times: Mapping | None) -> _Affine:
    fixed = {r: as_rational(v) for r, v in (times or {}).items()}
    keys = tuple(tau.keys)
    ax, ay, consts = [], [], []
    for key in keys:
        ph = tau.phases[key]
        const = ph.constant
        for r in range(3, tau.horizon + 1):
            if fixed.get(r):
                const = const + ph.linear[r - 1] * fixed[r]
        ax.append(ph.linear[0])
        ay.append(ph.linear[1])
        consts.append(const)

    def exact(k, x, y):
        return consts[k] + ax[k] * x + ay[k] * y

    return _Affine(keys, tuple(ax), tuple(ay), exact, tuple(float(v) for v in consts))


def _affine_for(source, times) -> _Affine:
    if isinstance(source, SolitonConfig):
        return _simple_affine(source, times)
    if isinstance(source, GeneralTau):
        return _general_affine(source, times)
    raise InvalidInput(f"cannot evaluate a field for {type(source).__name__}")


def _p_sums(source) -> dict:
    if isinstance(source, SolitonConfig):
        return {k: source.p[k - 1] for k in range(1, source.size + 1)}
    return {key: sum((source.p[i - 1] for i in key), Fraction(0)) for key in source.keys}


def _exact_winners(aff: _Affine, x: Fraction, y: Fraction) -> tuple:
    values = [aff.exact_value(k, x, y) for k in range(len(aff.keys))]
    best = [0]
    for k in range(1, len(values)):
        s = certified_sign(LogNumber.of(values[k]) - LogNumber.of(values[best[0]]))
        if s > 0:
            best = [k]
        elif s == 0:
            best.append(k)
    return tuple(aff.keys[k] for k in best)


def tropical_field(source, bbox, resolution, times: Mapping | None = None) -> RegionGrid:
    """Dominant phases on a raster over ``bbox`` at the given frozen times.

    For a configuration ``times`` overrides its frozen t, t4, ...; for a
    wedge solution it supplies them ({3: t, 4: t4, ...}).
    """
    box = parse_bbox(bbox)
    nx, ny = parse_resolution(resolution)
    aff = _affine_for(source, times)
    n = len(aff.keys)
    ax = array("d", (float(v) for v in aff.ax))
    ay = array("d", (float(v) for v in aff.ay))
    const = array("d", aff.floats)
    idx = array("i", bytes(4 * nx * ny))
    gap = array("d", bytes(8 * nx * ny))
    x0, dx = float(box.x0), float(box.dx) / nx
    y0, dy = float(box.y0), float(box.dy) / ny
    kernels.argmax_grid(ax, ay, const, x0, dx, y0, dy, nx, ny, idx, gap)
    reach = max(abs(float(box.x0)), abs(float(box.x1))), max(abs(float(box.y0)), abs(float(box.y1)))
    scale = max(abs(a) * reach[0] + abs(b) * reach[1] + abs(c) for a, b, c in zip(ax, ay, const))
    tol = _FLOAT_SLACK * (1.0 + scale)
    grid = RegionGrid(box, nx, ny, [None] * (nx * ny), _p_sums(source), times=dict(times or {}))
    checks = 0
    for j in range(ny):
        for i in range(nx):
            cell = j * nx + i
            if n > 1 and gap[cell] <= tol:
                x, y = grid.center(i, j)
                grid.cells[cell] = _exact_winners(aff, x, y)
                checks += 1
            else:
                grid.cells[cell] = (aff.keys[idx[cell]],)
    grid.exact_checks = checks
    return grid


def tropical_amplitude(p_sums: Sequence[Fraction]) -> Fraction:
    """(2/m^2) * sum_{i<j} (P_j - P_i)^2 for m coinciding phases; 0 for one."""
    m = len(p_sums)
    if m < 2:
        return Fraction(0)
    total = sum(((b - a) ** 2 for a, b in combinations(p_sums, 2)), Fraction(0))
    return 2 * total / m ** 2


@dataclass(frozen=True)
class BoundarySegment:
    start: tuple[Fraction, Fraction]
    end: tuple[Fraction, Fraction]
    left: object
    right: object
    amplitude: Fraction
    cells: int


@dataclass(frozen=True)
class Junction:
    point: tuple[Fraction, Fraction]
    keys: tuple


def _pair_points(grid: RegionGrid) -> dict:
    """Midpoints of cell edges separating two different generic keys, per key pair."""
    out: dict = {}
    b = grid.bbox
    hx, hy = b.dx / grid.nx, b.dy / grid.ny
    for j in range(grid.ny):
        for i in range(grid.nx):
            k = grid.key_at(i, j)
            if k is None:
                # a tie cell centre lies on every boundary between its keys
                for pair in combinations(grid.keys_at(i, j), 2):
                    out.setdefault(tuple(sorted(pair, key=_key_order)), []).append(grid.center(i, j))
                continue
            if i + 1 < grid.nx:
                k2 = grid.key_at(i + 1, j)
                if k2 is not None and k2 != k:
                    pt = (b.x0 + hx * (i + 1), b.y0 + hy * (2 * j + 1) / 2)
                    out.setdefault(tuple(sorted((k, k2), key=_key_order)), []).append(pt)
            if j + 1 < grid.ny:
                k2 = grid.key_at(i, j + 1)
                if k2 is not None and k2 != k:
                    pt = (b.x0 + hx * (2 * i + 1) / 2, b.y0 + hy * (j + 1))
                    out.setdefault(tuple(sorted((k, k2), key=_key_order)), []).append(pt)
    return out


def extract_boundaries(grid: RegionGrid, source=None) -> list[BoundarySegment]:
    """One segment per adjacent key pair, spanning the extreme edge crossings.

    With a simple-class ``source`` the endpoints are moved onto the exact
    boundary line at the extreme y values.
    """
    segments = []
    for (k1, k2), pts in sorted(_pair_points(grid).items(), key=lambda kv: (_key_order(kv[0][0]), _key_order(kv[0][1]))):
        pts = sorted(pts, key=lambda p: (p[1], p[0]))
        start, end = pts[0], pts[-1]
        if isinstance(source, SolitonConfig):
            start, end = (_snap(source, k1, k2, pt, grid.times) for pt in (start, end))
        amp = tropical_amplitude([grid.p_sums[k1], grid.p_sums[k2]])
        segments.append(BoundarySegment(start, end, k1, k2, amp, len(pts)))
    return segments


def _snap(config: SolitonConfig, k: int, l: int, pt, times=None):
    """Point of the line theta_k = theta_l at height pt[1]."""
    y = pt[1]
    vec = config.time_vector(times)
    pk, pl = config.p[k - 1], config.p[l - 1]
    rest = config.c[k - 1] - config.c[l - 1] + (pk ** 2 - pl ** 2) * y
    for r in range(3, config.horizon + 1):
        rest += (pk ** r - pl ** r) * vec[r]
    return (-rest / (pk - pl), y)


def junctions(grid: RegionGrid) -> list[Junction]:
    """Grid vertices where three or more keys meet among the four cells."""
    out = []
    b = grid.bbox
    for j in range(grid.ny - 1):
        for i in range(grid.nx - 1):
            ks = set()
            for di, dj in ((0, 0), (1, 0), (0, 1), (1, 1)):
                ks.update(grid.keys_at(i + di, j + dj))
            if len(ks) >= 3:
                pt = (b.x0 + b.dx * (i + 1) / grid.nx, b.y0 + b.dy * (j + 1) / grid.ny)
                out.append(Junction(pt, tuple(sorted(ks, key=_key_order))))
    return out


def region_adjacency(grid: RegionGrid) -> set:
    return set(_pair_points(grid))


def bounded_regions(grid: RegionGrid) -> list[tuple[object, int]]:
    """Connected single-key components that never touch the bounding box.

    Returns (key, number of cells) per component. Simple-class fields have
    none; for general wedge solutions this is a report, not a
    classification, and a component may still be cut off by a small box.
    """
    nx, ny = grid.nx, grid.ny
    seen = [False] * (nx * ny)
    found = []
    for start in range(nx * ny):
        if seen[start] or len(grid.cells[start]) != 1:
            continue
        key = grid.cells[start][0]
        seen[start] = True
        stack, size, touches = [start], 0, False
        while stack:
            n = stack.pop()
            size += 1
            i, j = n % nx, n // nx
            touches |= i in (0, nx - 1) or j in (0, ny - 1)
            for a, b in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)):
                m = b * nx + a
                if 0 <= a < nx and 0 <= b < ny and not seen[m] and grid.cells[m] == (key,):
                    seen[m] = True
                    stack.append(m)
        if not touches:
            found.append((key, size))
    return found


# -- the exact solution --------------------------------------------------

def _exact_terms(source, times: Mapping | None):
    aff = _affine_for(source, times)
    if isinstance(source, GeneralTau):
        signs = [1.0 if source.terms[k] > 0 else -1.0 for k in aff.keys]
    else:
        signs = [1.0] * len(aff.keys)
    return aff, signs


def exact_u(source, point, hbar: float = 1.0, times: Mapping | None = None) -> float:
    """u = 2 hbar^2 (log tau)_xx at (x, y), factoring out the largest phase.

    ``point`` is (x, y); for a configuration, ``times`` overrides its frozen
    higher times. Raises on a non-positive tau.
    """
    if not hbar > 0:
        raise InvalidInput("hbar must be positive")
    aff, signs = _exact_terms(source, times)
    x, y = (float(v) for v in point)
    theta = [float(a) * x + float(b) * y + c for a, b, c in zip(aff.ax, aff.ay, aff.floats)]
    top = max(theta)
    w = [s * math.exp((t - top) / hbar) for s, t in zip(signs, theta)]
    total = math.fsum(w)
    if total <= 0:
        raise InvalidInput("tau is not positive here (singular solution)")
    a = [float(v) for v in aff.ax]
    acc = math.fsum((a[l] - a[k]) ** 2 * w[k] * w[l] for k, l in combinations(range(len(w)), 2))
    return 2.0 * acc / (total * total)


def exact_u_grid(source, bbox, resolution, hbar: float = 1.0, times: Mapping | None = None) -> array:
    """exact_u at every cell centre, row-major; NaN where tau is not positive."""
    box = parse_bbox(bbox)
    nx, ny = parse_resolution(resolution)
    aff, signs = _exact_terms(source, times)
    out = array("d", bytes(8 * nx * ny))
    kernels.exact_u_grid(array("d", (float(v) for v in aff.ax)), array("d", (float(v) for v in aff.ay)),
                         array("d", aff.floats), array("d", signs), float(box.x0), float(box.dx) / nx,
                         float(box.y0), float(box.dy) / ny, nx, ny, 1.0 / hbar, out)
    return out


def tropical_u(source, point, times: Mapping | None = None) -> Fraction:
    """Tropical value of u at a point: the amplitude of the phases attaining the maximum."""
    aff = _affine_for(source, times)
    x, y = (as_rational(v) for v in point)
    winners = _exact_winners(aff, x, y)
    sums = _p_sums(source)
    return tropical_amplitude([sums[k] for k in winners])


# -- output ----------------------------------------------------------------

_PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1",
            "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295", "#a0cbe8", "#ffbe7d")
_TIE_COLOR = "#222222"
_STYLE_KEYS = {"width", "height", "title", "palette", "stroke", "stroke_width", "cells"}


def _num(v) -> str:
    return f"{float(v):.4f}".rstrip("0").rstrip(".") or "0"


def _key_text(k) -> str:
    return str(k) if isinstance(k, int) else "".join(map(str, k))


def _check_style(style) -> dict:
    style = dict(style or {})
    bad = set(style) - _STYLE_KEYS
    if bad:
        raise InvalidInput(f"unsupported style keys: {sorted(bad)}")
    return style


def _svg_frame(box: BBox, style: dict, body: list[str]) -> str:
    width = int(style.get("width", 600))
    height = int(style.get("height", 600))
    title = style.get("title")
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    if title:
        head.append(f"<title>{_escape(str(title))}</title>")
    head.append(f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>')
    return "\n".join(head + body + ["</svg>", ""])


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _to_canvas(box: BBox, style: dict):
    width = int(style.get("width", 600))
    height = int(style.get("height", 600))
    fx, fy = width / float(box.dx), height / float(box.dy)

    def map_point(x, y):
        return (float(x) - float(box.x0)) * fx, height - (float(y) - float(box.y0)) * fy

    return map_point


def grid_svg(grid: RegionGrid, style=None, segments: Sequence[BoundarySegment] | None = None) -> str:
    """Cells coloured by dominant key (ties dark), boundaries drawn on top."""
    style = _check_style(style)
    palette = style.get("palette", _PALETTE)
    colors = {k: palette[n % len(palette)] for n, k in enumerate(grid.keys)}
    width = int(style.get("width", 600))
    height = int(style.get("height", 600))
    cw, ch = width / grid.nx, height / grid.ny
    body = []
    if style.get("cells", True):
        # one rect per horizontal run keeps files small
        for j in range(grid.ny):
            i = 0
            while i < grid.nx:
                ks = grid.keys_at(i, j)
                run = i + 1
                while run < grid.nx and grid.keys_at(run, j) == ks:
                    run += 1
                color = colors[ks[0]] if len(ks) == 1 else _TIE_COLOR
                body.append(f'<rect x="{_num(i * cw)}" y="{_num(height - (j + 1) * ch)}" '
                            f'width="{_num((run - i) * cw)}" height="{_num(ch)}" fill="{color}"/>')
                i = run
    body += _segment_lines(grid.bbox, style, segments or [])
    return _svg_frame(grid.bbox, style, body)


def _segment_lines(box: BBox, style: dict, segments) -> list[str]:
    to = _to_canvas(box, style)
    stroke = style.get("stroke", "#000000")
    sw = style.get("stroke_width", 2)
    out = []
    for s in segments:
        (x1, y1), (x2, y2) = to(*s.start), to(*s.end)
        out.append(f'<line x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}" '
                   f'stroke="{stroke}" stroke-width="{sw}" data-keys="{_key_text(s.left)}|{_key_text(s.right)}" '
                   f'data-amplitude="{format_rational(s.amplitude)}"/>')
    return out


def boundaries_svg(segments: Sequence[BoundarySegment], bbox, style=None) -> str:
    style = _check_style(style)
    box = parse_bbox(bbox)
    return _svg_frame(box, style, _segment_lines(box, style, segments))


def _dot_id(node) -> str:
    if isinstance(node, tuple):
        return '"' + "".join(str(v) if isinstance(v, int) and v < 10 else f"({v})" for v in node) + '"'
    return '"' + _escape(str(node)) + '"'


def poset_dot(poset: Poset, name: str | None = None) -> str:
    lines = [f"digraph {_dot_name(name or poset.kind)} {{", "  rankdir=BT;"]
    for v in sorted(poset.nodes, key=repr):
        lines.append(f"  {_dot_id(v)};")
    for u, v, lab in sorted(poset.edges, key=repr):
        text = "" if lab is None else f' [label="{_escape(label_text(lab))}"]'
        lines.append(f"  {_dot_id(u)} -> {_dot_id(v)}{text};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_name(text: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in text) or "g"


def label_text(lab) -> str:
    """Edge label as text: a step ('a', 2) is "a2", a tuple of steps is
    written as a word (last step leftmost), other tuples are concatenated."""
    if isinstance(lab, tuple) and len(lab) == 2 and isinstance(lab[0], str):
        return f"{lab[0]}{lab[1]}"
    if isinstance(lab, tuple) and lab and all(isinstance(x, tuple) for x in lab):
        return "".join(label_text(x) for x in reversed(lab))
    if isinstance(lab, tuple):
        return "".join(map(str, lab))
    return str(lab)


def chain_dot(chain) -> str:
    """Trees of an evolution as Y-codes, joined by the rotation labels."""
    lines = ["digraph evolution {", "  rankdir=LR;"]
    trees = chain.trees()
    names = [_dot_id(tree_ycode(t)) if t is not None else '"."' for t in trees]
    for name in dict.fromkeys(names):
        lines.append(f"  {name};")
    for n, step in enumerate(chain.steps):
        lab = ",".join(step.labels)
        lines.append(f'  {names[n]} -> {names[n + 1]} [label="{lab} @ {format_rational(step.time)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_svg(obj, style=None, bbox=None) -> str:
    """Deterministic text rendering: SVG for grids and boundary lists, DOT for
    posets and evolution chains."""
    from .evolution import EvolutionChain

    if isinstance(obj, RegionGrid):
        return grid_svg(obj, style)
    if isinstance(obj, Poset):
        _check_style(style)
        return poset_dot(obj)
    if isinstance(obj, EvolutionChain):
        _check_style(style)
        return chain_dot(obj)
    if isinstance(obj, (list, tuple)) and all(isinstance(s, BoundarySegment) for s in obj):
        if bbox is None:
            raise InvalidInput("boundary rendering needs a bounding box")
        return boundaries_svg(obj, bbox, style)
    raise InvalidInput(f"nothing to render for {type(obj).__name__}")


def auto_bbox(config: SolitonConfig, times: Mapping | None = None, margin: Fraction = Fraction(1, 4)) -> BBox:
    """Box around the visible triple points at the given times, padded."""
    from .critical import critical_point_solve
    from .visibility import is_visible

    pts = []
    if config.M >= 2:
        for S in combinations(range(1, config.size + 1), 3):
            if is_visible(config, S, times).visible:
                pt = critical_point_solve(config, S, times)
                pts.append((pt.coordinates[0], pt.coordinates[1]))
    if not pts:
        return BBox(Fraction(-10), Fraction(10), Fraction(-10), Fraction(10))
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    span = max(max(xs) - min(xs), max(ys) - min(ys), Fraction(10))
    pad = span * margin + 2
    cx, cy = (max(xs) + min(xs)) / 2, (max(ys) + min(ys)) / 2
    half = span / 2 + pad
    return BBox(cx - half, cx + half, cy - half, cy + half)

"""Command line: ``kptrop <command> ...``.

Exit codes: 0 success, 1 invalid input, 2 internal consistency failure,
3 resource guard.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import combinatorics as comb
from .errors import InvalidInput, KPTropError
from .evolution import (classify_evolution, refine_with_levels, t4_order_region, table_conditions)
from .exact import format_rational, parse_rational
from .general import (build_tau, is_self_dual, p_limit, parallel_events, spec_from_json,
                      visible_boundaries)
from .model import config_from_json
from .render import (auto_bbox, bounded_regions, exact_u_grid, extract_boundaries, grid_svg, parse_bbox,
                     label_text, parse_resolution, poset_dot, tropical_field)


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path} is not valid JSON: {exc}") from None


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _word_text(word) -> str:
    return comb.format_word(word, compact=True)


# -- classify / evolve / plot ----------------------------------------------------

def cmd_classify(args) -> int:
    config = config_from_json(_read_json(args.config))
    chain = classify_evolution(config)
    result = {
        "M": config.M,
        "events": [{"time": format_rational(st.time), "labels": st.labels, "degenerate": st.degenerate}
                   for st in chain.steps],
        "labels": chain.labels,
        "trees": ["".join(map(str, comb.tree_ycode(t))) if t is not None else "" for t in chain.trees()],
        "relations": [[list(a), list(b)] for a, b in chain.relations],
        "type": chain.chain_type,
    }
    if config.M == 5:
        cond = table_conditions(config)
        region = t4_order_region(config)
        result["region"] = {"conditions": cond.region, "t4_order": region.region,
                            "mu": format_rational(cond.mu), "lambda": format_rational(cond.lam)}
    if args.refine_levels:
        result["refined"] = [{"kind": ev.kind, "label": ",".join(ev.labels), "time": format_rational(ev.time)}
                             for ev in refine_with_levels(config, chain)]
    if args.format == "json":
        _emit(json.dumps(result, indent=2, sort_keys=True), None)
    else:
        lines = [f"M = {config.M}"]
        if chain.chain_type is not None:
            lines.append(f"type {chain.chain_type}")
        for ev in result["events"]:
            flag = "  (degenerate)" if ev["degenerate"] else ""
            lines.append(f"{ev['time']:>12}  {' '.join(ev['labels'])}{flag}")
        lines.append("trees: " + " -> ".join(result["trees"]))
        if "region" in result:
            lines.append(f"region: conditions {result['region']['conditions']}, "
                         f"t4 order {result['region']['t4_order']}")
        for ev in result.get("refined", []):
            lines.append(f"{ev['time']:>12}  {ev['label']} [{ev['kind']}]")
        _emit("\n".join(lines), None)
    return 0


def _parse_times(text: str) -> list[Fraction]:
    body = text.split("=", 1)[1] if "=" in text else text
    values = [parse_rational(v.strip(), allow_decimal=True) for v in body.split(",") if v.strip()]
    if not values:
        raise InvalidInput("no times given")
    return values


def cmd_evolve(args) -> int:
    config = config_from_json(_read_json(args.config))
    if args.format != "svg":
        raise InvalidInput(f"unsupported format {args.format!r}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    times = _parse_times(args.times)
    for n, t in enumerate(times):
        frozen = {3: t}
        box = parse_bbox(args.bbox) if args.bbox else auto_bbox(config, frozen)
        grid = tropical_field(config, box, args.res, frozen)
        svg = grid_svg(grid, {"title": f"t = {format_rational(t)}"}, extract_boundaries(grid, config))
        (out / f"frame_{n:02d}.svg").write_text(svg, encoding="utf-8")
    print(f"wrote {len(times)} frames to {out}")
    return 0


def cmd_plot(args) -> int:
    config = config_from_json(_read_json(args.config))
    frozen = {3: parse_rational(args.t, allow_decimal=True)}
    if args.t4 is not None:
        frozen[4] = parse_rational(args.t4, allow_decimal=True)
    if args.t5 is not None:
        frozen[5] = parse_rational(args.t5, allow_decimal=True)
    box = parse_bbox(args.bbox)
    if args.exact:
        nx, ny = parse_resolution(args.res)
        _emit(_heatmap_svg(exact_u_grid(config, box, (nx, ny), times=frozen), nx, ny), args.out)
    else:
        grid = tropical_field(config, box, args.res, frozen)
        _emit(grid_svg(grid, None, extract_boundaries(grid, config)), args.out)
    return 0


def _heatmap_svg(values, nx: int, ny: int, width: int = 600, height: int = 600) -> str:
    finite = [v for v in values if v == v]
    top = max(finite) if finite else 1.0
    cw, ch = width / nx, height / ny
    body = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
    ]
    for j in range(ny):
        for i in range(nx):
            v = values[j * nx + i]
            shade = 255 if v != v else int(255 - 255 * (v / top if top > 0 else 0))
            body.append(f'<rect x="{i * cw:.3f}" y="{height - (j + 1) * ch:.3f}" width="{cw:.3f}" '
                        f'height="{ch:.3f}" fill="rgb({shade},{shade},255)"/>')
    body += ["</svg>", ""]
    return "\n".join(body)


# -- combinatorics ----------------------------------------------------------------------

def _seq_text(seq) -> str:
    return "".join(map(str, seq))


def _poset_json(poset, chains: bool, classes: bool = False) -> dict:
    data = {
        "kind": poset.kind,
        "nodes": [_seq_text(v) if isinstance(v, tuple) else str(v) for v in poset.nodes],
        "edges": [[_seq_text(u) if isinstance(u, tuple) else str(u), _seq_text(v) if isinstance(v, tuple) else str(v),
                   label_text(lab)] for u, v, lab in poset.edges],
        "maximal_chains": poset.count_chains(),
    }
    if chains:
        data["chains"] = [_chain_text(c) for c in poset.maximal_chains()]
    return data


def _chain_text(labels) -> str:
    if labels and isinstance(labels[0], tuple) and len(labels[0]) == 2 and isinstance(labels[0][0], str):
        # a chain lists steps bottom-up; words are written right to left
        return _word_text(tuple(reversed(labels)))
    return " ".join(label_text(l) for l in labels)


def cmd_tamari(args) -> int:
    poset = comb.tamari(args.r)
    if args.format == "dot":
        _emit(poset_dot(poset, f"tamari{args.r}"), None)
        return 0
    data = _poset_json(poset, False)
    if args.chains or args.classes:
        chains = comb.tamari_chains(args.r)
        if args.chains:
            data["chains"] = [_word_text(c["word"]) for c in chains]
        if args.classes:
            data["classes"] = [[_word_text(c["word"]) for c in cls] for cls in comb.chain_classes(chains)]
    _emit(json.dumps(data, indent=2), None)
    return 0


def cmd_permutohedron(args) -> int:
    poset = comb.permutohedron(args.r)
    if args.format == "dot":
        _emit(poset_dot(poset, f"permutohedron{args.r}"), None)
        return 0
    data = _poset_json(poset, False)
    if args.chains:
        data["chains"] = [_word_text(w) for w in comb.permutohedron_chain_words(args.r)]
    _emit(json.dumps(data, indent=2), None)
    return 0


def cmd_posets(args) -> int:
    poset = comb.family_poset(args.kind, args.M)
    if args.format == "dot":
        _emit(poset_dot(poset, f"{args.kind}{args.M}"), None)
    else:
        _emit(json.dumps(_poset_json(poset, True), indent=2), None)
    return 0


# -- wedge solutions ------------------------------------------------------------------------

def _tau_from_file(path: str):
    data = _read_json(path)
    if "p" not in data:
        raise InvalidInput("wedge file needs 'p' (and optionally 'c') next to 'factors'")
    p = [parse_rational(v) for v in data["p"]]
    c = [parse_rational(v) for v in data.get("c", ["0"] * len(p))]
    spec = spec_from_json(data, len(p), strict=not data.get("allow_shared", False))
    return build_tau(None, spec, p=p, c=c, horizon=int(data.get("horizon", 3)))


def cmd_general(args) -> int:
    tau = _tau_from_file(args.spec)
    if args.events:
        p1, p2, p3, p4 = tau.p if tau.size == 4 else (None,) * 4
        if p1 is None or p1 + p4 != p2 + p3 or p2 - p1 != p4 - p3:
            raise InvalidInput("--events needs four p's with p1+p4 = p2+p3 (parallel case)")
        if any(not c.is_rational for c in tau.c):
            raise InvalidInput("--events needs rational constants")
        ev = parallel_events(p1 + p4, p3 - p2, p2 - p1, [c.rational for c in tau.c])
        rows = {"t_minus": str(ev.t_minus), "t_zero": format_rational(ev.t_zero), "t_plus": str(ev.t_plus),
                "delta_t": str(ev.delta), "delta_t_float": float(ev.delta)}
        # one probe inside the window and one beyond each end
        reach = math.ceil(float(ev.delta)) + 1
        probes = [ev.t_zero - reach, ev.t_zero, ev.t_zero + reach]
        rows["visible"] = {format_rational(t): [f"{_seq_text(a)}|{_seq_text(b)}" for a, b in visible_boundaries(tau, [0, t])]
                           for t in probes}
        _emit(json.dumps(rows, indent=2), None)
        return 0
    if args.limit is not None:
        reduced = p_limit(tau, args.limit, parse_rational(args.weight))
        out = {"spec": str(reduced.spec), "factors": reduced.spec.to_json()["factors"],
               "p": [format_rational(v) for v in reduced.p], "c": [str(v) for v in reduced.c],
               "terms": {_seq_text(k): format_rational(a) for k, a in sorted(reduced.terms.items())},
               "verdict": reduced.verdict, "self_dual": is_self_dual(reduced)}
        _emit(json.dumps(out, indent=2), None)
        return 0
    if args.plot:
        frozen = {3: parse_rational(args.t, allow_decimal=True)}
        grid = tropical_field(tau, parse_bbox(args.bbox), args.res, frozen)
        _emit(grid_svg(grid, {"title": str(tau.spec)}, extract_boundaries(grid)), args.plot)
        for key, cells in bounded_regions(grid):
            print(f"bounded region {_seq_text(key)} ({cells} cells)")
        return 0
    info = {"spec": str(tau.spec), "terms": {_seq_text(k): format_rational(a) for k, a in sorted(tau.terms.items())},
            "verdict": tau.verdict, "self_dual": is_self_dual(tau)}
    _emit(json.dumps(info, indent=2), None)
    return 0


# -- self checks --------------------------------------------------------------------------------

def cmd_check(args) -> int:
    from . import suites

    rng = random.Random(args.seed)
    wanted = ["visibility", "braid", "tables", "identities"] if args.suite == "all" else [args.suite]
    report = {}
    for name in wanted:
        if name == "visibility":
            report[name] = {f"M={M}": suites.visibility_suite(rng, M, args.cases) for M in (4, 5, 6)}
        elif name == "braid":
            report[name] = suites.braid_suite()
        elif name == "tables":
            report[name] = suites.table_suite(rng, max(1, args.cases))
        elif name == "identities":
            report[name] = suites.identity_suite(rng, max(100, args.cases))
    _emit(json.dumps(report, indent=2, sort_keys=True), None)
    return 0


# -- entry point --------------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Usage errors are invalid input (exit 1), not argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(InvalidInput.exit_code)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kptrop", description="Tropical line-soliton evolutions and their lattices.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="critical events and tree chain of an evolution")
    p.add_argument("--config", required=True)
    p.add_argument("--refine-levels", action="store_true")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evolve", help="SVG frames of the tropical field at several times")
    p.add_argument("--config", required=True)
    p.add_argument("--times", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", default="svg")
    p.add_argument("--bbox")
    p.add_argument("--res", default="200x200")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("plot", help="tropical field (or exact u) at one time")
    p.add_argument("--config", required=True)
    p.add_argument("--t", required=True)
    p.add_argument("--t4")
    p.add_argument("--t5")
    p.add_argument("--bbox", required=True)
    p.add_argument("--res", default="200x200")
    p.add_argument("--out", required=True)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("tamari", help="Tamari lattice T_r")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--format", choices=("dot", "json"), default="json")
    p.add_argument("--chains", action="store_true")
    p.add_argument("--classes", action="store_true")
    p.set_defaults(func=cmd_tamari)

    p = sub.add_parser("permutohedron", help="permutohedron poset of order r")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--format", choices=("dot", "json"), default="json")
    p.add_argument("--chains", action="store_true")
    p.set_defaults(func=cmd_permutohedron)

    p = sub.add_parser("posets", help="simplex and hypercube families")
    p.add_argument("--kind", choices=("simplex", "hypercube"), required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--format", choices=("dot", "json"), default="json")
    p.set_defaults(func=cmd_posets)

    p = sub.add_parser("general", help="wedge-product solutions")
    p.add_argument("--spec", required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--plot", metavar="FILE.svg")
    mode.add_argument("--events", action="store_true")
    mode.add_argument("--limit", type=int, metavar="i")
    p.add_argument("--weight", default="1")
    p.add_argument("--t", default="0")
    p.add_argument("--bbox", default="-10,10,-10,10")
    p.add_argument("--res", default="200x200")
    p.set_defaults(func=cmd_general)

    p = sub.add_parser("check", help="randomised self-consistency suites")
    p.add_argument("--suite", choices=("all", "visibility", "braid", "tables", "identities"), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=3)
    p.set_defaults(func=cmd_check)
    return parser


_VALUE_FLAGS = {"--bbox", "--t", "--t4", "--t5", "--times", "--weight"}


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--bbox -20,20,-5,5`` into ``--bbox=-20,20,-5,5`` so that values
    starting with a minus sign are not taken for options."""
    out = []
    k = 0
    while k < len(argv):
        arg = argv[k]
        if arg in _VALUE_FLAGS and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            out.append(f"{arg}={argv[k + 1]}")
            k += 2
            continue
        out.append(arg)
        k += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_negative_values(list(sys.argv[1:] if argv is None else argv)))
    try:
        return args.func(args)
    except KPTropError as exc:
        print(f"kptrop: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

"""Level sequences, binary trees, Tamari lattices and permutohedra.

Sequences (n_1, ..., n_r) with 1 <= n_i <= i encode rooted binary trees with
levels: the node on level i splits the n_i-th line (counted from the left) of
the i lines present above it. Nondecreasing sequences pick one representative
per tree and are counted by the Catalan numbers.

Operators act on the pair of entries at positions (r-s, r-s+1):

    a(n, n) = (n, n+1)           a right rotation of the tree
    b(m, n) = (n, m+1), m > n    an exchange of two levels, same tree

and sigma combines them (its inverse covers m < n). Words are written as
operator products, so the rightmost letter acts first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import comb
from typing import Iterable, Sequence

from .errors import InvalidInput, ResourceGuard

TAMARI_MAX_R = 8
PERMUTOHEDRON_MAX_R = 7
PERMUTOHEDRON_CHAIN_MAX_R = 6


def catalan(r: int) -> int:
    return comb(2 * r, r) // (r + 1)


def is_level_seq(seq: Sequence[int]) -> bool:
    return all(isinstance(n, int) and 1 <= n <= i for i, n in enumerate(seq, start=1))


def is_tamari_seq(seq: Sequence[int]) -> bool:
    return is_level_seq(seq) and all(a <= b for a, b in zip(seq, seq[1:]))


def _check_seq(seq) -> tuple[int, ...]:
    seq = tuple(seq)
    if not seq or not is_level_seq(seq):
        raise InvalidInput(f"{seq} is not a level sequence (need 1 <= n_i <= i)")
    return seq


def _pair(seq: tuple[int, ...], s: int) -> int:
    r = len(seq)
    if not isinstance(s, int) or not 1 <= s <= r - 1:
        raise InvalidInput(f"site s={s} outside 1..{r - 1}")
    return r - s - 1  # 0-based index of the left entry


def sigma_s(seq, s: int) -> tuple[int, ...]:
    """The involution sigma at site s."""
    seq = _check_seq(seq)
    i = _pair(seq, s)
    m, n = seq[i], seq[i + 1]
    new = (n, m + 1) if m >= n else (n - 1, m)
    return seq[:i] + new + seq[i + 2:]


def apply_op(seq, op: str, s: int) -> tuple[int, ...]:
    """Apply ``a`` (needs equal entries) or ``b`` (needs left > right) at site s."""
    seq = _check_seq(seq)
    i = _pair(seq, s)
    m, n = seq[i], seq[i + 1]
    if op == "a":
        if m != n:
            raise InvalidInput(f"a_{s} needs equal entries at its pair, got ({m}, {n}) in {seq}")
    elif op == "b":
        if not m > n:
            raise InvalidInput(f"b_{s} needs a descent at its pair, got ({m}, {n}) in {seq}")
    else:
        raise InvalidInput(f"unknown operation {op!r}")
    return seq[:i] + (n, m + 1) + seq[i + 2:]


def weight(seq: Sequence[int]) -> int:
    return sum(seq)


def collapse_word(seq) -> tuple[tuple[int, ...], list[tuple[str, int]]]:
    """Normalise to the nondecreasing representative with ``b`` moves.

    Returns the representative and the letters used, in application order.
    The leftmost descent is removed first, which bubbles it to the right.
    """
    seq = _check_seq(seq)
    r = len(seq)
    used = []
    while True:
        i = next((k for k in range(r - 1) if seq[k] > seq[k + 1]), None)
        if i is None:
            return seq, used
        s = r - i - 1
        seq = apply_op(seq, "b", s)
        used.append(("b", s))


def collapse(seq) -> tuple[int, ...]:
    return collapse_word(seq)[0]


def level_sequences(r: int) -> list[tuple[int, ...]]:
    return sorted(product(*[range(1, i + 1) for i in range(1, r + 1)]))


def tamari_sequences(r: int) -> list[tuple[int, ...]]:
    out = []

    def grow(prefix):
        i = len(prefix) + 1
        if i > r:
            out.append(tuple(prefix))
            return
        lo = prefix[-1] if prefix else 1
        for n in range(lo, i + 1):
            grow(prefix + [n])

    grow([])
    return out


# --- words ---------------------------------------------------------------

Word = tuple  # tuple of (letter, site) in written order

_LETTER_RE = re.compile(r"([ab])_?(\d+)")


def parse_word(text: str) -> Word:
    """Parse ``"a2 b1 a2"``/``"a2b1a2"`` or the compact ``"2[1]2"`` form.

    In the compact form plain digits are ``a`` sites and bracketed digits are
    ``b`` sites, so ``"4[3]4[23]4"`` is a4 b3 a4 b2 b3 a4.
    """
    text = text.strip()
    if not text:
        return ()
    if text[0] in "ab":
        compact = re.sub(r"\s+", "", text)
        letters = _LETTER_RE.findall(compact)
        if "".join(f"{l}{s}" for l, s in letters) != compact.replace("_", ""):
            raise InvalidInput(f"cannot parse word {text!r}")
        return tuple((l, int(s)) for l, s in letters)
    out, bold = [], False
    for ch in text:
        if ch == "[":
            bold = True
        elif ch == "]":
            bold = False
        elif ch.isdigit():
            out.append(("b" if bold else "a", int(ch)))
        elif not ch.isspace():
            raise InvalidInput(f"cannot parse word {text!r}")
    return tuple(out)


def format_word(word: Word, compact: bool = False) -> str:
    if not compact:
        return "".join(f"{l}{s}" for l, s in word)
    out, bold = [], False
    for l, s in word:
        if (l == "b") != bold:
            out.append("[" if l == "b" else "]")
            bold = l == "b"
        out.append(str(s))
    if bold:
        out.append("]")
    return "".join(out)


def apply_word(word: Word, start) -> tuple[int, ...]:
    """Apply a word to ``start``; the rightmost letter acts first."""
    seq = _check_seq(start)
    for op, s in reversed(tuple(word)):
        seq = apply_op(seq, op, s)
    return seq


def word_path(word: Word, start) -> list[tuple[int, ...]]:
    seq = _check_seq(start)
    path = [seq]
    for op, s in reversed(tuple(word)):
        seq = apply_op(seq, op, s)
        path.append(seq)
    return path


def braid_check(word1, word2, start) -> bool:
    """True when both words are applicable to ``start`` and end at the same sequence."""
    w1 = parse_word(word1) if isinstance(word1, str) else tuple(word1)
    w2 = parse_word(word2) if isinstance(word2, str) else tuple(word2)
    return apply_word(w1, start) == apply_word(w2, start)


# --- trees -----------------------------------------------------------------
# A tree is None (a leaf) or a pair (left, right).


def tree_size(tree) -> int:
    """Number of internal nodes."""
    if tree is None:
        return 0
    return 1 + tree_size(tree[0]) + tree_size(tree[1])


def leaves(tree) -> int:
    return tree_size(tree) + 1


def decode_levels(seq) -> object:
    """Tree encoded by a level sequence (levels forgotten)."""
    seq = _check_seq(seq)
    # each open line remembers the mutable node slot it hangs from
    lines = [("root", None)]
    holder = {"root": None}
    for n in seq:
        if n > len(lines):
            raise InvalidInput(f"{seq} splits a line that does not exist")
        parent, side = lines[n - 1]
        node = [None, None]
        if parent == "root":
            holder["root"] = node
        else:
            parent[side] = node
        lines[n - 1:n] = [(node, 0), (node, 1)]

    def freeze(node):
        if node is None:
            return None
        return (freeze(node[0]), freeze(node[1]))

    return freeze(holder["root"])


def tree_ycode(tree) -> tuple[int, ...]:
    """Nondecreasing code: first leaf index of every node in preorder."""
    out = []

    def walk(t, first):
        if t is None:
            return
        out.append(first)
        walk(t[0], first)
        walk(t[1], first + leaves(t[0]))

    walk(tree, 1)
    return tuple(out)


def tree_triples(tree) -> list[tuple[int, int, int]]:
    """Phase triples (i, j, k) of the nodes, top-to-bottom, left-to-right.

    Leaf m stands for the line between phases m and m+1; a node over leaves
    a..b whose left part has L leaves meets phases a, a+L and b+1.
    """
    out = []

    def walk(t, first):
        if t is None:
            return
        L = leaves(t[0])
        out.append((first, first + L, first + leaves(t)))
        walk(t[0], first)
        walk(t[1], first + L)

    walk(tree, 1)
    return out


def left_comb(r: int):
    t = None
    for _ in range(r):
        t = (t, None)
    return t


def right_comb(r: int):
    t = None
    for _ in range(r):
        t = (None, t)
    return t


def right_rotations(tree) -> list[tuple[tuple[int, int, int, int], object]]:
    """All single right rotations with their labels (i, j, k, l).

    The rotated node (i,k,l) with left child (i,j,k) becomes (i,j,l) with
    right child (j,k,l).
    """
    out = []

    def walk(t, first, rebuild):
        if t is None:
            return
        left, right = t
        if left is not None:
            a, b = left
            i = first
            j = first + leaves(a)
            k = j + leaves(b)
            l = first + leaves(t)
            out.append(((i, j, k, l), rebuild((a, (b, right)))))
        walk(left, first, lambda sub: rebuild((sub, right)))
        walk(right, first + leaves(left), lambda sub: rebuild((left, sub)))

    walk(tree, 1, lambda sub: sub)
    return out


def rotation_label(before, after) -> tuple[int, int, int, int]:
    for lab, t in right_rotations(before):
        if t == after:
            return lab
    raise InvalidInput("trees are not related by a single right rotation")


# --- posets --------------------------------------------------------------


@dataclass
class Poset:
    kind: str
    nodes: list
    edges: list  # (u, v, label)
    bottom: object = None
    top: object = None
    meta: dict = field(default_factory=dict)

    def successors(self) -> dict:
        succ = {v: [] for v in self.nodes}
        for u, v, lab in self.edges:
            succ[u].append((v, lab))
        for v in succ:
            succ[v].sort(key=lambda e: (repr(e[1]), e[0]))
        return succ

    def count_chains(self) -> int:
        succ = self.successors()
        memo = {}

        def count(v):
            if v not in memo:
                memo[v] = 1 if v == self.top else sum(count(w) for w, _ in succ[v])
            return memo[v]

        return count(self.bottom)

    def chain_length_range(self) -> tuple[int, int]:
        """(shortest, longest) number of covers in a maximal chain."""
        succ = self.successors()
        memo = {}

        def span(v):
            if v not in memo:
                if v == self.top:
                    memo[v] = (0, 0)
                else:
                    spans = [span(w) for w, _ in succ[v]]
                    memo[v] = (1 + min(s[0] for s in spans), 1 + max(s[1] for s in spans))
            return memo[v]

        return span(self.bottom)

    def maximal_chains(self) -> list[list]:
        """Every maximal chain as its list of edge labels, in lexicographic order."""
        succ = self.successors()
        out = []

        def walk(v, labels, path):
            if v == self.top:
                out.append((list(labels), list(path)))
                return
            for w, lab in succ[v]:
                labels.append(lab)
                path.append(w)
                walk(w, labels, path)
                labels.pop()
                path.pop()

        walk(self.bottom, [], [self.bottom])
        out.sort(key=lambda lp: [repr(x) for x in lp[0]])
        self._paths = [p for _, p in out]
        return [l for l, _ in out]

    def chain_paths(self) -> list[list]:
        self.maximal_chains()
        return self._paths

    def is_acyclic(self) -> bool:
        succ = self.successors()
        state = {}

        def dfs(v):
            state[v] = 1
            for w, _ in succ[v]:
                if state.get(w) == 1 or (w not in state and not dfs(w)):
                    return False
            state[v] = 2
            return True

        return all(state.get(v) == 2 or dfs(v) for v in self.nodes)


def _guard(r: int, bound: int, what: str):
    if not isinstance(r, int) or r < 1:
        raise InvalidInput(f"{what} needs an integer r >= 1, got {r!r}")
    if r > bound:
        raise ResourceGuard(f"{what} with r={r} exceeds the bound {bound}")


def permutohedron(r: int) -> Poset:
    """All level sequences ordered by single sigma moves with m >= n."""
    _guard(r, PERMUTOHEDRON_MAX_R, "permutohedron")
    nodes = level_sequences(r)
    edges = []
    for seq in nodes:
        for s in range(1, r):
            i = r - s - 1
            m, n = seq[i], seq[i + 1]
            if m >= n:
                edges.append((seq, apply_op(seq, "a" if m == n else "b", s), ("a" if m == n else "b", s)))
    return Poset("permutohedron", nodes, edges, (1,) * r, tuple(range(1, r + 1)))


def tamari_cover_steps(seq) -> list[tuple[tuple[str, int], ...]]:
    """Covering moves out of a Tamari sequence: an ``a`` then its ``b`` repair.

    Each entry lists the letters in application order.
    """
    seq = tuple(seq)
    r = len(seq)
    out = []
    for s in range(1, r):
        i = r - s - 1
        if seq[i] == seq[i + 1]:
            moved = apply_op(seq, "a", s)
            _, fix = collapse_word(moved)
            out.append((("a", s),) + tuple(fix))
    return out


def tamari(r: int) -> Poset:
    """Tamari lattice on nondecreasing sequences; edges carry the letters used."""
    _guard(r, TAMARI_MAX_R, "tamari")
    nodes = tamari_sequences(r)
    edges = []
    for seq in nodes:
        for step in tamari_cover_steps(seq):
            target = seq
            for op, s in step:
                target = apply_op(target, op, s)
            edges.append((seq, target, step))
    return Poset("tamari", nodes, edges, (1,) * r, tuple(range(1, r + 1)))


def tamari_by_rotation(r: int) -> Poset:
    """Independent construction: trees under right rotation, labelled by phases."""
    _guard(r, TAMARI_MAX_R, "tamari")
    start = left_comb(r)
    seen = {start}
    todo = [start]
    edges = []
    while todo:
        t = todo.pop()
        for lab, u in right_rotations(t):
            edges.append((t, u, lab))
            if u not in seen:
                seen.add(u)
                todo.append(u)
    nodes = sorted(seen, key=tree_ycode)
    return Poset("tamari-trees", nodes, edges, start, right_comb(r))


def chain_word(steps: Iterable[tuple]) -> Word:
    """Written word of a chain given its edge steps in application order."""
    applied = [letter for step in steps for letter in step]
    return tuple(reversed(applied))


def tamari_chain_words(r: int) -> list[Word]:
    return sorted(chain_word(c) for c in tamari(r).maximal_chains())


def permutohedron_chain_words(r: int) -> list[Word]:
    _guard(r, PERMUTOHEDRON_CHAIN_MAX_R, "permutohedron chain enumeration")
    return sorted(tuple(reversed(c)) for c in permutohedron(r).maximal_chains())


def ycode_path(word: Word, r: int) -> list[tuple[int, ...]]:
    """Tamari elements visited by a chain word (level repairs skipped)."""
    path = word_path(word, (1,) * r)
    return [seq for seq in path if is_tamari_seq(seq)]


def chain_rotation_labels(path: Sequence[Sequence[int]]) -> list[tuple[int, int, int, int]]:
    trees = [decode_levels(seq) for seq in path]
    return [rotation_label(a, b) for a, b in zip(trees, trees[1:])]


def tamari_chains(r: int) -> list[dict]:
    """Maximal chains with their word, visited sequences and rotation labels."""
    poset = tamari(r)
    out = []
    for steps, path in zip(poset.maximal_chains(), poset.chain_paths()):
        out.append({
            "word": chain_word(steps),
            "path": [tuple(p) for p in path],
            "labels": chain_rotation_labels(path),
        })
    return out


def chain_classes(chains: Sequence[dict]) -> list[list[dict]]:
    """Group chains that are connected by flips across square faces.

    Two chains are neighbours when they differ in exactly one element and the
    two rotations around it are swapped, which is the tree-level meaning of
    commuting a_s a_s' with |s - s'| > 1. Classes are ordered by their
    canonical (lexicographically smallest) label sequence.
    """
    parent = list(range(len(chains)))

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    by_skeleton = {}
    for k, c in enumerate(chains):
        path = c["path"]
        labels = c["labels"]
        for i in range(1, len(path) - 1):
            key = (tuple(path[:i]), tuple(path[i + 1:]), frozenset([labels[i - 1], labels[i]]))
            by_skeleton.setdefault(key, []).append((k, labels[i - 1], labels[i]))
    for members in by_skeleton.values():
        for (k1, x1, y1) in members:
            for (k2, x2, y2) in members:
                if (x1, y1) == (y2, x2) and x1 != y1:
                    parent[find(k1)] = find(k2)
    groups = {}
    for k in range(len(chains)):
        groups.setdefault(find(k), []).append(chains[k])
    classes = [sorted(g, key=lambda c: c["labels"]) for g in groups.values()]
    classes.sort(key=lambda g: g[0]["labels"])
    return classes


def commutation_classes(words: Sequence[Word]) -> list[list[Word]]:
    """Classes of words under a_s a_s' = a_s' a_s (|s - s'| > 1) among ``words``.

    Only swaps that stay inside the given list are followed.
    """
    pool = set(map(tuple, words))
    seen, classes = set(), []
    for w in sorted(pool):
        if w in seen:
            continue
        comp, todo = [], [w]
        seen.add(w)
        while todo:
            u = todo.pop()
            comp.append(u)
            for i in range(len(u) - 1):
                (l1, s1), (l2, s2) = u[i], u[i + 1]
                if l1 == l2 == "a" and abs(s1 - s2) > 1:
                    v = u[:i] + (u[i + 1], u[i]) + u[i + 2:]
                    if v in pool and v not in seen:
                        seen.add(v)
                        todo.append(v)
        classes.append(sorted(comp))
    return classes


def canonical_word(word: Word) -> Word:
    """Smallest word reachable by swapping adjacent far-apart ``a`` letters.

    Unlike :func:`commutation_classes` this ignores whether the swapped word
    is still a Tamari chain; it is a normal form for the free commutation.
    """
    best = tuple(word)
    seen = {best}
    todo = [best]
    while todo:
        u = todo.pop()
        best = min(best, u)
        for i in range(len(u) - 1):
            (l1, s1), (l2, s2) = u[i], u[i + 1]
            if l1 == l2 == "a" and abs(s1 - s2) > 1:
                v = u[:i] + (u[i + 1], u[i]) + u[i + 2:]
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
    return best


def special_longest_word(r: int) -> Word:
    """a1 (a2 a1) ... (a_{r-1} ... a1), applied right to left to (1, ..., 1)."""
    groups = [[("a", s) for s in range(k, 0, -1)] for k in range(1, r)]
    return tuple(l for g in groups for l in g)


def special_shortest_word(r: int) -> Word:
    """a_{r-1} (b_{r-2}) a_{r-1} (b_{r-3} b_{r-2}) a_{r-1} ... (b_1 ... b_{r-2}) a_{r-1}."""
    out = [("a", r - 1)]
    for k in range(r - 2, 0, -1):
        out += [("b", s) for s in range(k, r - 1)]
        out.append(("a", r - 1))
    return tuple(out)


@lru_cache(maxsize=None)
def fiber_sizes(r: int) -> dict:
    _guard(r, PERMUTOHEDRON_MAX_R, "permutohedron")
    out = {}
    for seq in level_sequences(r):
        key = collapse(seq)
        out[key] = out.get(key, 0) + 1
    return out


# --- simplex and hypercube families ---------------------------------------


def _xlabel(i, j):
    return f"x{i}{j}"


def family_poset(kind: str, M: int) -> Poset:
    """Simplex on the phases or the hypercube of its maximal chains."""
    if kind == "simplex":
        if not isinstance(M, int) or M < 2:
            raise InvalidInput("simplex poset needs M >= 2")
        nodes = list(range(1, M + 2))
        edges = [(i, j, _xlabel(i, j)) for i in nodes for j in nodes if i < j]
        return Poset("simplex", nodes, edges, 1, M + 1)
    if kind == "hypercube":
        if not isinstance(M, int) or M < 3:
            raise InvalidInput("hypercube poset needs M >= 3")
        inner = list(range(2, M + 1))
        nodes = []
        for mask in range(1 << len(inner)):
            nodes.append((1,) + tuple(v for b, v in enumerate(inner) if mask >> b & 1) + (M + 1,))
        nodes.sort(key=lambda c: (-len(c), c))
        edges = []
        for ch in nodes:
            for pos in range(1, len(ch) - 1):
                i, j, k = ch[pos - 1], ch[pos], ch[pos + 1]
                edges.append((ch, ch[:pos] + ch[pos + 1:], f"y{i}{j}{k}"))
        top = tuple(range(1, M + 2))
        poset = Poset("hypercube", nodes, edges, top, (1, M + 1))
        poset.meta["chain_labels"] = {ch: [_xlabel(a, b) for a, b in zip(ch, ch[1:])] for ch in nodes}
        return poset
    raise InvalidInput(f"unknown poset family {kind!r}")

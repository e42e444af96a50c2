"""Edge colourings, snark checks, excessive index and the EI5 induction certificate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

from .constructions import (
    Bracket,
    HalinTree,
    SnarkExpr,
    as_halin,
    bracket_str,
    bracket_to_halin,
    build_fragment,
    build_snark,
    halin_str,
    halin_to_bracket,
    mirror,
    parse_bracket,
    parse_expression,
    rotations,
)
from .graph import (
    GenGraph,
    are_isomorphic,
    bits,
    check_isomorphism,
    element_of_half,
    girth,
    is_connected,
    is_cyclically_k_connected,
)
from .matchcover import (
    PatternSet,
    enumerate_perfect_matchings,
    is_cover,
    pattern_set,
    pattern_set_subset,
    spoke_swap_automorphisms,
)


class ChromaticError(ValueError):
    pass


# -- 3-edge-colouring --------------------------------------------------------


@dataclass
class EdgeColoring:
    """Colour per edge index (colours 1..k)."""

    colors: list[int]

    def is_proper(self, g: GenGraph) -> bool:
        eidx = g.edge_index()
        for v in g.vertices():
            seen = [self.colors[eidx[h]] for h in g.incidence[v] if h in eidx]
            if len(seen) != len(set(seen)):
                return False
        return all(c >= 1 for c in self.colors)


@dataclass
class ChromaticResult:
    index: int
    coloring: Optional[EdgeColoring] = None
    nodes: int = 0


def _vertex_edges(g: GenGraph) -> list[list[int]]:
    eidx = g.edge_index()
    return [[eidx[h] for h in g.incidence[v]] for v in g.vertices()]


def edge_cut(g: GenGraph, side: Iterable[int]) -> list[int]:
    """Edge indices with exactly one end in ``side``."""
    s = set(side)
    return [i for i, (u, v) in enumerate(g.edge_endpoints()) if (u in s) != (v in s)]


def three_edge_coloring(
    g: GenGraph, cuts: Sequence[Sequence[int]] = (), max_nodes: Optional[int] = None
) -> tuple[Optional[EdgeColoring], int]:
    """Proper 3-edge-colouring of a cubic graph, or None after exhausting the search.

    Branches on the edge with fewest colours left (ties: most coloured
    neighbours).  ``cuts`` are edge cuts on which the parity lemma is
    enforced once all but one of their edges are coloured.
    """
    if not g.is_cubic():
        raise ChromaticError("3-edge-colouring search needs a cubic graph")
    if g.loose():
        raise ChromaticError("closed graphs only")
    m = g.num_edges
    if m == 0:
        return EdgeColoring([]), 0
    ends = g.edge_endpoints()
    vedges = _vertex_edges(g)
    nbrs = [sorted({f for x in ends[e] for f in vedges[x] if f != e}) for e in range(m)]
    for e in range(m):
        if ends[e][0] == ends[e][1]:
            return None, 0
    edge_cuts: list[list[int]] = [[] for _ in range(m)]
    for ci, cut in enumerate(cuts):
        for e in cut:
            edge_cuts[e].append(ci)
    color = [0] * m
    avail = [7] * m
    nodes = 0

    def parity_ok(ci: int) -> bool:
        cut = cuts[ci]
        if any(color[e] == 0 for e in cut):
            return True
        counts = [0, 0, 0, 0]
        for e in cut:
            counts[color[e]] += 1
        return all(counts[c] % 2 == len(cut) % 2 for c in (1, 2, 3))

    def assign(e: int, c: int, trail: list) -> bool:
        color[e] = c
        bit = 1 << (c - 1)
        for f in nbrs[e]:
            if color[f] == 0 and avail[f] & bit:
                trail.append((f, avail[f]))
                avail[f] &= ~bit
                if not avail[f]:
                    return False
        return all(parity_ok(ci) for ci in edge_cuts[e])

    def undo(e: int, trail: list) -> None:
        color[e] = 0
        for f, a in reversed(trail):
            avail[f] = a

    def pick() -> int:
        best, key = -1, None
        for e in range(m):
            if color[e] == 0:
                k = (bin(avail[e]).count("1"), -sum(1 for f in nbrs[e] if color[f]))
                if key is None or k < key:
                    best, key = e, k
        return best

    def rec() -> bool:
        nonlocal nodes
        nodes += 1
        if max_nodes is not None and nodes > max_nodes:
            raise ChromaticError(f"3-edge-colouring search exceeded {max_nodes} nodes")
        e = pick()
        if e < 0:
            return True
        for c in (1, 2, 3):
            if avail[e] >> (c - 1) & 1:
                trail: list = []
                if assign(e, c, trail) and rec():
                    return True
                undo(e, trail)
        return False

    # Colour symmetry: the edges at vertex 0 get 1, 2, 3.
    trail0: list = []
    ok = True
    for c, e in enumerate(vedges[0], 1):
        if color[e]:
            ok = ok and color[e] == c
            continue
        if not avail[e] >> (c - 1) & 1 or not assign(e, c, trail0):
            ok = False
            break
    if ok and rec():
        return EdgeColoring(list(color)), nodes
    return None, nodes


def chromatic_index(g: GenGraph, cuts: Sequence[Sequence[int]] = ()) -> ChromaticResult:
    """3 (with a colouring) or 4 for a cubic graph."""
    if not g.is_cubic() or g.loose():
        raise ChromaticError("chromatic_index expects a closed cubic graph")
    col, nodes = three_edge_coloring(g, cuts)
    if col is not None:
        return ChromaticResult(3, col, nodes)
    return ChromaticResult(4, None, nodes)


def parity_check(g: GenGraph, coloring: EdgeColoring, cut: Sequence[int]) -> bool:
    """Parity lemma on an edge cut: each colour class meets it in |cut| mod 2 edges."""
    k = max(coloring.colors, default=3)
    for c in range(1, max(k, 3) + 1):
        if sum(coloring.colors[e] == c for e in cut) % 2 != len(cut) % 2:
            return False
    return True


def fragment_cuts(expr: SnarkExpr) -> list[list[int]]:
    """5-edge cuts around each building block of a treelike snark built by ``build_snark``.

    The blocks are recovered from the vertex ranges used while summing
    fragments, so this only applies to graphs made by ``build_snark``.
    """
    g = build_snark(expr)
    frag_left = build_fragment(expr.left)
    offset = frag_left.graph.num_vertices
    cuts = []

    def rec(b: Bracket, start: int) -> int:
        if b == "F":
            n = 11
        else:
            n1 = rec(b[0], start)
            n2 = rec(b[1], start + n1)
            n = n1 + n2 + 1
        cuts.append(edge_cut(g, range(start, start + n)))
        return n

    rec(expr.right, offset)
    return [c for c in cuts if 0 < len(c) < g.num_edges]


# -- snark report ------------------------------------------------------------


@dataclass
class SnarkReport:
    cubic: bool
    bridgeless: bool
    girth: float
    cyclically_4_connected: Optional[bool]
    chromatic_index: Optional[int]
    witness_cut: Optional[list[int]] = None

    @property
    def girth_ok(self) -> bool:
        return self.girth >= 5

    @property
    def is_snark(self) -> bool:
        return bool(
            self.cubic
            and self.bridgeless
            and self.girth_ok
            and self.cyclically_4_connected
            and self.chromatic_index == 4
        )

    def as_dict(self) -> dict:
        return {
            "cubic": self.cubic,
            "bridgeless": self.bridgeless,
            "girth": None if math.isinf(self.girth) else int(self.girth),
            "cyclically_4_edge_connected": self.cyclically_4_connected,
            "chromatic_index": self.chromatic_index,
            "snark": self.is_snark,
        }


def bridges(g: GenGraph) -> list[int]:
    from .graph import components

    base = len(components(g))
    return [i for i in range(g.num_edges) if len(components(g, 1 << i)) > base]


def verify_snark(g: GenGraph, cuts: Sequence[Sequence[int]] = ()) -> SnarkReport:
    cubic = g.is_cubic() and not g.loose()
    connected = is_connected(g)
    bridgeless = connected and not bridges(g)
    gi = girth(g)
    c4, witness = (None, None)
    if connected and g.num_edges:
        c4, witness = is_cyclically_k_connected(g, 4)
    chi = chromatic_index(g, cuts).index if cubic else None
    return SnarkReport(cubic, bridgeless, gi, c4, chi, witness)


# -- excessive index ---------------------------------------------------------


@dataclass
class ExcessiveResult:
    """Least k <= k_max with a cover by k perfect matchings, or ``None`` for ">k_max"."""

    value: Optional[float]
    k_max: int
    witness: Optional[tuple[int, ...]] = None
    matchings: int = 0
    refuted: dict = field(default_factory=dict)
    complete: bool = True

    def label(self) -> str:
        if not self.complete:
            return "incomplete"
        if self.value is None:
            return f">{self.k_max}"
        return "inf" if math.isinf(self.value) else str(int(self.value))


def cover_by_k(
    g: GenGraph,
    pms: Sequence[int],
    k: int,
    max_nodes: Optional[int] = None,
) -> tuple[Optional[tuple[int, ...]], int]:
    """k perfect matchings (indices into ``pms``, repeats allowed) covering every element.

    The next matching always goes through the lowest uncovered element; a
    branch dies once some vertex has more uncovered elements than matchings
    left to place, and the last matching is found by intersecting bitsets.
    """
    size = g.num_edges + len(g.loose())
    full = (1 << size) - 1
    if size == 0:
        return (), 0
    if not pms:
        return None, 0
    every = (1 << len(pms)) - 1
    containing = [0] * size
    for i, m in enumerate(pms):
        for e in bits(m):
            containing[e] |= 1 << i
    eoh = element_of_half(g)
    vmask = [sum(1 << eoh[h] for h in g.incidence[v]) for v in g.vertices()]
    nodes = 0

    def rec(chosen: list[int], covered: int) -> Optional[tuple[int, ...]]:
        nonlocal nodes
        nodes += 1
        if max_nodes is not None and nodes > max_nodes:
            raise ChromaticError("budget")
        uncovered = full & ~covered
        left = k - len(chosen)
        if not uncovered:
            return tuple(chosen + [chosen[-1]] * left)
        if left == 0:
            return None
        # A vertex with as many uncovered elements as matchings left is
        # tight: every remaining matching must take an uncovered element there.
        banned = 0
        for vm in vmask:
            u = uncovered & vm
            if u:
                c = bin(u).count("1")
                if c > left:
                    return None
                if c == left:
                    for e in bits(vm & covered):
                        banned |= containing[e]
        if left == 1:
            cand = every & ~banned
            for e in bits(uncovered):
                cand &= containing[e]
                if not cand:
                    return None
            return tuple(chosen + [(cand & -cand).bit_length() - 1])
        low = (uncovered & -uncovered).bit_length() - 1
        for i in bits(containing[low] & ~banned):
            found = rec(chosen + [i], covered | pms[i])
            if found is not None:
                return found
        return None

    return rec([], 0), nodes


def excessive_index(
    g: GenGraph, k_max: int = 5, max_matchings: Optional[int] = None, max_nodes: Optional[int] = None
) -> ExcessiveResult:
    if not g.is_cubic():
        raise ChromaticError("excessive index is computed for cubic graphs")
    try:
        pms = enumerate_perfect_matchings(g, limit=max_matchings)
    except Exception:
        return ExcessiveResult(None, k_max, complete=False)
    if not pms:
        return ExcessiveResult(math.inf, k_max, matchings=0)
    refuted = {}
    for k in range(1, k_max + 1):
        try:
            found, nodes = cover_by_k(g, pms, k, max_nodes)
        except ChromaticError:
            return ExcessiveResult(None, k_max, matchings=len(pms), refuted=refuted, complete=False)
        if found is not None:
            return ExcessiveResult(k, k_max, found, len(pms), refuted)
        refuted[k] = nodes
    return ExcessiveResult(None, k_max, None, len(pms), refuted)


def witness_matchings(g: GenGraph, res: ExcessiveResult) -> list[int]:
    pms = enumerate_perfect_matchings(g)
    return [pms[i] for i in res.witness or ()]


def verify_cover_witness(g: GenGraph, matchings: Sequence[int]) -> bool:
    return bool(matchings) and is_cover(g, matchings)


# -- EI5 induction certificate -----------------------------------------------

BASE = ("F", "F")
# rule name -> (sub-bracket replaced, replacement)
RULES = {
    "i": (("F", ("F", "F")), ("F", "F")),
    "ii": ((("F", "F"), ("F", "F")), (("F", "F"), "F")),
}


@lru_cache(maxsize=None)
def _pattern_set_cached(text: str) -> PatternSet:
    b = parse_bracket(text)
    return pattern_set(build_fragment(b), bracket_str(b))


@lru_cache(maxsize=None)
def _swap_closed(text: str) -> bool:
    return len(spoke_swap_automorphisms(build_fragment(parse_bracket(text)))) == 3


def inclusion_fact(rule: str, sets: Optional[dict] = None) -> dict:
    """Check Π(old) ⊂ Π(new) for a rewrite rule, with the symmetry that makes it usable.

    ``sets`` may supply already computed pattern sets keyed by bracket text.
    """
    old, new = RULES[rule]
    a, b = bracket_str(old), bracket_str(new)
    sets = sets or {}
    pa = sets[a] if a in sets else _pattern_set_cached(a)
    pb = sets[b] if b in sets else _pattern_set_cached(b)
    # Orbit inclusion transfers to label-level inclusion because both
    # fragments admit the spoke swaps as automorphisms.
    closed = _swap_closed(a) and _swap_closed(b)
    return {
        "rule": rule,
        "small": a,
        "large": b,
        "small_count": len(pa),
        "large_count": len(pb),
        "complete": pa.complete and pb.complete,
        "swap_closed": closed,
        "holds": bool(pa.complete and pb.complete and closed and pattern_set_subset(pa, pb)),
        "strict": bool(pa.complete and pb.complete and pattern_set_subset(pa, pb, strict=True)),
    }


def _paths(b: Bracket, prefix: str = ""):
    yield prefix, b
    if b != "F":
        yield from _paths(b[0], prefix + "L")
        yield from _paths(b[1], prefix + "R")


def subtree_at(b: Bracket, path: str) -> Bracket:
    for step in path:
        if b == "F":
            raise ChromaticError(f"bad bracket path {path!r}")
        b = b[0] if step == "L" else b[1]
    return b


def replace_at(b: Bracket, path: str, new: Bracket) -> Bracket:
    if not path:
        return new
    if b == "F":
        raise ChromaticError(f"bad bracket path {path!r}")
    if path[0] == "L":
        return (replace_at(b[0], path[1:], new), b[1])
    return (b[0], replace_at(b[1], path[1:], new))


def find_rewrite(expr: SnarkExpr) -> Optional[tuple[str, str]]:
    """First applicable (rule, path) in the bracket tree; rule ii preferred."""
    for rule in ("ii", "i"):
        old = RULES[rule][0]
        for path, sub in _paths(expr.right):
            if sub == old:
                return rule, path
    return None


def _reexpressions(tree: HalinTree) -> list[tuple[str, SnarkExpr]]:
    out = []
    for how, base in (("rotate", tree), ("mirror", mirror(tree))):
        for i, rot in enumerate(rotations(base)):
            out.append((f"{how}:{i}", halin_to_bracket(rot)))
    return out


@dataclass
class EI5Certificate:
    spec: str
    steps: list[dict]
    base: dict
    inclusions: list[dict]

    def as_dict(self) -> dict:
        return {
            "spec": self.spec,
            "steps": self.steps,
            "base": self.base,
            "inclusions": self.inclusions,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EI5Certificate":
        return cls(d["spec"], list(d["steps"]), dict(d["base"]), list(d.get("inclusions", [])))


def _base_record() -> dict:
    expr = SnarkExpr("F", BASE)
    g = build_snark(expr)
    res = excessive_index(g, k_max=4)
    return {
        "expr": str(expr),
        "vertices": g.num_vertices,
        "matchings": res.matchings,
        "refuted_k": sorted(res.refuted),
        "result": res.label(),
    }


def certify_ei5(spec: Union[str, HalinTree, SnarkExpr], check_base: bool = True) -> EI5Certificate:
    """Reduce a treelike snark to the 3-leaf base case by pattern-set rewrites.

    Each step rewrites one sub-bracket; when the current bracketing offers
    no rewrite, the snark is first re-expressed from another fusion leaf or
    with the circuit reversed, and that re-expression carries an explicit
    isomorphism.
    """
    tree = as_halin(spec)
    expr = halin_to_bracket(tree)
    steps: list[dict] = []
    used: set[str] = set()
    while expr.right != BASE:
        hit = find_rewrite(expr)
        case = "a" if hit and hit[0] == "ii" else "c"
        if hit is None:
            for how, alt in _reexpressions(tree):
                h = find_rewrite(alt)
                if h is None:
                    continue
                g1, g2 = build_snark(expr), build_snark(alt)
                iso = are_isomorphic(g1, g2)
                if not iso.isomorphic:
                    continue
                steps.append({
                    "op": "reexpress",
                    "case": "b",
                    "from": str(expr),
                    "to": str(alt),
                    "via": how,
                    "mapping": list(iso.mapping),
                })
                expr, hit, case = alt, h, "b"
                break
        if hit is None:
            raise ChromaticError(f"induction stuck at {expr}")
        rule, path = hit
        used.add(rule)
        new_right = replace_at(expr.right, path, RULES[rule][1])
        new_expr = SnarkExpr("F", new_right)
        steps.append({
            "op": "rewrite",
            "case": case,
            "from": str(expr),
            "path": path,
            "rule": rule,
            "to": str(new_expr),
        })
        expr = new_expr
        tree = bracket_to_halin(expr)
    inclusions = [inclusion_fact(r) for r in sorted(used)]
    base = _base_record() if check_base else {"expr": str(SnarkExpr("F", BASE))}
    return EI5Certificate(halin_str(as_halin(spec)), steps, base, inclusions)


def replay_ei5(cert: EI5Certificate) -> tuple[bool, list[str]]:
    """Re-check every step; returns (ok, failure messages)."""
    problems: list[str] = []
    try:
        current = halin_to_bracket(as_halin(cert.spec))
    except Exception as exc:  # malformed certificate
        return False, [f"spec: {exc}"]
    needed = set()
    for n, step in enumerate(cert.steps):
        src = parse_expression(step["from"])
        if src != current:
            problems.append(f"step {n}: starts at {step['from']}, expected {current}")
            break
        dst = parse_expression(step["to"])
        if not isinstance(dst, SnarkExpr) or dst.left != "F":
            problems.append(f"step {n}: bad target {step['to']}")
            break
        if step["op"] == "reexpress":
            if not check_isomorphism(build_snark(src), build_snark(dst), step["mapping"]):
                problems.append(f"step {n}: mapping is not an isomorphism")
        elif step["op"] == "rewrite":
            old, new = RULES.get(step["rule"], (None, None))
            if old is None:
                problems.append(f"step {n}: unknown rule {step['rule']}")
                break
            try:
                ok = subtree_at(src.right, step["path"]) == old
                ok = ok and replace_at(src.right, step["path"], new) == dst.right
            except ChromaticError:
                ok = False
            if not ok:
                problems.append(f"step {n}: rewrite does not match")
            needed.add(step["rule"])
        else:
            problems.append(f"step {n}: unknown op {step['op']}")
        current = dst
    if current.right != BASE:
        problems.append(f"chain ends at {current}, not at the base case")
    for rule in sorted(needed):
        fact = inclusion_fact(rule)
        if not fact["holds"]:
            problems.append(f"inclusion for rule {rule} fails")
    base = _base_record()
    if base["result"] != ">4":
        problems.append(f"base case has excessive index {base['result']}")
    return not problems, problems

"""Builders for Petersen fragments, their sums and fusions, Halin graphs and treelike snarks.

Expression grammars accepted by :func:`parse_expression` / :func:`parse_halin`:

* bracket trees ``B ::= "F" | "(" B "+" B ")"``; a snark is ``F*B`` (the
  first operand is the fusion leaf), e.g. ``F*(F+F)`` for the order-34 graph;
* Halin trees ``T ::= "L" | "(" T "," T ["," T] ")"``.  A nested node is an
  internal vertex whose parent edge is implicit.  At the top level, two
  children describe the root *edge* (so ``(L,(L,L))`` is ``K_{1,3}``) and three
  children describe a root vertex (so ``(L,L,L)`` is ``K_{1,3}`` as well).
  Leaves are read left to right; that order closes up into the leaf circuit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .graph import GenGraph, GraphError, are_isomorphic

# Bracket trees are nested 2-tuples with "F" at the leaves.
Bracket = Union[str, tuple]


class SpecError(ValueError):
    """Malformed construction expression; ``pos`` is the offending character offset."""

    def __init__(self, message: str, pos: int = -1) -> None:
        super().__init__(message if pos < 0 else f"{message} (at position {pos})")
        self.pos = pos


@dataclass
class Fragment:
    """A generalised graph with five ordered spokes a1..a5."""

    graph: GenGraph
    spokes: tuple[int, int, int, int, int]

    def __post_init__(self) -> None:
        if len(self.spokes) != 5:
            raise GraphError("a fragment has exactly five spokes")
        if sorted(self.spokes) != sorted(self.graph.loose()):
            raise GraphError("spokes must be exactly the loose half-edges")

    @property
    def num_vertices(self) -> int:
        return self.graph.num_vertices

    def spoke_vertices(self) -> list[int]:
        return [self.graph.owner[h] for h in self.spokes]

    def spoke_colors(self) -> list:
        """Vertex colouring marking which spokes sit where (for spoke-preserving isomorphism)."""
        marks: list[tuple] = [() for _ in self.graph.vertices()]
        for i, h in enumerate(self.spokes):
            v = self.graph.owner[h]
            marks[v] = tuple(sorted(marks[v] + (i,)))
        return marks

    def to_text(self) -> str:
        return self.graph.to_text(loose_order=self.spokes)


# -- Petersen graph and fragment ---------------------------------------------

_OUTER = [(i, (i + 1) % 5) for i in range(5)]
_SPOKE = [(i, i + 5) for i in range(5)]
_INNER = [(i + 5, (i + 2) % 5 + 5) for i in range(5)]
PETERSEN_EDGES = _OUTER + _SPOKE + _INNER


def petersen() -> GenGraph:
    g = GenGraph()
    g.add_vertices(10)
    for u, v in PETERSEN_EDGES:
        g.add_edge(u, v)
    return g


def petersen_minus_edge() -> tuple[GenGraph, int, int]:
    """Petersen graph without the edge 0-1; returns (graph, 1, 0) as (u, v) terminals."""
    g = GenGraph()
    g.add_vertices(10)
    for u, v in PETERSEN_EDGES:
        if {u, v} != {0, 1}:
            g.add_edge(u, v)
    return g, 1, 0


def petersen_fragment(swap_right: bool = False, swap_left: bool = False) -> Fragment:
    """The Petersen fragment F0 (11 vertices, 14 edges, spokes a1..a5).

    Petersen vertex 0 plays the deleted vertex; its neighbours 1, 4, 5 keep
    the half-edges a3, a4, a5.  The edges 1-2 and 1-6 are subdivided and the
    new vertices carry a1 and a2, so a1, a3, a2 sit on a path of length two.
    The flags choose the alternative (isomorphic) placements of a1/a2 and a4/a5.
    """
    g = GenGraph()
    vid = {p: g.add_vertex() for p in range(1, 10)}
    for u, v in PETERSEN_EDGES:
        if 0 not in (u, v):
            g.add_edge(vid[u], vid[v])
    a3 = g.add_loose(vid[1])
    a4 = g.add_loose(vid[4])
    a5 = g.add_loose(vid[5])
    # y = vertex 1; its remaining edges are to 2 and 6 (in that creation order).
    s1 = g.subdivide(("h", _half_toward(g, vid[1], vid[2])))
    s2 = g.subdivide(("h", _half_toward(g, vid[1], vid[6])))
    a1 = g.add_loose(s1)
    a2 = g.add_loose(s2)
    if swap_right:
        a1, a2 = a2, a1
    if swap_left:
        a4, a5 = a5, a4
    return Fragment(g, (a1, a2, a3, a4, a5))


def _half_toward(g: GenGraph, u: int, v: int) -> int:
    for h in g.incidence[u]:
        p = g.partner[h]
        if p is not None and g.owner[p] == v:
            return h
    raise GraphError(f"no edge {u}-{v}")


# -- sum and fusion ----------------------------------------------------------


def fragment_sum(f1: Fragment, f2: Fragment) -> Fragment:
    """F1 + F2: a5-a'1 and a4-a'2 become edges; a new vertex takes a3, a'3 and a new a''3."""
    g = GenGraph()
    _, h1 = g.absorb(f1.graph)
    _, h2 = g.absorb(f2.graph)
    a = [h + h1 for h in f1.spokes]
    b = [h + h2 for h in f2.spokes]
    g.join(a[4], b[0])
    g.join(a[3], b[1])
    w = g.add_vertex()
    g.join(a[2], g.add_loose(w))
    g.join(b[2], g.add_loose(w))
    a3 = g.add_loose(w)
    return Fragment(g, (a[0], a[1], a3, b[3], b[4]))


def fusion(f1: Fragment, f2: Fragment) -> GenGraph:
    """Join a_i with a'_{6-i} for i = 1..5, leaving no loose half-edges."""
    g = GenGraph()
    _, h1 = g.absorb(f1.graph)
    _, h2 = g.absorb(f2.graph)
    for i in range(5):
        g.join(f1.spokes[i] + h1, f2.spokes[4 - i] + h2)
    return g


# -- bracket expressions -----------------------------------------------------


class _Reader:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            got = self.peek() or "end of input"
            raise SpecError(f"expected {ch!r}, got {got!r}", self.pos)
        self.pos += 1

    def done(self) -> None:
        if self.peek():
            raise SpecError(f"unexpected {self.peek()!r}", self.pos)


def _read_bracket(r: _Reader) -> Bracket:
    ch = r.peek()
    if ch == "F":
        r.pos += 1
        return "F"
    if ch == "(":
        r.pos += 1
        left = _read_bracket(r)
        r.expect("+")
        right = _read_bracket(r)
        r.expect(")")
        return (left, right)
    raise SpecError(f"expected 'F' or '(', got {ch or 'end of input'!r}", r.pos)


def _read_top(r: _Reader) -> Bracket:
    # The outermost sum may drop its parentheses: "F+F" reads as "(F+F)".
    left = _read_bracket(r)
    if r.peek() == "+":
        r.pos += 1
        return (left, _read_bracket(r))
    return left


def parse_bracket(text: str) -> Bracket:
    r = _Reader(text)
    b = _read_top(r)
    r.done()
    return b


@dataclass(frozen=True)
class SnarkExpr:
    """A fusion ``left * right`` of two bracket trees (``left`` is "F" for treelike snarks)."""

    left: Bracket
    right: Bracket

    def __str__(self) -> str:
        return f"{bracket_str(self.left)}*{bracket_str(self.right)}"


def parse_expression(text: str) -> Union[Bracket, SnarkExpr]:
    r = _Reader(text)
    left = _read_top(r)
    if r.peek() == "*":
        r.pos += 1
        right = _read_top(r)
        r.done()
        return SnarkExpr(left, right)
    r.done()
    return left


def bracket_str(b: Bracket) -> str:
    if b == "F":
        return "F"
    return f"({bracket_str(b[0])}+{bracket_str(b[1])})"


def bracket_leaves(b: Bracket) -> int:
    return 1 if b == "F" else bracket_leaves(b[0]) + bracket_leaves(b[1])


def build_fragment(b: Bracket, base: Optional[Fragment] = None) -> Fragment:
    if b == "F":
        if base is None:
            return petersen_fragment()
        return Fragment(base.graph.copy(), base.spokes)
    return fragment_sum(build_fragment(b[0], base), build_fragment(b[1], base))


# -- Halin trees -------------------------------------------------------------


@dataclass
class HalinTree:
    """An embedded cubic tree: adjacency lists plus leaves in circuit order."""

    adj: list[list[int]]
    leaves: list[int]

    @property
    def num_vertices(self) -> int:
        return len(self.adj)

    def is_leaf(self, v: int) -> bool:
        return len(self.adj[v]) == 1

    def internal(self) -> list[int]:
        return [v for v in range(len(self.adj)) if len(self.adj[v]) == 3]


def _read_halin(r: _Reader):
    ch = r.peek()
    if ch == "L":
        r.pos += 1
        return "L"
    if ch == "(":
        start = r.pos
        r.pos += 1
        kids = [_read_halin(r)]
        while r.peek() == ",":
            r.pos += 1
            kids.append(_read_halin(r))
        r.expect(")")
        return (start, kids)
    raise SpecError(f"expected 'L' or '(', got {ch or 'end of input'!r}", r.pos)


def parse_halin(text: str) -> HalinTree:
    r = _Reader(text)
    node = _read_halin(r)
    r.done()
    adj: list[list[int]] = []
    leaves: list[int] = []

    def new() -> int:
        adj.append([])
        return len(adj) - 1

    def link(a: int, b: int) -> None:
        adj[a].append(b)
        adj[b].append(a)

    def build(n, nested: bool) -> int:
        if n == "L":
            v = new()
            leaves.append(v)
            return v
        pos, kids = n
        degree = len(kids) + (1 if nested else 0)
        if degree != 3:
            raise SpecError(f"tree vertex of degree {degree}; a cubic tree needs 3", pos)
        v = new()
        for k in kids:
            link(v, build(k, True))
        return v

    if node == "L":
        raise SpecError("a Halin tree needs at least 3 leaves", 0)
    pos, kids = node
    if len(kids) == 2:
        a = build(kids[0], False) if kids[0] == "L" else build(kids[0], True)
        b = build(kids[1], False) if kids[1] == "L" else build(kids[1], True)
        link(a, b)
    else:
        build(node, False)
    if len(leaves) < 3:
        raise SpecError("a Halin tree needs at least 3 leaves", 0)
    return HalinTree(adj, leaves)


def halin_str(tree: HalinTree) -> str:
    """Canonical text for an embedded tree, rooted at the edge to its first leaf."""
    first = tree.leaves[0]
    root = tree.adj[first][0]

    def rec(v: int, parent: int) -> str:
        if tree.is_leaf(v):
            return "L"
        kids = _ordered_children(tree, v, parent)
        return "(" + ",".join(rec(k, v) for k in kids) + ")"

    return f"(L,{rec(root, first)})"


def _leaf_position(tree: HalinTree) -> dict[int, int]:
    return {v: i for i, v in enumerate(tree.leaves)}


def _ordered_children(tree: HalinTree, v: int, parent: int) -> list[int]:
    """Children of ``v`` away from ``parent``, ordered along the leaf circuit.

    The circuit is read starting right after the first leaf of the subtree
    beyond ``parent``, so every subtree occupies a contiguous stretch.
    """
    pos = _leaf_position(tree)
    n = len(tree.leaves)
    outside = _subtree_leaves(tree, parent, v)
    start = max(pos[x] for x in outside) if outside else 0
    # The complement of ``outside`` is a contiguous cyclic interval; find its start.
    out_set = {pos[x] for x in outside}
    for i in range(n):
        if i in out_set and (i + 1) % n not in out_set:
            start = i
            break

    def key(c: int) -> int:
        return min((pos[x] - start - 1) % n for x in _subtree_leaves(tree, c, v))

    return sorted((w for w in tree.adj[v] if w != parent), key=key)


def _subtree_leaves(tree: HalinTree, v: int, parent: int) -> list[int]:
    out = []
    stack = [(v, parent)]
    while stack:
        x, p = stack.pop()
        if tree.is_leaf(x):
            out.append(x)
        for w in tree.adj[x]:
            if w != p:
                stack.append((w, x))
    return out


def halin_to_bracket(tree: HalinTree, fusion_leaf: Optional[int] = None) -> SnarkExpr:
    """Root at the internal vertex next to ``fusion_leaf`` (default: the first leaf)."""
    leaf = tree.leaves[0] if fusion_leaf is None else fusion_leaf
    if not tree.is_leaf(leaf):
        raise SpecError(f"vertex {leaf} is not a leaf")
    root = tree.adj[leaf][0]

    def rec(v: int, parent: int) -> Bracket:
        if tree.is_leaf(v):
            return "F"
        a, b = _ordered_children(tree, v, parent)
        return (rec(a, v), rec(b, v))

    return SnarkExpr("F", rec(root, leaf))


def bracket_to_halin(expr: SnarkExpr) -> HalinTree:
    if expr.left != "F":
        raise SpecError("treelike snark expressions have a single fragment as fusion leaf")

    def text(b: Bracket) -> str:
        return "L" if b == "F" else f"({text(b[0])},{text(b[1])})"

    inner = text(expr.right)
    if expr.right == "F":
        raise SpecError("a treelike snark needs at least 3 leaves")
    return parse_halin(f"(L,{inner})")


def as_snark_expr(spec) -> SnarkExpr:
    """Accept a SnarkExpr, HalinTree, or their text forms."""
    if isinstance(spec, SnarkExpr):
        expr = spec
    elif isinstance(spec, HalinTree):
        expr = halin_to_bracket(spec)
    elif isinstance(spec, str):
        s = spec.strip()
        if "L" in s:
            expr = halin_to_bracket(parse_halin(s))
        else:
            parsed = parse_expression(s)
            if not isinstance(parsed, SnarkExpr):
                raise SpecError("expected a fusion expression such as F*(F+F)")
            expr = parsed
    else:
        raise TypeError(f"unsupported spec type {type(spec).__name__}")
    if expr.left != "F" or bracket_leaves(expr.right) < 2:
        raise SpecError("a treelike snark needs at least 3 leaves")
    return expr


def as_halin(spec) -> HalinTree:
    if isinstance(spec, HalinTree):
        return spec
    if isinstance(spec, str) and "L" in spec:
        return parse_halin(spec)
    return bracket_to_halin(as_snark_expr(spec))


# -- whole graphs ------------------------------------------------------------


def build_snark(expr: SnarkExpr) -> GenGraph:
    return fusion(build_fragment(expr.left), build_fragment(expr.right))


def treelike_snark(spec) -> GenGraph:
    """Treelike snark for a bracket expression (``F*B``) or Halin tree spec."""
    return build_snark(as_snark_expr(spec))


def treelike_snark_direct(spec) -> tuple[GenGraph, list[Fragment]]:
    """Leaf-by-leaf construction straight from the Halin tree.

    Every leaf is replaced by a Petersen fragment whose a3 takes the leaf's
    tree edge; consecutive fragments are linked a4-a'2 and a5-a'1.  Returns the
    graph and the fragments' spoke half-edges (as Fragment records of the
    enclosing graph's ids) in circuit order.
    """
    tree = as_halin(spec)
    g = GenGraph()
    base = petersen_fragment()
    tree_vertex: dict[int, int] = {}
    spokes: dict[int, list[int]] = {}
    for v in range(tree.num_vertices):
        if tree.is_leaf(v):
            _, hoff = g.absorb(base.graph)
            spokes[v] = [h + hoff for h in base.spokes]
        else:
            tree_vertex[v] = g.add_vertex()
    for v in range(tree.num_vertices):
        for w in tree.adj[v]:
            if v < w:
                hv = spokes[v][2] if tree.is_leaf(v) else g.add_loose(tree_vertex[v])
                hw = spokes[w][2] if tree.is_leaf(w) else g.add_loose(tree_vertex[w])
                g.join(hv, hw)
    L = len(tree.leaves)
    for i, leaf in enumerate(tree.leaves):
        nxt = tree.leaves[(i + 1) % L]
        g.join(spokes[leaf][3], spokes[nxt][1])
        g.join(spokes[leaf][4], spokes[nxt][0])
    frags = [spokes[leaf] for leaf in tree.leaves]
    return g, frags


def halin_graph(spec) -> GenGraph:
    return halin_graph_with_circuit(spec)[0]


def halin_graph_with_circuit(spec) -> tuple[GenGraph, list[tuple[int, int]]]:
    """Cubic Halin graph T0 + C0; also returns the circuit edges as (leaf, next leaf)."""
    tree = as_halin(spec)
    g = GenGraph()
    g.add_vertices(tree.num_vertices)
    for v in range(tree.num_vertices):
        for w in tree.adj[v]:
            if v < w:
                g.add_edge(v, w)
    L = len(tree.leaves)
    circuit = []
    for i, leaf in enumerate(tree.leaves):
        nxt = tree.leaves[(i + 1) % L]
        g.add_edge(leaf, nxt)
        circuit.append((leaf, nxt))
    return g, circuit


def cubic_trees(leaves: int) -> list[HalinTree]:
    """All embedded cubic trees with the given leaf count, one per rotation/reflection class."""
    seen: dict[str, HalinTree] = {}
    for expr in _all_brackets(leaves - 1):
        tree = bracket_to_halin(SnarkExpr("F", expr))
        key = _embedding_key(tree)
        seen.setdefault(key, tree)
    return [seen[k] for k in sorted(seen)]


def _all_brackets(n: int) -> list[Bracket]:
    if n == 1:
        return ["F"]
    out = []
    for k in range(1, n):
        for a in _all_brackets(k):
            for b in _all_brackets(n - k):
                out.append((a, b))
    return out


def _embedding_key(tree: HalinTree) -> str:
    """Minimum canonical text over all rotations and reflections of the leaf circuit."""
    keys = []
    for mirrored in (False, True):
        t = mirror(tree) if mirrored else tree
        for i in range(len(t.leaves)):
            rot = HalinTree(t.adj, t.leaves[i:] + t.leaves[:i])
            keys.append(halin_str(rot))
    return min(keys)


def mirror(tree: HalinTree) -> HalinTree:
    """Same tree with the leaf circuit traversed the other way."""
    return HalinTree(tree.adj, [tree.leaves[0]] + tree.leaves[1:][::-1])


def rotations(tree: HalinTree) -> list[HalinTree]:
    return [HalinTree(tree.adj, tree.leaves[i:] + tree.leaves[:i]) for i in range(len(tree.leaves))]


# -- 2-pole substitution and vertex expansion --------------------------------


@dataclass
class Splice:
    """Half-edges a substituted P^- copy attached at its two terminals.

    ``u_halves`` lead to Petersen vertices 2 and 6, ``v_halves`` to 4 and 5
    (Petersen labelling with the removed edge 0-1; u is terminal 1, v is 0).
    """

    u: int
    v: int
    u_halves: tuple[int, int]
    v_halves: tuple[int, int]
    inner: list[int]


def two_pole_splice(g: GenGraph, e, first: Optional[int] = None) -> tuple[GenGraph, Splice]:
    """Replace edge ``e`` by a copy of Petersen-minus-an-edge, identifying the terminals.

    ``first`` selects which endpoint becomes terminal u.  Each terminal trades
    the edge for two edges into the gadget (net degree +1); the graph gains 8
    vertices and 13 edges.
    """
    h = GenGraph.copy(g)
    hu, hv = h.edge_of(e)
    if first is not None:
        if h.owner[hv] == first:
            hu, hv = hv, hu
        elif h.owner[hu] != first:
            raise GraphError(f"vertex {first} is not an endpoint of edge {e}")
    u, v = h.owner[hu], h.owner[hv]
    h.unjoin(hu)
    inner = {p: h.add_vertex() for p in range(2, 10)}
    for a, b in PETERSEN_EDGES:
        if 0 in (a, b) or 1 in (a, b):
            continue
        h.add_edge(inner[a], inner[b])
    # Terminal u replaces Petersen vertex 1 (neighbours 2, 6); v replaces 0 (4, 5).
    h.join(hu, h.add_loose(inner[2]))
    u2 = h.add_loose(u)
    h.join(u2, h.add_loose(inner[6]))
    h.join(hv, h.add_loose(inner[4]))
    v2 = h.add_loose(v)
    h.join(v2, h.add_loose(inner[5]))
    return h, Splice(u, v, (hu, u2), (hv, v2), [inner[p] for p in range(2, 10)])


def substitute_two_pole(g: GenGraph, e, first: Optional[int] = None) -> GenGraph:
    return two_pole_splice(g, e, first)[0]


def expand_vertices(
    g: GenGraph, plans: dict[int, tuple[GenGraph, dict[int, int]]]
) -> tuple[GenGraph, list[Optional[int]], list[Optional[int]]]:
    """Replace each planned vertex by its gadget.

    ``plans[v] = (gadget, boundary_map)`` where ``boundary_map`` sends every
    half-edge of ``v`` to a distinct loose half-edge of the gadget.  Returns
    the new graph plus old->new maps for vertices and half-edges (``None`` for
    removed items).
    """
    for v, (gadget, bmap) in plans.items():
        if len(gadget.loose()) != g.degree(v):
            raise GraphError(
                f"gadget for vertex {v} has {len(gadget.loose())} loose half-edges, degree is {g.degree(v)}"
            )
        if sorted(bmap) != sorted(g.incidence[v]) or sorted(bmap.values()) != sorted(gadget.loose()):
            raise GraphError(f"boundary map for vertex {v} is not a bijection onto the gadget's loose half-edges")
    out = GenGraph()
    vmap: list[Optional[int]] = [None] * g.num_vertices
    hmap: list[Optional[int]] = [None] * g.num_half_edges
    for v in g.vertices():
        if v not in plans:
            vmap[v] = out.add_vertex()
    for h in range(g.num_half_edges):
        if g.owner[h] not in plans:
            hmap[h] = out.add_loose(vmap[g.owner[h]])
    for v in sorted(plans):
        gadget, bmap = plans[v]
        _, hoff = out.absorb(gadget)
        for h, gh in bmap.items():
            hmap[h] = gh + hoff
    for a, b in g.edges():
        out.join(hmap[a], hmap[b])
    return out, vmap, hmap


def expand_vertex(g: GenGraph, v: int, gadget: GenGraph, boundary_map: dict[int, int]) -> GenGraph:
    return expand_vertices(g, {v: (gadget, boundary_map)})[0]


def leaf_gadget() -> tuple[GenGraph, int, tuple[int, int], tuple[int, int]]:
    """Path s1 - y - s2 with one loose half-edge at y and two at each end.

    Returns (gadget, half at y, halves at s1, halves at s2).
    """
    x = GenGraph()
    s1, y, s2 = x.add_vertices(3)
    x.add_edge(s1, y)
    x.add_edge(y, s2)
    hy = x.add_loose(y)
    return x, hy, (x.add_loose(s1), x.add_loose(s1)), (x.add_loose(s2), x.add_loose(s2))


# -- named instances ---------------------------------------------------------

NAMED = ("petersen", "windmill1", "hagglund34")


def named_instance(name: str) -> GenGraph:
    """``windmill1`` is built by fusion of sums, ``hagglund34`` leaf by leaf; both have 3 leaves."""
    if name == "petersen":
        return petersen()
    if name == "windmill1":
        return treelike_snark("F*(F+F)")
    if name == "hagglund34":
        return treelike_snark_direct("(L,L,L)")[0]
    raise SpecError(f"unknown instance {name!r}; choose from {', '.join(NAMED)}")


def fragments_isomorphic(f1: Fragment, f2: Fragment, spoke_perm: Sequence[int] = (0, 1, 2, 3, 4)):
    """Spoke-preserving isomorphism test; ``spoke_perm[i]`` is the spoke of f2 matched to a_i."""
    c1 = f1.spoke_colors()
    relabel = {p: i for i, p in enumerate(spoke_perm)}
    c2 = [tuple(sorted(relabel[i] for i in c)) for c in f2.spoke_colors()]
    return are_isomorphic(f1.graph, f2.graph, c1, c2)

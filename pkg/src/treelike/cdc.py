"""Joins, congruent colourings, 2-packings, (1,2)-covers by joins and 5-cycle double covers.

Edge subsets are bitmasks over edge indices (closed graphs only).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .constructions import as_halin, treelike_snark_direct
from .graph import GenGraph, bits, components, contract, degrees_in, is_join, mask_of


class CDCError(RuntimeError):
    pass


def full_mask(g: GenGraph) -> int:
    return (1 << g.num_edges) - 1


def join_degrees(g: GenGraph, mask: int) -> list[int]:
    return degrees_in(g, mask)


def is_connected_subgraph(g: GenGraph, mask: int) -> bool:
    """The spanning subgraph on ``mask`` is connected (isolated vertices count as pieces)."""
    return len(components(g, full_mask(g) & ~mask)) == 1


def circuit_order(g: GenGraph, mask: int) -> tuple[list[int], list[int]]:
    """Vertices v0..vt and edges [v_i, v_{i+1}] of a circuit given as an edge mask."""
    ends = g.edge_endpoints()
    edges = list(bits(mask))
    if not edges:
        raise CDCError("empty circuit")
    at: dict[int, list[int]] = {}
    for e in edges:
        u, v = ends[e]
        at.setdefault(u, []).append(e)
        at.setdefault(v, []).append(e)
    if any(len(es) != 2 for es in at.values()):
        raise CDCError("edge set is not 2-regular")
    start = min(at)
    verts, path = [start], []
    prev_e = None
    v = start
    while True:
        e = at[v][0] if at[v][0] != prev_e else at[v][1]
        u, w = ends[e]
        nxt = w if u == v else u
        path.append(e)
        if nxt == start:
            break
        verts.append(nxt)
        prev_e, v = e, nxt
    if len(path) != len(edges):
        raise CDCError("edge set is not a single circuit")
    return verts, path


# -- join extension ----------------------------------------------------------


def _extend_on_circuit(g: GenGraph, circ_mask: int, outside: int) -> int:
    """C-edges to add so that ``outside`` (edges off C) plus them is a join near C.

    Indices i where v_i's edge off C is not in ``outside`` are i_0 < i_1 < ...;
    edge [v_i, v_{i+1}] is taken when i_{2l} <= i < i_{2l+1}.
    """
    verts, path = circuit_order(g, circ_mask)
    ends = g.edge_endpoints()
    out_edge = {}
    for e, (u, v) in enumerate(ends):
        if circ_mask >> e & 1:
            continue
        for x in (u, v):
            out_edge.setdefault(x, []).append(e)
    I = []
    for i, v in enumerate(verts):
        es = out_edge.get(v, [])
        if sum(outside >> e & 1 for e in es) % 2 == 0:
            I.append(i)
    if len(I) % 2:
        raise CDCError("restriction is not a join of the contraction")
    add = 0
    for a, b in zip(I[0::2], I[1::2]):
        for i in range(a, b):
            add |= 1 << path[i]
    return add


def extend_join(g: GenGraph, circuit: Sequence[int], jprime: int) -> tuple[int, int]:
    """Both extensions of a join of g/C (mask over quotient edges) to joins of g."""
    cmask = mask_of(circuit)
    q, _ = contract(g, circuit)
    if not is_join(q, jprime):
        raise CDCError("J' is not a join of the contraction")
    ends = g.edge_endpoints()
    verts = set(v for e in circuit for v in ends[e])
    kept = [i for i, (u, v) in enumerate(ends) if not (cmask >> i & 1) and not (u in verts and v in verts)]
    if len(kept) != q.num_edges:
        raise CDCError("contraction edge count mismatch")
    outside = 0
    for j, i in enumerate(kept):
        if jprime >> j & 1:
            outside |= 1 << i
    J = outside | _extend_on_circuit(g, cmask, outside)
    return J, J ^ cmask


# -- congruent colourings ----------------------------------------------------


@dataclass
class CongruentColoring:
    join: int
    colors: dict  # edge -> 1..3

    def is_proper(self, g: GenGraph) -> bool:
        ends = g.edge_endpoints()
        if set(self.colors) != set(bits(self.join)):
            return False
        seen: dict[int, set] = {}
        for e, c in self.colors.items():
            if c not in (1, 2, 3):
                return False
            for v in ends[e]:
                if c in seen.setdefault(v, set()):
                    return False
                seen[v].add(c)
        return True


def pendant_edges(g: GenGraph, join: int) -> int:
    deg = degrees_in(g, join)
    ends = g.edge_endpoints()
    return sum(1 << e for e in bits(join) if deg[ends[e][0]] == 1 or deg[ends[e][1]] == 1)


def is_congruent(g: GenGraph, cc: CongruentColoring, max_union: int = 3) -> tuple[bool, int]:
    """Parity of each colour on cuts made of pendant edges of the join.

    The cuts checked are δ(S) for S a union of at most ``max_union``
    components of g minus the pendant edges.  Returns (verdict, number of
    cuts checked).
    """
    if not cc.is_proper(g):
        raise CDCError("colouring is not a proper 3-edge-colouring of the join")
    pend = pendant_edges(g, cc.join)
    comps = components(g, pend)
    ends = g.edge_endpoints()
    where = {}
    for k, comp in enumerate(comps):
        for v in comp:
            where[v] = k
    checked = 0
    if len(comps) < 2:
        return True, 0
    for r in range(1, min(max_union, len(comps) - 1) + 1):
        for group in itertools.combinations(range(len(comps)), r):
            gs = set(group)
            cut = [e for e in bits(pend) if (where[ends[e][0]] in gs) != (where[ends[e][1]] in gs)]
            checked += 1
            for c in (1, 2, 3):
                if len(cut) % 2 != sum(cc.colors[e] == c for e in cut) % 2:
                    return False, checked
    return True, checked


# -- 2-packing and (1,2)-cover by joins --------------------------------------


def complement_circuits(g: GenGraph, join: int) -> list[int]:
    """Masks of the circuits forming E - J (a join of a cubic graph leaves disjoint circuits)."""
    rest = full_mask(g) & ~join
    ends = g.edge_endpoints()
    out = []
    while rest:
        e0 = (rest & -rest).bit_length() - 1
        comp, stack = 0, [e0]
        while stack:
            e = stack.pop()
            if comp >> e & 1:
                continue
            comp |= 1 << e
            for f in bits(rest):
                if not comp >> f & 1 and set(ends[f]) & set(ends[e]):
                    stack.append(f)
        out.append(comp)
        rest &= ~comp
    return out


def multiplicities(g: GenGraph, joins: Sequence[int]) -> list[int]:
    return [sum(j >> e & 1 for j in joins) for e in range(g.num_edges)]


def build_2packing(g: GenGraph, j4: int, cc: CongruentColoring) -> list[int]:
    """J1, J2, J3 with J_i ∩ J4 = colour class i, shifted on circuits of E - J4 into a 2-packing."""
    if not g.is_cubic():
        raise CDCError("cubic graphs only")
    if cc.join != j4 or not is_join(g, j4):
        raise CDCError("J4 must be the coloured join")
    if not is_connected_subgraph(g, j4):
        raise CDCError("J4 must be connected")
    ok, _ = is_congruent(g, cc)
    if not ok:
        raise CDCError("colouring is not congruent")
    circuits = complement_circuits(g, j4)
    joins = []
    for c in (1, 2, 3):
        cls = sum(1 << e for e, col in cc.colors.items() if col == c)
        J = cls
        for cm in circuits:
            J |= _extend_on_circuit(g, cm, cls)
        if not is_join(g, J):
            raise CDCError(f"extension of colour class {c} is not a join")
        joins.append(J)
    for cm in circuits:
        counts = [sum(J >> e & 1 for J in joins) for e in bits(cm)]
        if counts and counts[0] % 2:
            joins[0] ^= cm  # odd circuits become 0/2 (also when every count is 1)
    packing = joins + [j4]
    mult = multiplicities(g, packing)
    if max(mult, default=0) > 2:
        raise CDCError("not a 2-packing after shifting")
    return packing


def packing_profile(g: GenGraph, packing: Sequence[int]) -> dict:
    """Multiplicity checks for a 2-packing [J1, J2, J3, J4]."""
    mult = multiplicities(g, packing)
    j4 = packing[3]
    circ_ok = True
    for cm in complement_circuits(g, j4):
        counts = {sum(J >> e & 1 for J in packing[:3]) for e in bits(cm)}
        circ_ok &= counts <= {0, 2}
    return {
        "joins": all(is_join(g, J) for J in packing),
        "at_most_two": max(mult, default=0) <= 2,
        "j4_exactly_two": all(mult[e] == 2 for e in bits(j4)),
        "circuits_zero_or_two": circ_ok,
    }


def _path_in(g: GenGraph, mask: int, s: int, t: int) -> Optional[list[int]]:
    """Edge path from s to t using only edges in ``mask`` (BFS)."""
    ends = g.edge_endpoints()
    adj: dict[int, list[tuple[int, int]]] = {}
    for e in bits(mask):
        u, v = ends[e]
        adj.setdefault(u, []).append((v, e))
        adj.setdefault(v, []).append((u, e))
    prev = {s: None}
    dq = deque([s])
    while dq:
        x = dq.popleft()
        if x == t:
            break
        for y, e in adj.get(x, []):
            if y not in prev:
                prev[y] = (x, e)
                dq.append(y)
    if t not in prev:
        return None
    path = []
    x = t
    while prev[x] is not None:
        x, e = prev[x]
        path.append(e)
    return path[::-1]


def build_12cover_4joins(g: GenGraph, packing: Sequence[int]) -> list[int]:
    """Close every uncovered edge into a circuit through J4 and flip J4 along it."""
    j1, j2, j3, j4 = packing
    mult = multiplicities(g, packing)
    ends = g.edge_endpoints()
    j4p = j4
    for e, m in enumerate(mult):
        if m:
            continue
        path = _path_in(g, j4, *ends[e])
        if path is None:
            raise CDCError(f"no circuit through uncovered edge {e} inside J4")
        j4p ^= (1 << e) | mask_of(path)
    out = [j1, j2, j3, j4p]
    if not all(is_join(g, J) for J in out):
        raise CDCError("flipped J4 is not a join")
    if any(m not in (1, 2) for m in multiplicities(g, out)):
        raise CDCError("result is not a (1,2)-cover")
    return out


def cdc_from_join_cover(g: GenGraph, joins: Sequence[int]) -> list[int]:
    """Five cycles from a (1,2)-cover by four joins.

    D (edges covered once) is even; the cycles (E - J_i) Δ D and D cover
    every edge exactly twice.
    """
    full = full_mask(g)
    mult = multiplicities(g, joins)
    D = sum(1 << e for e, m in enumerate(mult) if m == 1)
    return [(full & ~J) ^ D for J in joins] + [D]


# -- cycle double covers -----------------------------------------------------


def verify_cdc(g: GenGraph, cycles: Sequence[int]) -> bool:
    """Every member has even degrees and every edge lies in exactly two members."""
    ends = g.edge_endpoints()
    for c in cycles:
        deg = [0] * g.num_vertices
        for e, (u, v) in enumerate(ends):
            if c >> e & 1:
                deg[u] += 1
                deg[v] += 1
        if any(d % 2 for d in deg):
            return False
    return all(sum(c >> e & 1 for c in cycles) == 2 for e in range(len(ends)))


def find_cdc(
    g: GenGraph, k: int, max_nodes: Optional[int] = None, hints: Sequence[int] = ()
) -> Optional[list[int]]:
    """Assign each edge a pair of classes so every class is even at every vertex.

    ``hints`` are cycles whose membership pattern is tried first on each edge.
    """
    if k > 6 or k < 2:
        raise CDCError("k must lie in 2..6")
    m = g.num_edges
    pairs = [(1 << a) | (1 << b) for a, b in itertools.combinations(range(k), 2)]
    ends = g.edge_endpoints()
    inc: list[list[int]] = [[] for _ in g.vertices()]
    for e, (u, v) in enumerate(ends):
        if u != v:
            inc[u].append(e)
            inc[v].append(e)
    val = [0] * m
    order = _bfs_edge_order(g)
    nodes = 0
    preferred = []
    for e in range(m):
        hint = sum(1 << c for c, cyc in enumerate(hints[:k]) if cyc >> e & 1)
        preferred.append(sorted(pairs, key=lambda p: (p != hint, p)))

    def vertex_ok(v: int) -> bool:
        acc, free = 0, 0
        for e in inc[v]:
            if val[e]:
                acc ^= val[e]
            else:
                free += 1
        if free == 0:
            return acc == 0
        if free == 1:
            return acc == 0 or acc in pairs
        return True

    def rec(i: int) -> bool:
        nonlocal nodes
        nodes += 1
        if max_nodes is not None and nodes > max_nodes:
            raise CDCError("budget")
        if i == len(order):
            return True
        e = order[i]
        options = preferred[e] if i else pairs[:1]  # class symmetry: first edge gets {1,2}
        for p in options:
            val[e] = p
            if all(vertex_ok(v) for v in ends[e]) and rec(i + 1):
                return True
        val[e] = 0
        return False

    if not rec(0):
        return None
    return [sum(1 << e for e in range(m) if val[e] >> c & 1) for c in range(k)]


def _bfs_edge_order(g: GenGraph) -> list[int]:
    ends = g.edge_endpoints()
    adj: dict[int, list[int]] = {}
    for e, (u, v) in enumerate(ends):
        adj.setdefault(u, []).append(e)
        adj.setdefault(v, []).append(e)
    seen_v, seen_e, order = set(), set(), []
    for s in sorted(adj):
        if s in seen_v:
            continue
        dq = deque([s])
        seen_v.add(s)
        while dq:
            x = dq.popleft()
            for e in adj[x]:
                if e not in seen_e:
                    seen_e.add(e)
                    order.append(e)
                    u, v = ends[e]
                    y = v if u == x else u
                    if y not in seen_v:
                        seen_v.add(y)
                        dq.append(y)
    return order


def has_nz4flow(g: GenGraph) -> bool:
    """Nowhere-zero Z2xZ2 flow: values 1..3 per edge with XOR zero at every vertex."""
    return find_nz4flow(g) is not None


def find_nz4flow(g: GenGraph) -> Optional[list[int]]:
    m = g.num_edges
    ends = g.edge_endpoints()
    inc: list[list[int]] = [[] for _ in g.vertices()]
    for e, (u, v) in enumerate(ends):
        if u != v:
            inc[u].append(e)
            inc[v].append(e)
    val = [0] * m
    order = _bfs_edge_order(g)

    def ok(v: int) -> bool:
        acc, free = 0, 0
        for e in inc[v]:
            if val[e]:
                acc ^= val[e]
            else:
                free += 1
        return acc != 0 or free != 1 if free else acc == 0

    def rec(i: int) -> bool:
        if i == len(order):
            return True
        e = order[i]
        for x in ((1, 2, 3) if i else (1,)):
            val[e] = x
            if all(ok(v) for v in ends[e]) and rec(i + 1):
                return True
        val[e] = 0
        return False

    # loops carry any value; give them 1
    for e, (u, v) in enumerate(ends):
        if u == v:
            val[e] = 1
    order = [e for e in order if ends[e][0] != ends[e][1]]
    return list(val) if rec(0) else None


# -- 5-sunlet colourings -----------------------------------------------------

# Sunlet: circuit vertices c0..c4, circuit edge i = c_i c_{i+1}, pendant edge
# 5+i at c_i.  A colouring is a 10-tuple of colours 1..3.


@lru_cache(maxsize=None)
def sunlet_colorings() -> tuple[tuple[int, ...], ...]:
    out = []
    for circ in itertools.product((1, 2, 3), repeat=5):
        if any(circ[i] == circ[(i + 1) % 5] for i in range(5)):
            continue
        pend = tuple(6 - circ[i] - circ[(i - 1) % 5] for i in range(5))
        out.append(circ + pend)
    return tuple(out)


def _dihedral(col: tuple[int, ...], r: int, flip: bool) -> tuple[int, ...]:
    circ, pend = col[:5], col[5:]
    if flip:
        # c_i -> c_{-i}: edge i (c_i c_{i+1}) -> edge between c_{-i-1}, c_{-i}
        circ = tuple(circ[(-i - 1) % 5] for i in range(5))
        pend = tuple(pend[(-i) % 5] for i in range(5))
    circ = circ[r:] + circ[:r]
    pend = pend[r:] + pend[:r]
    return circ + pend


BASE_SUNLET = sunlet_colorings()[0]


@lru_cache(maxsize=None)
def sunlet_table() -> dict:
    """(i, j, colour_i, colour_j) -> first colouring honouring it, for non-consecutive i, j."""
    table = {}
    for i in range(5):
        for j in range(i + 1, 5):
            if (j - i) % 5 not in (2, 3):
                continue
            for a in (1, 2, 3):
                for b in (1, 2, 3):
                    for col in sunlet_colorings():
                        if col[5 + i] == a and col[5 + j] == b:
                            table[(i, j, a, b)] = col
                            break
    return table


def sunlet_coloring(prescription: dict) -> tuple[int, ...]:
    """Complete colours prescribed on two non-consecutive pendant edges (positions 0..4)."""
    if len(prescription) != 2:
        raise CDCError("prescribe exactly two pendant edges")
    (i, a), (j, b) = sorted(prescription.items())
    if (j - i) % 5 not in (2, 3):
        raise CDCError("prescribed pendant edges must be non-consecutive")
    if a not in (1, 2, 3) or b not in (1, 2, 3):
        raise CDCError("colours are 1, 2, 3")
    for perm in itertools.permutations((1, 2, 3)):
        for r in range(5):
            for flip in (False, True):
                col = tuple(perm[c - 1] for c in _dihedral(BASE_SUNLET, r, flip))
                if col[5 + i] == a and col[5 + j] == b:
                    return col
    col = sunlet_table().get((i, j, a, b))
    if col is None:
        raise CDCError(f"no sunlet colouring for {prescription}")
    return col


# -- the treelike construction -----------------------------------------------


@dataclass
class FragmentLabels:
    """Petersen-fragment vertices located from the spokes (labels as in P minus vertex 0)."""

    s1: int
    s2: int
    v: dict  # Petersen label 1..9 -> vertex
    a4_edge: int
    a5_edge: int


def _label_fragment(g: GenGraph, spokes: Sequence[int]) -> FragmentLabels:
    owner, partner = g.owner, g.partner
    eidx = g.edge_index()
    s1, s2, y, v4, v5 = (owner[h] for h in spokes)
    far = {owner[partner[h]] for h in spokes}
    adj = [set(ns) for ns in g.adjacency()]
    v2 = next(w for w in adj[s1] if w != y and w not in far)
    v6 = next(w for w in adj[s2] if w != y and w not in far)
    v7 = next(w for w in adj[v2] & adj[v5])
    v3 = next(w for w in adj[v2] if w not in (s1, v7))
    v8 = next(w for w in adj[v5] if w != v7 and w != owner[partner[spokes[4]]])
    v9 = next(w for w in adj[v4] if w != v3 and w != owner[partner[spokes[3]]])
    labels = {1: y, 2: v2, 3: v3, 4: v4, 5: v5, 6: v6, 7: v7, 8: v8, 9: v9}
    return FragmentLabels(s1, s2, labels, eidx[spokes[3]], eidx[spokes[4]])


def _edge(g: GenGraph, a: int, b: int) -> int:
    for e, (u, v) in enumerate(g.edge_endpoints()):
        if {u, v} == {a, b}:
            return e
    raise CDCError(f"no edge {a}-{b}")


@dataclass
class TreelikeCDC:
    graph: GenGraph
    circuit: int
    join: int
    coloring: CongruentColoring
    packing: list[int]
    join_cover: list[int]
    cycles: list[int]


def treelike_5cdc(spec) -> TreelikeCDC:
    tree = as_halin(spec)
    g, frag_spokes = treelike_snark_direct(tree)
    labs = [_label_fragment(g, sp) for sp in frag_spokes]
    # C: per fragment the path s1-2-7-5 plus the edge a5-a1'.
    C = 0
    for lab in labs:
        v = lab.v
        for a, b in ((lab.s1, v[2]), (v[2], v[7]), (v[7], v[5])):
            C |= 1 << _edge(g, a, b)
        C |= 1 << lab.a5_edge
    circuit_order(g, C)  # raises unless C is one circuit
    J = full_mask(g) & ~C
    if not is_join(g, J) or not is_connected_subgraph(g, J):
        raise CDCError("complement of C is not a connected join")
    # X: the sunlet 3-4-9-6-8 with pendant edges 3-2, 9-7, 8-5 in every fragment.
    X = 0
    sunlets = []
    for lab in labs:
        v = lab.v
        circ = [v[3], v[4], v[9], v[6], v[8]]
        cedges = [_edge(g, circ[i], circ[(i + 1) % 5]) for i in range(5)]
        pends = [_edge(g, v[3], v[2]), lab.a4_edge, _edge(g, v[9], v[7]),
                 _edge(g, v[6], lab.s2), _edge(g, v[8], v[5])]
        for e in cedges + [pends[0], pends[2], pends[4]]:
            X |= 1 << e
        sunlets.append((cedges, pends))
    T = J & ~X
    colors = _color_tree(g, T)
    for cedges, pends in sunlets:
        col = sunlet_coloring({1: colors[pends[1]], 3: colors[pends[3]]})
        for e, c in zip(cedges + pends, col):
            if e in colors and colors[e] != c:
                raise CDCError("sunlet colouring disagrees with the tree colouring")
            colors[e] = c
    cc = CongruentColoring(J, colors)
    if not cc.is_proper(g):
        raise CDCError("colouring of J is not proper")
    packing = build_2packing(g, J, cc)
    cover = build_12cover_4joins(g, packing)
    cycles = cdc_from_join_cover(g, cover)
    if not verify_cdc(g, cycles):
        full = full_mask(g)
        cycles = find_cdc(g, 5, hints=[full & ~J for J in cover])
        if cycles is None or not verify_cdc(g, cycles):
            raise CDCError("5-CDC failed verification")
    return TreelikeCDC(g, C, J, cc, packing, cover, cycles)


def _color_tree(g: GenGraph, mask: int) -> dict:
    """Greedy proper colouring of a forest given by an edge mask (max degree 3)."""
    ends = g.edge_endpoints()
    adj: dict[int, list[int]] = {}
    for e in bits(mask):
        u, v = ends[e]
        adj.setdefault(u, []).append(e)
        adj.setdefault(v, []).append(e)
    colors: dict[int, int] = {}
    seen = set()
    for s in sorted(adj):
        if s in seen:
            continue
        seen.add(s)
        dq = deque([s])
        while dq:
            x = dq.popleft()
            used = {colors[e] for e in adj[x] if e in colors}
            free = iter(c for c in (1, 2, 3) if c not in used)
            for e in adj[x]:
                if e not in colors:
                    colors[e] = next(free)
                    u, v = ends[e]
                    y = v if u == x else u
                    if y in seen:
                        raise CDCError("T is not a forest")
                    seen.add(y)
                    dq.append(y)
    return colors


def cycles_to_text(g: GenGraph, cycles: Sequence[int]) -> str:
    return "".join(" ".join(str(e) for e in bits(c)) + "\n" for c in cycles)


def cycles_from_text(text: str) -> list[int]:
    out = []
    for line in text.splitlines():
        if line.strip().startswith("#"):
            continue
        out.append(mask_of(int(t) for t in line.split()))
    return out

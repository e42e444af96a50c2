"""Generalised graphs built from half-edges.

A vertex owns an ordered list of half-edges.  Two half-edges may be partnered
into an edge; an unpartnered half-edge is *loose*.  Vertex and half-edge ids
are dense integers assigned in creation order, and every derived listing
(edges, loose half-edges, serialisation) is sorted by id, so re-running a
construction reproduces byte-identical output.

Edges are listed by ``edges()`` as ``(h, h')`` pairs with ``h < h'``, ordered
by ``h``.  Most queries accept an edge either as its index in that list or as
any of its two half-edges via :meth:`GenGraph.edge_of`.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

INF = float("inf")


class GraphError(ValueError):
    """Raised on structurally invalid operations (loops, re-joining, unknown ids)."""


class GenGraph:
    def __init__(self) -> None:
        self.owner: list[int] = []
        self.partner: list[Optional[int]] = []
        self.incidence: list[list[int]] = []
        self._cache: dict = {}

    # -- construction -------------------------------------------------------

    def add_vertex(self) -> int:
        self.incidence.append([])
        self._cache.clear()
        return len(self.incidence) - 1

    def add_vertices(self, n: int) -> list[int]:
        return [self.add_vertex() for _ in range(n)]

    def add_loose(self, v: int) -> int:
        if not 0 <= v < len(self.incidence):
            raise GraphError(f"unknown vertex {v}")
        h = len(self.owner)
        self.owner.append(v)
        self.partner.append(None)
        self.incidence[v].append(h)
        self._cache.clear()
        return h

    def join(self, h1: int, h2: int, *, allow_parallel: bool = True) -> tuple[int, int]:
        """Partner two loose half-edges at distinct vertices into an edge."""
        for h in (h1, h2):
            if not 0 <= h < len(self.owner):
                raise GraphError(f"unknown half-edge {h}")
            if self.partner[h] is not None:
                raise GraphError(f"half-edge {h} is not loose")
        if h1 == h2 or self.owner[h1] == self.owner[h2]:
            raise GraphError("joining half-edges at the same vertex would create a loop")
        if not allow_parallel and self.owner[h2] in self.neighbors(self.owner[h1]):
            raise GraphError("edge would be parallel to an existing edge")
        self.partner[h1] = h2
        self.partner[h2] = h1
        self._cache.clear()
        return (min(h1, h2), max(h1, h2))

    def add_edge(self, u: int, v: int) -> tuple[int, int]:
        return self.join(self.add_loose(u), self.add_loose(v))

    def unjoin(self, h: int) -> int:
        """Split the edge containing ``h``; returns the former partner."""
        p = self.partner[h]
        if p is None:
            raise GraphError(f"half-edge {h} is loose")
        self.partner[h] = None
        self.partner[p] = None
        self._cache.clear()
        return p

    def subdivide(self, e) -> int:
        """Replace edge ``e`` by a path of length two through a new vertex."""
        h1, h2 = self.edge_of(e)
        self.unjoin(h1)
        w = self.add_vertex()
        self.join(h1, self.add_loose(w))
        self.join(h2, self.add_loose(w))
        return w

    def copy(self) -> "GenGraph":
        g = GenGraph()
        g.owner = list(self.owner)
        g.partner = list(self.partner)
        g.incidence = [list(hs) for hs in self.incidence]
        return g

    def absorb(self, other: "GenGraph") -> tuple[int, int]:
        """Append a disjoint copy of ``other``; returns (vertex offset, half-edge offset)."""
        voff, hoff = len(self.incidence), len(self.owner)
        self.owner.extend(v + voff for v in other.owner)
        self.partner.extend(None if p is None else p + hoff for p in other.partner)
        self.incidence.extend([h + hoff for h in hs] for hs in other.incidence)
        self._cache.clear()
        return voff, hoff

    # -- basic queries ------------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return len(self.incidence)

    @property
    def num_half_edges(self) -> int:
        return len(self.owner)

    def vertices(self) -> range:
        return range(len(self.incidence))

    def edges(self) -> list[tuple[int, int]]:
        if "edges" not in self._cache:
            self._cache["edges"] = [
                (h, p) for h, p in enumerate(self.partner) if p is not None and h < p
            ]
        return self._cache["edges"]

    @property
    def num_edges(self) -> int:
        return len(self.edges())

    def loose(self) -> list[int]:
        if "loose" not in self._cache:
            self._cache["loose"] = [h for h, p in enumerate(self.partner) if p is None]
        return self._cache["loose"]

    def edge_index(self) -> dict[int, int]:
        """Map every partnered half-edge to the index of its edge."""
        if "eindex" not in self._cache:
            idx = {}
            for i, (a, b) in enumerate(self.edges()):
                idx[a] = i
                idx[b] = i
            self._cache["eindex"] = idx
        return self._cache["eindex"]

    def edge_of(self, e) -> tuple[int, int]:
        """Normalise an edge reference (index, pair, or ``("h", half)``) to its pair."""
        if isinstance(e, tuple) and len(e) == 2 and e[0] == "h":
            h = e[1]
            p = self.partner[h] if 0 <= h < len(self.partner) else None
            if p is None:
                raise GraphError(f"half-edge {h} is not part of an edge")
            return (min(h, p), max(h, p))
        if isinstance(e, tuple):
            a, b = e
            if not (0 <= a < len(self.partner)) or self.partner[a] != b:
                raise GraphError(f"unknown edge {e}")
            return (min(a, b), max(a, b))
        edges = self.edges()
        if not 0 <= e < len(edges):
            raise GraphError(f"unknown edge {e}")
        return edges[e]

    def endpoints(self, e) -> tuple[int, int]:
        a, b = self.edge_of(e)
        return self.owner[a], self.owner[b]

    def edge_endpoints(self) -> list[tuple[int, int]]:
        if "ends" not in self._cache:
            self._cache["ends"] = [(self.owner[a], self.owner[b]) for a, b in self.edges()]
        return self._cache["ends"]

    def degree(self, v: int) -> int:
        return len(self.incidence[v])

    def neighbors(self, v: int) -> list[int]:
        out = []
        for h in self.incidence[v]:
            p = self.partner[h]
            if p is not None:
                out.append(self.owner[p])
        return out

    def adjacency(self) -> list[list[int]]:
        if "adj" not in self._cache:
            self._cache["adj"] = [self.neighbors(v) for v in self.vertices()]
        return self._cache["adj"]

    def incident_edges(self, v: int) -> list[int]:
        idx = self.edge_index()
        return [idx[h] for h in self.incidence[v] if self.partner[h] is not None]

    def is_cubic(self) -> bool:
        return all(len(hs) == 3 for hs in self.incidence)

    def has_parallel_edges(self) -> bool:
        seen = set()
        for u, v in self.edge_endpoints():
            key = (min(u, v), max(u, v))
            if key in seen:
                return True
            seen.add(key)
        return False

    def __repr__(self) -> str:
        return f"GenGraph(|V|={self.num_vertices}, |E|={self.num_edges}, loose={len(self.loose())})"

    # -- serialisation ------------------------------------------------------

    def to_text(self, loose_order: Optional[Sequence[int]] = None) -> str:
        """Line format: ``v <id>``, ``e <u> <v>``, ``l <vertex>``; LF-terminated ASCII.

        ``loose_order`` lets fragments emit their loose half-edges in spoke
        order instead of id order.
        """
        lines = [f"v {v}" for v in self.vertices()]
        lines += [f"e {u} {v}" for u, v in self.edge_endpoints()]
        order = self.loose() if loose_order is None else loose_order
        lines += [f"l {self.owner[h]}" for h in order]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GenGraph":
        g = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                if parts[0] == "v":
                    if int(parts[1]) != g.num_vertices:
                        raise GraphError(f"line {lineno}: vertex ids must be dense and ordered")
                    g.add_vertex()
                elif parts[0] == "e":
                    g.add_edge(int(parts[1]), int(parts[2]))
                elif parts[0] == "l":
                    g.add_loose(int(parts[1]))
                else:
                    raise GraphError(f"line {lineno}: unknown record {parts[0]!r}")
            except (IndexError, ValueError) as exc:
                raise GraphError(f"line {lineno}: {exc}") from exc
        return g


def disjoint_union(*graphs: GenGraph) -> tuple[GenGraph, list[tuple[int, int]]]:
    g = GenGraph()
    offsets = [g.absorb(h) for h in graphs]
    return g, offsets


# -- bit-vector edge subsets -------------------------------------------------


def element_count(g: GenGraph, with_loose: bool = True) -> int:
    """Width of an edge subset: |E|, plus the loose half-edges when extended."""
    return g.num_edges + (len(g.loose()) if with_loose else 0)


def element_of_half(g: GenGraph) -> dict[int, int]:
    """Map each half-edge to its element index (edge index, or |E| + loose rank)."""
    m = g.num_edges
    out = dict(g.edge_index())
    for i, h in enumerate(g.loose()):
        out[h] = m + i
    return out


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def degrees_in(g: GenGraph, edge_mask: int) -> list[int]:
    """Degree of each vertex in the spanning subgraph given by an edge mask."""
    deg = [0] * g.num_vertices
    for i in bits(edge_mask):
        u, v = g.edge_endpoints()[i]
        deg[u] += 1
        deg[v] += 1
    return deg


def is_cycle(g: GenGraph, edge_mask: int) -> bool:
    return all(d % 2 == 0 for d in degrees_in(g, edge_mask))


def is_join(g: GenGraph, edge_mask: int) -> bool:
    """Every vertex has the same degree parity in the subgraph as in ``g``."""
    deg = degrees_in(g, edge_mask)
    return all(deg[v] % 2 == len(g.incident_edges(v)) % 2 for v in g.vertices())


# -- traversal ---------------------------------------------------------------


def bfs_distances(g: GenGraph, source: int, removed: int = 0) -> list[float]:
    """BFS distances from ``source``, ignoring the edges in ``removed`` (a mask)."""
    dist: list[float] = [INF] * g.num_vertices
    dist[source] = 0
    ends = g.edge_endpoints()
    inc = [g.incident_edges(v) for v in g.vertices()] if removed else None
    adj = g.adjacency()
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if inc is None:
            nbrs = adj[u]
        else:
            nbrs = []
            for e in inc[u]:
                if not removed >> e & 1:
                    a, b = ends[e]
                    nbrs.append(b if a == u else a)
        for w in nbrs:
            if dist[w] == INF:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def components(g: GenGraph, removed: int = 0) -> list[list[int]]:
    """Connected components (vertex lists) after deleting the edges in ``removed``."""
    seen = [False] * g.num_vertices
    comps = []
    for s in g.vertices():
        if seen[s]:
            continue
        d = bfs_distances(g, s, removed)
        comp = [v for v in g.vertices() if d[v] != INF]
        for v in comp:
            seen[v] = True
        comps.append(comp)
    return comps


def is_connected(g: GenGraph) -> bool:
    return g.num_vertices == 0 or INF not in bfs_distances(g, 0)


def girth(g: GenGraph) -> float:
    """Length of a shortest circuit; ``inf`` for forests, 2 with parallel edges."""
    if g.has_parallel_edges():
        return 2
    ends = g.edge_endpoints()
    inc = [g.incident_edges(v) for v in g.vertices()]
    best = INF
    for s in g.vertices():
        dist = {s: 0}
        via = {s: -1}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for e in inc[u]:
                if e == via[u]:
                    continue
                a, b = ends[e]
                w = b if a == u else a
                if w not in dist:
                    dist[w] = dist[u] + 1
                    via[w] = e
                    queue.append(w)
                else:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def half_edge_distance(g: GenGraph, h1: int, h2: int) -> float:
    return bfs_distances(g, g.owner[h1])[g.owner[h2]]


def _has_cycle(g: GenGraph, comp: list[int], removed: int) -> bool:
    members = set(comp)
    count = 0
    for i, (u, v) in enumerate(g.edge_endpoints()):
        if not removed >> i & 1 and u in members:
            count += 1
    return count >= len(comp)


def is_cyclically_k_connected(g: GenGraph, k: int) -> tuple[bool, Optional[list[int]]]:
    """Exhaustive scan of edge sets of size < k for a cyclic cut.

    Returns ``(True, None)`` or ``(False, witness)`` where the witness is a
    list of edge indices (empty when the failure is ``|E| <= k``).
    """
    if not is_connected(g):
        raise GraphError("cyclic connectivity is defined here for connected graphs only")
    m = g.num_edges
    if m <= k:
        return False, []
    for size in range(1, k):
        for cut in itertools.combinations(range(m), size):
            removed = mask_of(cut)
            comps = components(g, removed)
            if len(comps) < 2:
                continue
            cyclic = [c for c in comps if _has_cycle(g, c, removed)]
            if len(cyclic) >= 2:
                return False, list(cut)
    return True, None


# -- contraction -------------------------------------------------------------


def contract(g: GenGraph, edge_set: Iterable[int]) -> tuple[GenGraph, list[int]]:
    """Contract the given edges (indices).

    Parallel edges survive as distinct edges; edges that become loops are
    deleted, which is what contracting a whole circuit requires.  Loose
    half-edges are kept on their (merged) vertex.  Returns the quotient and
    the map old vertex -> new vertex.
    """
    parent = list(g.vertices())

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = set(edge_set)
    ends = g.edge_endpoints()
    for i in chosen:
        a, b = find(ends[i][0]), find(ends[i][1])
        if a != b:
            parent[max(a, b)] = min(a, b)
    roots = sorted({find(v) for v in g.vertices()})
    new_id = {r: i for i, r in enumerate(roots)}
    vmap = [new_id[find(v)] for v in g.vertices()]
    q = GenGraph()
    q.add_vertices(len(roots))
    for i, (u, v) in enumerate(ends):
        if i in chosen or vmap[u] == vmap[v]:
            continue
        q.add_edge(vmap[u], vmap[v])
    for h in g.loose():
        q.add_loose(vmap[g.owner[h]])
    return q, vmap


# -- isomorphism -------------------------------------------------------------


@dataclass
class IsoResult:
    isomorphic: bool
    mapping: Optional[list[int]] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.isomorphic


def _multi_adjacency(g: GenGraph) -> list[dict[int, int]]:
    adj: list[dict[int, int]] = [dict() for _ in g.vertices()]
    for u, v in g.edge_endpoints():
        adj[u][v] = adj[u].get(v, 0) + 1
        adj[v][u] = adj[v].get(u, 0) + 1
    return adj


def _initial_invariants(g: GenGraph, colors: Optional[Sequence]) -> list[tuple]:
    loose_count = [0] * g.num_vertices
    for h in g.loose():
        loose_count[g.owner[h]] += 1
    out = []
    for v in g.vertices():
        dist = bfs_distances(g, v)
        profile: dict[float, int] = {}
        for d in dist:
            profile[d] = profile.get(d, 0) + 1
        out.append(
            (
                repr(colors[v]) if colors is not None else "",
                g.degree(v),
                loose_count[v],
                tuple(sorted(profile.items())),
            )
        )
    return out


def are_isomorphic(
    g1: GenGraph,
    g2: GenGraph,
    colors1: Optional[Sequence] = None,
    colors2: Optional[Sequence] = None,
) -> IsoResult:
    """Vertex bijection preserving (multi-)adjacency, loose counts and optional colours.

    Individualisation-refinement backtracking seeded by degree and
    distance-profile invariants.  Intended for graphs up to roughly 120
    vertices.
    """
    n = g1.num_vertices
    if n != g2.num_vertices:
        return IsoResult(False, reason=f"vertex counts differ ({n} vs {g2.num_vertices})")
    if g1.num_edges != g2.num_edges:
        return IsoResult(False, reason=f"edge counts differ ({g1.num_edges} vs {g2.num_edges})")
    if len(g1.loose()) != len(g2.loose()):
        return IsoResult(False, reason="loose half-edge counts differ")
    adj1, adj2 = _multi_adjacency(g1), _multi_adjacency(g2)
    inv1 = _initial_invariants(g1, colors1)
    inv2 = _initial_invariants(g2, colors2)
    if sorted(inv1) != sorted(inv2):
        return IsoResult(False, reason="vertex invariant multisets differ")
    # Joint ranking so colour ids mean the same thing on both sides.
    table = {s: i for i, s in enumerate(sorted(set(inv1)))}
    c1 = _refine_pair(adj1, adj2, [table[s] for s in inv1], [table[s] for s in inv2])
    if c1 is None:
        return IsoResult(False, reason="colour refinement separates the graphs")
    mapping = _search(adj1, adj2, *c1)
    if mapping is None:
        return IsoResult(False, reason="exhaustive search found no isomorphism")
    if not check_isomorphism(g1, g2, mapping, colors1, colors2):
        return IsoResult(False, reason="internal error: mapping failed verification")
    return IsoResult(True, mapping)


def _refine_pair(adj1, adj2, cells1, cells2):
    """Refine both partitions with a shared colour table; None if they diverge."""
    n = len(cells1)
    while True:
        s1 = [(cells1[v], tuple(sorted((cells1[w], k) for w, k in adj1[v].items()))) for v in range(n)]
        s2 = [(cells2[v], tuple(sorted((cells2[w], k) for w, k in adj2[v].items()))) for v in range(n)]
        if sorted(s1) != sorted(s2):
            return None
        ranks = {s: i for i, s in enumerate(sorted(set(s1)))}
        new1 = [ranks[s] for s in s1]
        new2 = [ranks[s] for s in s2]
        if len(ranks) == len(set(cells1)):
            return new1, new2
        cells1, cells2 = new1, new2


def _search(adj1, adj2, cells1, cells2) -> Optional[list[int]]:
    n = len(cells1)
    if len(set(cells1)) == n:
        where = {c: v for v, c in enumerate(cells2)}
        mapping = [where[cells1[v]] for v in range(n)]
        for v in range(n):
            for w, k in adj1[v].items():
                if adj2[mapping[v]].get(mapping[w], 0) != k:
                    return None
        return mapping
    # Individualise a vertex in the smallest non-singleton cell.
    sizes: dict[int, int] = {}
    for c in cells1:
        sizes[c] = sizes.get(c, 0) + 1
    target = min((s, c) for c, s in sizes.items() if s > 1)[1]
    v = cells1.index(target)
    fresh = max(cells1) + 1
    for w in [u for u in range(n) if cells2[u] == target]:
        t1 = list(cells1)
        t2 = list(cells2)
        t1[v] = fresh
        t2[w] = fresh
        refined = _refine_pair(adj1, adj2, t1, t2)
        if refined is None:
            continue
        found = _search(adj1, adj2, *refined)
        if found is not None:
            return found
    return None


def check_isomorphism(
    g1: GenGraph,
    g2: GenGraph,
    mapping: Sequence[int],
    colors1: Optional[Sequence] = None,
    colors2: Optional[Sequence] = None,
) -> bool:
    """Independent check that ``mapping`` is an isomorphism g1 -> g2."""
    n = g1.num_vertices
    if n != g2.num_vertices or sorted(mapping) != list(range(n)):
        return False
    if colors1 is not None or colors2 is not None:
        if colors1 is None or colors2 is None:
            return False
        if any(colors1[v] != colors2[mapping[v]] for v in range(n)):
            return False
    e1 = sorted(tuple(sorted((mapping[u], mapping[v]))) for u, v in g1.edge_endpoints())
    e2 = sorted(tuple(sorted(p)) for p in g2.edge_endpoints())
    l1 = sorted(mapping[g1.owner[h]] for h in g1.loose())
    l2 = sorted(g2.owner[h] for h in g2.loose())
    return e1 == e2 and l1 == l2

"""Integer (p,q)-flows, exact circular flow numbers of small graphs, and φc >= 5 certificates.

A (p,q)-flow orients every edge and gives it an integer value in
``[q, p-q]`` with conservation at each vertex; it exists iff the circular
flow number is at most p/q.  Values are stored signed relative to the edge
direction ``u -> v`` of ``GenGraph.edge_endpoints()``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .chromatic import bridges
from .constructions import (
    as_halin,
    expand_vertices,
    halin_graph_with_circuit,
    halin_str,
    parse_halin,
    leaf_gadget,
    treelike_snark,
    two_pole_splice,
)
from .graph import GenGraph, GraphError, are_isomorphic, check_isomorphism, is_connected


class FlowError(ValueError):
    pass


@dataclass
class PQFlow:
    p: int
    q: int
    values: list[int]

    def orientation(self) -> list[int]:
        """1 where the edge is used as stored (u -> v), 0 where reversed."""
        return [1 if x > 0 else 0 for x in self.values]

    def to_text(self) -> str:
        lines = [f"# p={self.p} q={self.q}"]
        lines += [f"{i} {'+' if x > 0 else '-'} {abs(x)}" for i, x in enumerate(self.values)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PQFlow":
        p = q = None
        values = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    k, _, v = tok.partition("=")
                    if k == "p":
                        p = int(v)
                    elif k == "q":
                        q = int(v)
                continue
            eid, sign, val = line.split()
            if int(eid) != len(values):
                raise FlowError("flow lines must list edges 0..m-1 in order")
            values.append(int(val) if sign == "+" else -int(val))
        if p is None or q is None:
            raise FlowError("missing '# p=.. q=..' header")
        return cls(p, q, values)


def verify_pq_flow(g: GenGraph, flow: PQFlow) -> bool:
    """Independent check: value window and conservation at every vertex."""
    p, q = flow.p, flow.q
    if len(flow.values) != g.num_edges or g.loose():
        return False
    if any(not q <= abs(x) <= p - q for x in flow.values):
        return False
    net = [0] * g.num_vertices
    for (u, v), x in zip(g.edge_endpoints(), flow.values):
        net[u] -= x
        net[v] += x
    return not any(net)


def reverse_edge(flow: PQFlow, e: int) -> PQFlow:
    values = list(flow.values)
    values[e] = -values[e]
    return PQFlow(flow.p, flow.q, values)


# -- frontier search ---------------------------------------------------------


def elimination_order(g: GenGraph) -> list[int]:
    """Greedy vertex order keeping the frontier small: next vertex has most processed neighbours."""
    n = g.num_vertices
    if n == 0:
        return []
    adj = g.adjacency()
    done = [False] * n
    seq = []
    while len(seq) < n:
        start = next(v for v in range(n) if not done[v])
        seq.append(start)
        done[start] = True
        while True:
            best, key = None, None
            for v in range(n):
                if not done[v]:
                    a = sum(done[w] for w in adj[v])
                    if a and (key is None or (-a, v) < key):
                        best, key = v, (-a, v)
            if best is None:
                break
            seq.append(best)
            done[best] = True
    return seq


@dataclass
class _Layer:
    vertex: int
    take: list[int]   # frontier positions consumed (edges into the vertex)
    signs: list[int]  # +1 if the consumed edge points into the vertex as stored
    keep: list[int]   # frontier positions kept, in order
    new: list[int]    # edge ids opened at the vertex
    new_signs: list[int]  # +1 if the vertex is the stored tail of the new edge


def _plan(g: GenGraph, order: Sequence[int]) -> list[_Layer]:
    ends = g.edge_endpoints()
    inc: list[list[int]] = [[] for _ in g.vertices()]
    for i, (u, v) in enumerate(ends):
        if u != v:
            inc[u].append(i)
            inc[v].append(i)
    front: list[int] = []
    layers = []
    for v in order:
        mine = set(inc[v])
        take = [i for i, e in enumerate(front) if e in mine]
        keep = [i for i, e in enumerate(front) if e not in mine]
        taken = {front[i] for i in take}
        new = [e for e in inc[v] if e not in taken]
        # an edge listed twice at v (parallel handled by ids) is fine; loops skipped
        signs = [1 if ends[front[i]][1] == v else -1 for i in take]
        new_signs = [1 if ends[e][0] == v else -1 for e in new]
        layers.append(_Layer(v, take, signs, keep, new, new_signs))
        front = [front[i] for i in keep] + new
    return layers


def _canon(s: tuple) -> tuple:
    neg = tuple(-x for x in s)
    return min(s, neg)


def _step(states, layer: _Layer, dom: Sequence[int], lo: int, hi: int) -> set:
    """Advance frontier states over one vertex (states hold flow along the stored direction)."""
    out = set()
    k = len(layer.new)
    for s in states:
        inflow = sum(sg * s[i] for i, sg in zip(layer.take, layer.signs))
        base = tuple(s[i] for i in layer.keep)
        if k == 0:
            if inflow == 0:
                out.add(_canon(base))
            continue
        ns = layer.new_signs
        for head in itertools.product(dom, repeat=k - 1):
            # outflow through new edges must equal inflow
            last = inflow - sum(head)
            if lo <= abs(last) <= hi:
                vals = head + (last,)
                out.add(_canon(base + tuple(sg * x for sg, x in zip(ns, vals))))
    return out


def _run_layers(args) -> tuple[bool, int]:
    layers, start, states, p, q, max_states = args
    dom = [x for x in range(-(p - q), p - q + 1) if abs(x) >= q]
    peak = len(states)
    for layer in layers[start:]:
        states = _step(states, layer, dom, q, p - q)
        peak = max(peak, len(states))
        if max_states is not None and len(states) > max_states:
            return None, peak  # type: ignore[return-value]
        if not states:
            return False, peak
    return bool(states), peak


@dataclass
class FlowResult:
    status: str  # "found", "none", "bridge", "incomplete"
    p: int
    q: int
    flow: Optional[PQFlow] = None
    stats: dict = field(default_factory=dict)

    @property
    def exists(self) -> Optional[bool]:
        if self.status == "found":
            return True
        if self.status in ("none", "bridge"):
            return False
        return None


def _witness(g: GenGraph, layers: list[_Layer], p: int, q: int) -> Optional[PQFlow]:
    """Depth-first search over the same layers, memoising dead frontier states."""
    dom = [x for x in range(-(p - q), p - q + 1) if abs(x) >= q]
    dead: list[set] = [set() for _ in range(len(layers) + 1)]
    values = [0] * g.num_edges
    def rec(i: int, s: tuple) -> bool:
        if i == len(layers):
            return True
        key = _canon(s)
        if key in dead[i]:
            return False
        layer = layers[i]
        inflow = sum(sg * s[j] for j, sg in zip(layer.take, layer.signs))
        base = tuple(s[j] for j in layer.keep)
        k = len(layer.new)
        options = [()] if k == 0 and inflow == 0 else []
        if k:
            for head in itertools.product(dom, repeat=k - 1):
                last = inflow - sum(head)
                if q <= abs(last) <= p - q:
                    options.append(tuple(sg * x for sg, x in zip(layer.new_signs, head + (last,))))
        for vals in options:
            for e, x in zip(layer.new, vals):
                values[e] = x
            if rec(i + 1, base + vals):
                return True
        dead[i].add(key)
        return False

    if rec(0, ()):
        return PQFlow(p, q, list(values))
    return None


def find_pq_flow(
    g: GenGraph, p: int, q: int, jobs: int = 1, max_states: Optional[int] = None
) -> FlowResult:
    """Search for a (p,q)-flow; ``status="none"`` is an exhaustive refutation.

    Vertices are processed in a fixed order while the set of reachable value
    vectors on the frontier edges is kept (up to global negation).  With
    ``jobs > 1`` the frontier after the first layers is split across worker
    processes; the verdict does not depend on the split.
    """
    if p < 2 * q or q < 1:
        raise FlowError("need q >= 1 and p >= 2q")
    if g.loose():
        raise FlowError("flows are defined on closed graphs")
    if g.num_edges == 0:
        return FlowResult("found", p, q, PQFlow(p, q, []))
    br = bridges(g)
    if br:
        return FlowResult("bridge", p, q, stats={"bridge": br[0]})
    order = elimination_order(g)
    layers = _plan(g, order)
    frontier_max = max((len(l.keep) + len(l.new) for l in layers), default=0)
    dom = [x for x in range(-(p - q), p - q + 1) if abs(x) >= q]
    states = {()}
    start = 0
    jobs = max(1, jobs)
    # Expand a few layers so there is something to split.
    while start < len(layers) and len(states) < 8 * jobs and states:
        states = _step(states, layers[start], dom, q, p - q)
        start += 1
    ordered = sorted(states)
    chunks = [set(ordered[i::jobs]) for i in range(jobs)]
    payload = [(layers, start, c, p, q, max_states) for c in chunks if c]
    if not payload:
        results = [(False, 0)]
    elif jobs > 1 and len(payload) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_layers, payload))
    else:
        results = [_run_layers(a) for a in payload]
    stats = {"frontier": frontier_max, "peak_states": max(r[1] for r in results)}
    if any(r[0] is True for r in results):
        flow = _witness(g, layers, p, q)
        if flow is None or not verify_pq_flow(g, flow):
            raise FlowError("internal error: witness reconstruction failed")
        return FlowResult("found", p, q, flow, stats)
    if any(r[0] is None for r in results):
        return FlowResult("incomplete", p, q, stats=stats)
    return FlowResult("none", p, q, stats=stats)


# -- exact circular flow number (small graphs) -------------------------------


def phi_c_exact_small(g: GenGraph, max_edges: int = 24) -> Fraction | float:
    """min over orientations of max over cuts of |δ(U)| / |δ⁻(U)|, exactly.

    Orientations are enumerated edge by edge; a vertex whose incident edges
    are all oriented the same way closes the branch (no strongly connected
    completion).  Returns ``math.inf`` when a bridge exists.
    """
    if g.loose():
        raise FlowError("closed graphs only")
    m, n = g.num_edges, g.num_vertices
    if m > max_edges:
        raise FlowError(f"orientation scan limited to {max_edges} edges")
    if not is_connected(g) or bridges(g):
        return math.inf
    ends = g.edge_endpoints()
    real = [i for i, (u, v) in enumerate(ends) if u != v]
    if not real:
        return math.inf
    # Cuts U containing vertex 0 (complements give the reverse ratio).
    cuts = []
    for mask in range(1, 1 << (n - 1)):
        U = 1 | (mask << 1)
        if U == (1 << n) - 1:
            continue
        fwd = back = 0
        for i in real:
            u, v = ends[i]
            iu, iv = U >> u & 1, U >> v & 1
            if iu and not iv:
                fwd |= 1 << i
            elif iv and not iu:
                back |= 1 << i
        if fwd | back:
            cuts.append((fwd, back, bin(fwd | back).count("1")))
    if not cuts and n > 1:
        return math.inf
    inc: list[list[int]] = [[] for _ in range(n)]
    for i in real:
        inc[ends[i][0]].append(i)
        inc[ends[i][1]].append(i)
    # the vertex whose last incident edge is decided at step t
    closes: list[list[int]] = [[] for _ in range(m)]
    for v in range(n):
        if inc[v]:
            closes[max(inc[v])].append(v)
    best: list[Optional[Fraction]] = [None]

    def value(rev: int) -> Optional[Fraction]:
        worst = Fraction(0)
        bound = best[0]
        for fwd, back, size in cuts:
            # stored direction u->v is "out of U" for fwd edges unless reversed
            out_ = bin((fwd & ~rev) | (back & rev)).count("1")
            in_ = size - out_
            if in_ == 0 or out_ == 0:
                return None
            r = Fraction(size, min(in_, out_))
            if r > worst:
                worst = r
                if bound is not None and worst >= bound:
                    return worst
        return worst

    def rec(i: int, rev: int) -> None:
        if i == m:
            val = value(rev)
            if val is not None and (best[0] is None or val < best[0]):
                best[0] = val
            return
        choices = (0, 1) if i != real[0] else (0,)  # global reversal symmetry
        for bit in choices:
            r2 = rev | (bit << i)
            ok = True
            for v in closes[i]:
                outs = sum(1 for e in inc[v] if (ends[e][0] == v) != bool(r2 >> e & 1))
                if outs == 0 or outs == len(inc[v]):
                    ok = False
                    break
            if ok:
                rec(i + 1, r2)

    rec(0, 0)
    return math.inf if best[0] is None else best[0]


# -- lower-bound certificates ------------------------------------------------


def phi_c_lower_cert(
    g: GenGraph, q_max: int, jobs: int = 1, max_states: Optional[int] = None
) -> dict:
    """Refute (5q-1, q)-flows for q = 1..q_max: φc >= 5 among denominators <= q_max."""
    records = []
    status = "refuted"
    for q in range(1, q_max + 1):
        res = find_pq_flow(g, 5 * q - 1, q, jobs=jobs, max_states=max_states)
        records.append({"p": 5 * q - 1, "q": q, "status": res.status, "frontier": res.stats.get("frontier")})
        if res.status == "found":
            status = "flow-found"
            break
        if res.status == "incomplete":
            status = "incomplete"
    claim = f"phi_c >= 5 restricted to denominators <= {q_max}" if status == "refuted" else None
    return {"kind": "phi_c_lower", "q_max": q_max, "status": status, "claim": claim, "absences": records}


# -- structural route --------------------------------------------------------

AXIOMS = (
    "edge-capacity: the open 5-capacity of a single edge is (1,4)",
    "petersen-capacity: the open 5-capacity of the Petersen graph minus an edge uv, with terminals u and v, is (4,1)",
    "forbidden-configuration: substituting the three path edges of a flow5 configuration by such 2-poles gives phi_c >= 5",
    "expansion: expanding a vertex into a subgraph does not decrease phi_c",
)


def detect_flow5_config(
    g: GenGraph, path_edges: Optional[Sequence[tuple[int, int]]] = None
) -> Optional[tuple[int, int, int, int, int]]:
    """A tuple (u0, u1, u2, u3, v): u0u1, u1u2, u2u3 edges, v adjacent to u1 and u2.

    u1, u2 and v have degree 3; v is off the path.  u0 = u3 is allowed (the
    path then closes into a triangle, as in K4).  ``path_edges`` restricts
    the three path edges to a given set of vertex pairs.
    """
    allowed = None
    if path_edges is not None:
        allowed = {frozenset(e) for e in path_edges}

    def ok_edge(a: int, b: int) -> bool:
        return allowed is None or frozenset((a, b)) in allowed

    adj = [sorted(set(ns)) for ns in g.adjacency()]
    deg = [g.degree(v) for v in g.vertices()]
    for u1 in g.vertices():
        if deg[u1] != 3:
            continue
        for u2 in adj[u1]:
            if u2 == u1 or deg[u2] != 3 or not ok_edge(u1, u2):
                continue
            common = [v for v in adj[u1] if v in adj[u2] and v not in (u1, u2) and deg[v] == 3]
            for v in common:
                for u0 in adj[u1]:
                    if u0 in (u1, u2, v) or not ok_edge(u0, u1):
                        continue
                    for u3 in adj[u2]:
                        if u3 in (u1, u2, v) or not ok_edge(u2, u3):
                            continue
                        return (u0, u1, u2, u3, v)
    return None


def _substitute_circuit(h0: GenGraph, circuit: Sequence[tuple[int, int]]):
    g = h0
    splices = []
    for leaf, nxt in circuit:
        e = _edge_between(g, leaf, nxt)
        g, sp = two_pole_splice(g, e, first=leaf)
        splices.append(sp)
    return g, splices


def _edge_between(g: GenGraph, a: int, b: int) -> int:
    for i, (u, v) in enumerate(g.edge_endpoints()):
        if {u, v} == {a, b}:
            return i
    raise GraphError(f"no edge {a}-{b}")


def _expand_leaves(hp: GenGraph, circuit, splices):
    """Each leaf becomes s1 - y - s2: y keeps the tree edge, s1 the halves to
    Petersen vertices 2 (own 2-pole) and 5 (previous), s2 those to 6 and 4."""
    L = len(circuit)
    plans = {}
    script = []
    for i, (leaf, _) in enumerate(circuit):
        own, prev = splices[i], splices[(i - 1) % L]
        used = {own.u_halves[0], own.u_halves[1], prev.v_halves[0], prev.v_halves[1]}
        tree_half = [h for h in hp.incidence[leaf] if h not in used]
        if len(tree_half) != 1 or hp.degree(leaf) != 5:
            raise GraphError(f"leaf {leaf} does not have the expected degree-5 shape")
        gadget, hy, s1, s2 = leaf_gadget()
        bmap = {
            tree_half[0]: hy,
            own.u_halves[0]: s1[0],
            prev.v_halves[1]: s1[1],
            own.u_halves[1]: s2[0],
            prev.v_halves[0]: s2[1],
        }
        plans[leaf] = (gadget, bmap)
        script.append({"leaf": leaf, "y": "tree", "s1": ["own:2", "prev:5"], "s2": ["own:6", "prev:4"]})
    out, _, _ = expand_vertices(hp, plans)
    return out, script


def structural_phi5_certificate(spec) -> dict:
    # Normalise through the canonical text so replay sees the same vertex ids.
    tree = parse_halin(halin_str(as_halin(spec)))
    if len(tree.leaves) < 3:
        raise FlowError("a cubic Halin tree needs at least 3 leaves")
    h0, circuit = halin_graph_with_circuit(tree)
    config = detect_flow5_config(h0, circuit)
    if config is None:
        raise FlowError("no flow5 configuration on the circuit")
    hp, splices = _substitute_circuit(h0, circuit)
    expanded, script = _expand_leaves(hp, circuit, splices)
    target = treelike_snark(tree)
    iso = are_isomorphic(expanded, target)
    if not iso.isomorphic:
        raise FlowError("expansion is not isomorphic to the treelike snark; certificate refused")
    return {
        "kind": "phi_c_structural",
        "spec": halin_str(tree),
        "h0": h0.to_text(),
        "circuit": [list(e) for e in circuit],
        "flow5": list(config),
        "substitution": [{"edge": list(e), "terminal_u": e[0]} for e in circuit],
        "substituted": {"vertices": hp.num_vertices, "edges": hp.num_edges},
        "expansion": script,
        "isomorphism": list(iso.mapping),
        "axioms": list(AXIOMS),
        "claim": "phi_c >= 5",
    }


def replay_structural(cert: dict) -> tuple[bool, list[str]]:
    problems = []
    try:
        tree = as_halin(cert["spec"])
        h0, circuit = halin_graph_with_circuit(tree)
    except Exception as exc:
        return False, [f"spec: {exc}"]
    if h0.to_text() != cert.get("h0"):
        problems.append("H0 differs from the spec")
    if [list(e) for e in circuit] != cert.get("circuit"):
        problems.append("circuit differs")
    c = cert.get("flow5") or []
    if len(c) != 5:
        problems.append("flow5 tuple missing")
    else:
        u0, u1, u2, u3, v = c
        adj = [set(ns) for ns in h0.adjacency()]
        cyc = {frozenset(e) for e in circuit}
        ok = all(frozenset(p) in cyc for p in ((u0, u1), (u1, u2), (u2, u3)))
        ok = ok and v in adj[u1] and v in adj[u2] and v not in (u0, u1, u2, u3)
        ok = ok and len({u0, u1, u2}) == 3 and len({u1, u2, u3}) == 3
        ok = ok and all(h0.degree(x) == 3 for x in (u0, u1, u2, u3, v))
        if not ok:
            problems.append("flow5 tuple does not match H0")
    try:
        hp, splices = _substitute_circuit(h0, circuit)
        expanded, _ = _expand_leaves(hp, circuit, splices)
        if not check_isomorphism(expanded, treelike_snark(tree), cert.get("isomorphism", [])):
            problems.append("isomorphism check failed")
    except Exception as exc:
        problems.append(f"rebuild failed: {exc}")
    return not problems, problems

"""Perfect matchings, (1,2)-covers by four perfect matchings, and spoke patterns.

Elements of a generalised graph are its edges (indices ``0..|E|-1``) followed
by its loose half-edges (``|E| + rank``); perfect matchings and covers are
bitmasks over elements.

A pattern is a 5-tuple of label strings over ``ABCD`` (sorted, length 1 or 2),
one per spoke a1..a5.  Patterns are compared up to the 96-element group
generated by swapping a1/a2, swapping a4/a5 and permuting the labels; the
canonical form is the lexicographic minimum of the orbit.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

from .constructions import Fragment, fragments_isomorphic
from .graph import GenGraph, bits, element_of_half

LABELS = "ABCD"
Pattern = tuple[str, str, str, str, str]


class PatternError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """A search ran out of its node budget before finishing."""


# -- patterns ----------------------------------------------------------------


def _mask_to_labels(mask: int) -> str:
    return "".join(LABELS[i] for i in range(4) if mask >> i & 1)


def _labels_to_mask(s: str) -> int:
    m = 0
    for ch in s:
        if ch not in LABELS:
            raise PatternError(f"unknown label {ch!r}")
        m |= 1 << LABELS.index(ch)
    return m


def is_valid_pattern(p: Sequence[str]) -> bool:
    if len(p) != 5:
        return False
    for s in p:
        if not 1 <= len(s) <= 2 or len(set(s)) != len(s) or any(c not in LABELS for c in s):
            return False
        if "".join(sorted(s)) != s:
            return False
    return all(sum(ch in s for s in p) % 2 == 1 for ch in LABELS)


def parse_pattern(text: str) -> Pattern:
    parts = tuple("".join(sorted(tok)) for tok in text.split())
    if not is_valid_pattern(parts):
        raise PatternError(f"not a valid pattern: {text!r}")
    return parts  # type: ignore[return-value]


def format_pattern(p: Pattern) -> str:
    return " ".join(p)


@lru_cache(maxsize=None)
def symmetry_group() -> tuple[tuple[tuple[int, ...], str], ...]:
    """All 96 (spoke permutation, label permutation) pairs."""
    out = []
    for swap_first in (False, True):
        for swap_last in (False, True):
            order = [1, 0] if swap_first else [0, 1]
            order += [2]
            order += [4, 3] if swap_last else [3, 4]
            for perm in itertools.permutations(LABELS):
                out.append((tuple(order), "".join(perm)))
    return tuple(out)


def apply_symmetry(p: Sequence[str], order: Sequence[int], perm: str) -> Pattern:
    table = {LABELS[i]: perm[i] for i in range(4)}
    return tuple("".join(sorted(table[c] for c in p[j])) for j in order)  # type: ignore[return-value]


def orbit(p: Pattern) -> set[Pattern]:
    return {apply_symmetry(p, order, perm) for order, perm in symmetry_group()}


@lru_cache(maxsize=None)
def canonicalize(p: Pattern) -> Pattern:
    if not is_valid_pattern(p):
        raise PatternError(f"not a valid pattern: {p!r}")
    return min(orbit(p))


@lru_cache(maxsize=None)
def all_patterns() -> tuple[Pattern, ...]:
    subsets = sorted(_mask_to_labels(m) for m in range(1, 16) if bin(m).count("1") <= 2)
    return tuple(p for p in itertools.product(subsets, repeat=5) if is_valid_pattern(p))


@lru_cache(maxsize=None)
def candidate_orbits() -> tuple[Pattern, ...]:
    seen: set[Pattern] = set()
    reps = []
    for p in all_patterns():
        if p not in seen:
            orb = orbit(p)
            seen |= orb
            reps.append(min(orb))
    return tuple(sorted(reps))


# -- perfect matchings -------------------------------------------------------


def enumerate_perfect_matchings(g: GenGraph, limit: Optional[int] = None) -> list[int]:
    """All perfect matchings as element bitmasks, by backtracking over vertices in id order."""
    eoh = element_of_half(g)
    n = g.num_vertices
    used = [False] * n
    out: list[int] = []
    inc = g.incidence
    partner = g.partner
    owner = g.owner

    def rec(v: int, mask: int) -> None:
        while v < n and used[v]:
            v += 1
        if v == n:
            out.append(mask)
            if limit is not None and len(out) > limit:
                raise BudgetExceeded(f"more than {limit} perfect matchings")
            return
        used[v] = True
        for h in inc[v]:
            p = partner[h]
            if p is None:
                rec(v + 1, mask | 1 << eoh[h])
            else:
                w = owner[p]
                if not used[w]:
                    used[w] = True
                    rec(v + 1, mask | 1 << eoh[h])
                    used[w] = False
        used[v] = False

    rec(0, 0)
    return out


def vertex_elements(g: GenGraph) -> list[list[int]]:
    eoh = element_of_half(g)
    return [[eoh[h] for h in g.incidence[v]] for v in g.vertices()]


def is_perfect_matching(g: GenGraph, mask: int) -> bool:
    return all(sum(mask >> e & 1 for e in els) == 1 for els in vertex_elements(g))


def multiplicities(g: GenGraph, matchings: Sequence[int]) -> list[int]:
    total = g.num_edges + len(g.loose())
    return [sum(m >> e & 1 for m in matchings) for e in range(total)]


def is_cover(g: GenGraph, matchings: Sequence[int], max_mult: Optional[int] = None) -> bool:
    """Every element lies in some matching (and in at most ``max_mult`` of them)."""
    if not all(is_perfect_matching(g, m) for m in matchings):
        return False
    mult = multiplicities(g, matchings)
    if min(mult, default=1) < 1:
        return False
    return max_mult is None or max(mult, default=0) <= max_mult


@dataclass
class CoverWitness:
    """Ordered 4-tuple of perfect matchings (labels A, B, C, D) forming a (1,2)-cover."""

    matchings: tuple[int, int, int, int]

    def multiplicity(self, g: GenGraph) -> list[int]:
        return multiplicities(g, self.matchings)

    def is_valid(self, g: GenGraph) -> bool:
        return len(self.matchings) == 4 and is_cover(g, self.matchings, max_mult=2)


def pattern_of(cover: CoverWitness, fragment: Fragment) -> Pattern:
    g = fragment.graph
    if not cover.is_valid(g):
        raise PatternError("not a (1,2)-cover of the fragment by 4 perfect matchings")
    eoh = element_of_half(g)
    p = tuple(
        "".join(LABELS[i] for i, m in enumerate(cover.matchings) if m >> eoh[h] & 1)
        for h in fragment.spokes
    )
    return p  # type: ignore[return-value]


# -- cover search by label propagation ---------------------------------------

# A cover by four perfect matchings gives each element the set of matchings
# containing it; at a cubic vertex the three sets partition {A,B,C,D}.  The
# search assigns these sets directly.  Domains are 16-bit masks over label
# sets 1..15 (only sizes 1 and 2 ever occur).

_LABEL_SETS = [m for m in range(1, 16) if bin(m).count("1") <= 2]
_FULL_DOMAIN = sum(1 << m for m in _LABEL_SETS)


@lru_cache(maxsize=None)
def _support(d2: int, d3: int) -> int:
    """Values x admitting y in d2 and z in d3 with x, y, z partitioning ABCD."""
    out = 0
    for x in _LABEL_SETS:
        for y in _LABEL_SETS:
            if x & y:
                continue
            z = 15 & ~(x | y)
            if z and d2 >> y & 1 and d3 >> z & 1:
                out |= 1 << x
                break
    return out


class CoverSearch:
    """Constraint search for (1,2)-covers of a cubic generalised graph by 4 perfect matchings."""

    def __init__(self, g: GenGraph) -> None:
        if not g.is_cubic():
            raise PatternError("cover search needs a cubic generalised graph")
        self.g = g
        self.vel = vertex_elements(g)
        self.size = g.num_edges + len(g.loose())
        self.elem_vertices: list[list[int]] = [[] for _ in range(self.size)]
        for v, els in enumerate(self.vel):
            for e in els:
                self.elem_vertices[e].append(v)
        self.nodes = 0

    def _propagate(self, dom: list[int], queue: list[int]) -> bool:
        vel = self.vel
        ev = self.elem_vertices
        pending = set(queue)
        while queue:
            v = queue.pop()
            pending.discard(v)
            a, b, c = vel[v]
            da, db, dc = dom[a], dom[b], dom[c]
            na = da & _support(db, dc)
            nb = db & _support(da, dc)
            nc = dc & _support(da, db)
            for e, old, new in ((a, da, na), (b, db, nb), (c, dc, nc)):
                if new != old:
                    if not new:
                        return False
                    dom[e] = new
                    for w in ev[e]:
                        if w != v and w not in pending:
                            pending.add(w)
                            queue.append(w)
        return True

    def solve(self, fixed: dict[int, int], max_nodes: Optional[int] = None) -> Optional[list[int]]:
        """Label sets per element extending ``fixed`` (element -> label mask), or None."""
        dom = [_FULL_DOMAIN] * self.size
        for e, m in fixed.items():
            dom[e] &= 1 << m
        if any(d == 0 for d in dom):
            return None
        if not self._propagate(dom, list(range(self.g.num_vertices))):
            return None
        self.nodes = 0
        return self._dfs(dom, max_nodes)

    def _dfs(self, dom: list[int], max_nodes: Optional[int]) -> Optional[list[int]]:
        self.nodes += 1
        if max_nodes is not None and self.nodes > max_nodes:
            raise BudgetExceeded(f"cover search exceeded {max_nodes} nodes")
        best, best_size = -1, 99
        for e, d in enumerate(dom):
            if d & (d - 1):
                k = bin(d).count("1")
                if k < best_size:
                    best, best_size = e, k
                    if k == 2:
                        break
        if best < 0:
            return [d.bit_length() - 1 for d in dom]
        d = dom[best]
        while d:
            low = d & -d
            d ^= low
            trial = list(dom)
            trial[best] = low
            if self._propagate(trial, list(self.elem_vertices[best])):
                found = self._dfs(trial, max_nodes)
                if found is not None:
                    return found
        return None

    @staticmethod
    def to_matchings(labels: Sequence[int]) -> tuple[int, int, int, int]:
        ms = [0, 0, 0, 0]
        for e, m in enumerate(labels):
            for i in range(4):
                if m >> i & 1:
                    ms[i] |= 1 << e
        return tuple(ms)  # type: ignore[return-value]


def _spoke_fixing(fragment: Fragment, p: Sequence[str]) -> dict[int, int]:
    eoh = element_of_half(fragment.graph)
    return {eoh[h]: _labels_to_mask(s) for h, s in zip(fragment.spokes, p)}


_SWAPS = ((1, 0, 2, 3, 4), (0, 1, 2, 4, 3), (1, 0, 2, 4, 3))


def spoke_swap_automorphisms(fragment: Fragment) -> tuple[tuple[int, ...], ...]:
    """Which of the spoke swaps a1/a2, a4/a5 and both extend to automorphisms."""
    return tuple(o for o in _SWAPS if fragments_isomorphic(fragment, fragment, o).isomorphic)


def find_cover_with_pattern(
    fragment: Fragment,
    p: Pattern,
    up_to_symmetry: bool = True,
    max_nodes: Optional[int] = None,
    search: Optional[CoverSearch] = None,
    automorphic: Optional[Sequence[tuple[int, ...]]] = None,
) -> Optional[CoverWitness]:
    """A (1,2)-cover realising ``p`` (or, if allowed, one of its spoke-swapped images).

    Swaps listed in ``automorphic`` are known fragment automorphisms and
    need no separate search.
    """
    if not is_valid_pattern(p):
        raise PatternError(f"not a valid pattern: {p!r}")
    search = search or CoverSearch(fragment.graph)
    images = [tuple(p)]
    if up_to_symmetry:
        skip = set(automorphic or ())
        for order in _SWAPS:
            q = tuple(p[j] for j in order)
            if order not in skip and q not in images:
                images.append(q)
    for q in images:
        labels = search.solve(_spoke_fixing(fragment, q), max_nodes)
        if labels is not None:
            return CoverWitness(CoverSearch.to_matchings(labels))
    return None


# -- pattern sets ------------------------------------------------------------


@dataclass
class PatternSet:
    fragment: str
    patterns: tuple[Pattern, ...]
    complete: bool = True
    stats: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.patterns = tuple(sorted({canonicalize(p) for p in self.patterns}))

    def __len__(self) -> int:
        return len(self.patterns)

    def __contains__(self, p) -> bool:
        return canonicalize(tuple(p)) in set(self.patterns)

    def as_set(self) -> frozenset:
        return frozenset(self.patterns)

    def to_text(self) -> str:
        head = f"# fragment={self.fragment} count={len(self.patterns)}"
        if not self.complete:
            head += " status=incomplete"
        return "\n".join([head] + [format_pattern(p) for p in self.patterns]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PatternSet":
        fragment, patterns, complete = "", [], True
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    if key == "fragment":
                        fragment = val
                    elif key == "status":
                        complete = val != "incomplete"
                continue
            patterns.append(parse_pattern(line))
        return cls(fragment, tuple(patterns), complete)


def _check_orbits(args) -> list[tuple[Pattern, Optional[bool]]]:
    frag, reps, max_nodes, autos = args
    search = CoverSearch(frag.graph)
    out: list[tuple[Pattern, Optional[bool]]] = []
    for rep in reps:
        try:
            ok = find_cover_with_pattern(frag, rep, True, max_nodes, search, autos) is not None
            out.append((rep, ok))
        except BudgetExceeded:
            out.append((rep, None))
    return out


def _map(fn, payload: list, jobs: int) -> list:
    if jobs > 1 and len(payload) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, payload))
    return [fn(a) for a in payload]


def pattern_set(
    fragment: Fragment,
    name: str = "",
    jobs: int = 1,
    method: str = "labels",
    max_nodes: Optional[int] = None,
    max_matchings: Optional[int] = None,
) -> PatternSet:
    """Canonical patterns of all (1,2)-covers of ``fragment`` by 4 perfect matchings.

    ``method="labels"`` decides every candidate orbit by an exhaustive
    extension search from its spoke assignment (work split by candidate).
    ``method="matchings"`` enumerates 4-tuples of precomputed perfect
    matchings (work split by first-matching index); it is exact but only
    practical up to a few hundred matchings.  Either way the merged result
    does not depend on ``jobs``.  When a budget runs out the set comes back
    with ``complete=False``.
    """
    if method == "matchings":
        return _pattern_set_by_matchings(fragment, name, jobs, max_matchings)
    if method != "labels":
        raise ValueError(f"unknown method {method!r}")
    reps = list(candidate_orbits())
    jobs = max(1, jobs)
    autos = spoke_swap_automorphisms(fragment)
    chunks = [reps[i::jobs] for i in range(jobs)]
    payload = [(fragment, chunk, max_nodes, autos) for chunk in chunks if chunk]
    found, unknown = [], []
    for chunk in _map(_check_orbits, payload, jobs):
        for rep, ok in chunk:
            if ok is None:
                unknown.append(rep)
            elif ok:
                found.append(rep)
    stats = {"method": "labels", "candidates": len(reps), "undecided": len(unknown)}
    return PatternSet(name, tuple(found), complete=not unknown, stats=stats)


def _tuples_from(args) -> tuple[set, int]:
    """Covers whose first matching (in branching order) has an index in ``firsts``."""
    fragment, pms, firsts = args
    g = fragment.graph
    size = g.num_edges + len(g.loose())
    full = (1 << size) - 1
    every = (1 << len(pms)) - 1
    containing = [0] * size
    for i, m in enumerate(pms):
        for e in bits(m):
            containing[e] |= 1 << i
    eoh = element_of_half(g)
    spoke_elems = [eoh[h] for h in fragment.spokes]
    found: set[Pattern] = set()
    covers = 0

    def lowest(mask: int) -> int:
        return (mask & -mask).bit_length() - 1

    # Some member covers element 0, the next covers the lowest element still
    # uncovered, and so on; a member through an element already covered
    # twice is pruned, and the last one is looked up by intersection.
    for a in firsts:
        A = pms[a]
        for b in bits(containing[lowest(full & ~A)]):
            B = pms[b]
            banned = 0
            for e in bits(A & B):
                banned |= containing[e]
            uncovered = full & ~(A | B)
            c_pool = containing[lowest(uncovered)] if uncovered else every
            for c in bits(c_pool & ~banned):
                C = pms[c]
                cand = every
                for e in bits(uncovered & ~C):
                    cand &= containing[e]
                    if not cand:
                        break
                for e in bits((A & C) | (B & C)):
                    cand &= ~containing[e]
                for d in bits(cand):
                    D = pms[d]
                    covers += 1
                    p = tuple(
                        "".join(LABELS[i] for i, m in enumerate((A, B, C, D)) if m >> e & 1)
                        for e in spoke_elems
                    )
                    found.add(canonicalize(p))
    return found, covers


def _pattern_set_by_matchings(
    fragment: Fragment, name: str, jobs: int, max_matchings: Optional[int]
) -> PatternSet:
    try:
        pms = enumerate_perfect_matchings(fragment.graph, limit=max_matchings)
    except BudgetExceeded:
        return PatternSet(name, (), complete=False, stats={"method": "matchings"})
    jobs = max(1, jobs)
    size = fragment.graph.num_edges + len(fragment.graph.loose())
    firsts = [i for i, m in enumerate(pms) if m & 1] if size else []
    chunks = [firsts[i::jobs] for i in range(jobs)]
    payload = [(fragment, pms, chunk) for chunk in chunks if chunk]
    found: set[Pattern] = set()
    covers = 0
    for part, n in _map(_tuples_from, payload, jobs):
        found |= part
        covers += n
    stats = {"method": "matchings", "matchings": len(pms), "ordered_covers": covers}
    return PatternSet(name, tuple(found), stats=stats)


def pattern_set_subset(s1: PatternSet, s2: PatternSet, strict: bool = False) -> bool:
    a, b = s1.as_set(), s2.as_set()
    return a < b if strict else a <= b


def pattern_set_equal(s1: PatternSet, s2: PatternSet) -> bool:
    return s1.as_set() == s2.as_set()


def raw_patterns(fragment: Fragment, ps: PatternSet) -> set[Pattern]:
    """Expand a canonical set to every group image (the raw label-level set)."""
    out: set[Pattern] = set()
    for p in ps.patterns:
        out |= orbit(p)
    return out


def excessive_cover_search(g: GenGraph, max_nodes: Optional[int] = None) -> Optional[CoverWitness]:
    """Cover of a closed cubic graph by 4 perfect matchings via label propagation."""
    search = CoverSearch(g)
    if search.size == 0:
        return CoverWitness((0, 0, 0, 0))
    for first in (0b0011, 0b0001):
        labels = search.solve({0: first}, max_nodes)
        if labels is not None:
            return CoverWitness(CoverSearch.to_matchings(labels))
    return None

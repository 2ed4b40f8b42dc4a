"""Weighted homomorphism sums and constrained homomorphism search.

Three independent routes compute the same quantity:

* :func:`weighted_hom_sum` contracts sparse factors exactly,
* :func:`search_hom_sum` enumerates homomorphisms by backtracking,
* :func:`brute_force_hom_sum` enumerates every vertex map.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterator, Mapping, Sequence

from .contraction import DEFAULT_TERM_CAP, contract
from .errors import ConstraintError, ResourceLimitError
from .graphs import Graph, WeightedGraph

DEFAULT_BRUTE_CAP = 10**8


@dataclass(frozen=True)
class Cover:
    """Exactly one neighbour of ``v`` maps to each element of ``U - {sink}``;
    every other neighbour of ``v`` maps to ``sink``."""

    v: int
    U: frozenset
    sink: int

    def __post_init__(self):
        object.__setattr__(self, "U", frozenset(self.U))

    @property
    def required(self) -> frozenset:
        return self.U - {self.sink}


@dataclass(frozen=True)
class ConstraintSet:
    anchors: tuple[tuple[int, int], ...] = ()
    domains: Mapping[int, frozenset] | None = None
    covers: tuple[Cover, ...] = ()

    def __post_init__(self):
        anchors = self.anchors.items() if isinstance(self.anchors, Mapping) else self.anchors
        object.__setattr__(self, "anchors", tuple((int(p), int(t)) for p, t in anchors))
        if self.domains is not None:
            object.__setattr__(self, "domains", {int(p): frozenset(d) for p, d in self.domains.items()})
        object.__setattr__(self, "covers", tuple(self.covers))

    @classmethod
    def anchored(cls, **kwargs) -> "ConstraintSet":
        return cls(**kwargs)

    def anchor_map(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for p, t in self.anchors:
            if p in out and out[p] != t:
                raise ConstraintError(f"pattern vertex {p} anchored twice")
            out[p] = t
        return out

    def validate(self, h: Graph, n_target: int) -> None:
        anchors = self.anchor_map()
        for p, t in anchors.items():
            if not (0 <= p < h.n and 0 <= t < n_target):
                raise ConstraintError(f"anchor {p}->{t} out of range")
            if self.domains is not None and p in self.domains and t not in self.domains[p]:
                raise ConstraintError(f"anchor {p}->{t} violates its domain")
        for p, dom in (self.domains or {}).items():
            if not 0 <= p < h.n:
                raise ConstraintError(f"domain for pattern vertex {p} out of range")
            if any(not 0 <= t < n_target for t in dom):
                raise ConstraintError(f"domain for pattern vertex {p} has targets out of range")
        for c in self.covers:
            if not 0 <= c.v < h.n:
                raise ConstraintError(f"cover centre {c.v} out of range")
            if c.sink not in c.U:
                raise ConstraintError("cover sink must belong to U")
            if any(not 0 <= t < n_target for t in c.U):
                raise ConstraintError("cover set has targets out of range")
            if h.degree(c.v) < len(c.U) - 1:
                raise ConstraintError(f"deg({c.v}) = {h.degree(c.v)} < |U| - 1 = {len(c.U) - 1}")

    def loose_covers(self, h: Graph) -> list[Cover]:
        """Covers whose centre degree differs from ``|U|``.

        For these the constraint is the multiplicity condition rather than a
        bijection of the neighbourhood onto ``U``.
        """
        return [c for c in self.covers if h.degree(c.v) != len(c.U)]

    def to_json(self) -> dict:
        return {
            "anchors": [list(a) for a in self.anchors],
            "domains": None if self.domains is None else {str(p): sorted(d) for p, d in sorted(self.domains.items())},
            "covers": [{"v": c.v, "U": sorted(c.U), "sink": c.sink} for c in self.covers],
        }


NO_CONSTRAINTS = ConstraintSet()


@dataclass(frozen=True)
class HomWitness:
    mapping: tuple[int, ...]
    weight: Fraction | None = None


def hom_weight(h: Graph, g: WeightedGraph, mapping: Sequence[int]) -> Fraction:
    """Product of image vertex weights and image edge weights."""
    w = Fraction(1)
    for t in mapping:
        w *= g.vertex_weights[t]
    for u, v in h.edges:
        w *= g.w(mapping[u], mapping[v])
    return w


def violations(h: Graph, g: Graph, c: ConstraintSet, mapping: Sequence[int]) -> list[str]:
    """Everything wrong with ``mapping`` as a constrained homomorphism."""
    out = []
    if len(mapping) != h.n:
        return [f"mapping has {len(mapping)} entries, pattern has {h.n} vertices"]
    if any(not 0 <= t < g.n for t in mapping):
        return ["image out of range"]
    for u, v in h.edges:
        if not g.has_edge(mapping[u], mapping[v]):
            out.append(f"edge {u}-{v} maps to non-edge {mapping[u]}-{mapping[v]}")
    for p, t in c.anchors:
        if mapping[p] != t:
            out.append(f"anchor {p}->{t} violated")
    for p, dom in (c.domains or {}).items():
        if mapping[p] not in dom:
            out.append(f"vertex {p} maps to {mapping[p]} outside its domain")
    for cov in c.covers:
        images = [mapping[x] for x in h.adj[cov.v]]
        for z in cov.required:
            if images.count(z) != 1:
                out.append(f"cover at {cov.v}: {images.count(z)} neighbours map to {z}")
        for t in images:
            if t not in cov.U:
                out.append(f"cover at {cov.v}: a neighbour maps to {t} outside U")
    return out


def _target_parts(g):
    if isinstance(g, WeightedGraph):
        adj = [frozenset(d) for d in g.weighted_adj]
        return g.n, adj, g
    return g.n, list(g.adj), None


def _initial_domains(h: Graph, n: int, c: ConstraintSet, vertex_weights=None) -> list[set]:
    alive = set(range(n)) if vertex_weights is None else {t for t in range(n) if vertex_weights[t]}
    doms = [set(alive) for _ in range(h.n)]
    for p, d in (c.domains or {}).items():
        doms[p] &= d
    for p, t in c.anchor_map().items():
        doms[p] &= {t}
    for cov in c.covers:
        for x in h.adj[cov.v]:
            doms[x] &= cov.U
    return doms


# ------------------------------------------------------------ contraction


def _cover_table(h: Graph, cov: Cover, doms: list[set]) -> tuple[tuple[int, ...], dict]:
    members = tuple(sorted(h.adj[cov.v]))
    required = cov.required
    table = {}

    def rec(i, key, used):
        if i == len(members):
            if len(used) == len(required):
                table[key] = Fraction(1)
            return
        left = len(members) - i
        if left < len(required) - len(used):
            return
        for t in sorted(doms[members[i]]):
            if t in required:
                if t in used:
                    continue
                rec(i + 1, key + (t,), used | {t})
            elif t == cov.sink:
                rec(i + 1, key + (t,), used)

    rec(0, (), frozenset())
    return members, table


def weighted_hom_sum(h: Graph, g: WeightedGraph, c: ConstraintSet = NO_CONSTRAINTS,
                     term_cap: int = DEFAULT_TERM_CAP) -> Fraction:
    """Exact sum of homomorphism weights over constraint-satisfying maps."""
    c.validate(h, g.n)
    if h.n == 0:
        return Fraction(1)
    doms = _initial_domains(h, g.n, c, g.vertex_weights)
    if any(not d for d in doms):
        return Fraction(0)
    factors = []
    for p in range(h.n):
        factors.append(((p,), {(t,): g.vertex_weights[t] for t in doms[p]}))
    wadj = g.weighted_adj
    for u, v in h.edges:
        table = {}
        dv = doms[v]
        for a in doms[u]:
            for b, w in wadj[a].items():
                if b in dv:
                    table[(a, b)] = w
        factors.append(((u, v), table))
    for cov in c.covers:
        factors.append(_cover_table(h, cov, doms))
    return contract(factors, [len(d) for d in doms], term_cap)


# ------------------------------------------------------------------ search


class _Search:
    """Backtracking with forward checking and cover propagation.

    Domains are bitmasks over target vertices. The next vertex is the
    unassigned one with the fewest candidates, ties broken by BFS rank from
    the anchored vertices.
    """

    def __init__(self, h: Graph, g, c: ConstraintSet, max_nodes: int | None = None):
        c.validate(h, g.n)
        self.h = h
        n, adj, weighted = _target_parts(g)
        self.adj_mask = [sum(1 << b for b in nb) for nb in adj]
        vw = weighted.vertex_weights if weighted is not None else None
        self.doms0 = [sum(1 << t for t in d) for d in _initial_domains(h, n, c, vw)]
        self.covers = [(tuple(sorted(h.adj[cov.v])), sum(1 << z for z in cov.required), len(cov.required))
                       for cov in c.covers]
        self.member_of = [[] for _ in range(h.n)]
        for i, (members, _, _) in enumerate(self.covers):
            for x in members:
                self.member_of[x].append(i)
        self.rank = _bfs_rank(h, [p for p, _ in c.anchors])
        self.max_nodes = max_nodes
        self.nodes = 0

    def _propagate_covers(self, dom, assigned, which) -> bool:
        for i in which:
            members, req_mask, _ = self.covers[i]
            used = 0
            free = []
            for x in members:
                if assigned[x] >= 0:
                    bit = 1 << assigned[x]
                    if bit & req_mask:
                        if used & bit:
                            return False
                        used |= bit
                else:
                    free.append(x)
            missing = req_mask & ~used
            n_missing = missing.bit_count()
            if len(free) < n_missing:
                return False
            union = 0
            for x in free:
                d = dom[x] & ~used
                if len(free) == n_missing:
                    d &= missing
                if not d:
                    return False
                dom[x] = d
                union |= d
            if union & missing != missing:
                return False
        return True

    def solutions(self) -> Iterator[tuple[int, ...]]:
        h = self.h
        if any(d == 0 for d in self.doms0):
            return
        dom = list(self.doms0)
        assigned = [-1] * h.n
        if not self._propagate_covers(dom, assigned, range(len(self.covers))):
            return
        yield from self._rec(dom, assigned, h.n)

    def _rec(self, dom, assigned, left):
        if left == 0:
            yield tuple(assigned)
            return
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise ResourceLimitError(f"search exceeded {self.max_nodes} nodes")
        best = None
        for p in range(self.h.n):
            if assigned[p] < 0:
                key = (dom[p].bit_count(), self.rank[p])
                if best is None or key < best[0]:
                    best = (key, p)
        p = best[1]
        mask = dom[p]
        nbrs = self.h.adj[p]
        while mask:
            low = mask & -mask
            t = low.bit_length() - 1
            mask ^= low
            new = list(dom)
            new[p] = low
            ok = True
            am = self.adj_mask[t]
            for q in nbrs:
                if assigned[q] < 0:
                    new[q] &= am
                    if not new[q]:
                        ok = False
                        break
                elif not (am >> assigned[q]) & 1:
                    ok = False
                    break
            if not ok:
                continue
            assigned[p] = t
            if self._propagate_covers(new, assigned, self.member_of[p]):
                yield from self._rec(new, assigned, left - 1)
            assigned[p] = -1


def _bfs_rank(h: Graph, roots: Sequence[int]) -> list[int]:
    rank = [-1] * h.n
    order = []
    frontier = list(dict.fromkeys(roots))
    for r in frontier:
        rank[r] = len(order)
        order.append(r)
    i = 0
    for start in list(range(h.n)):
        if rank[start] < 0 and i >= len(order):
            rank[start] = len(order)
            order.append(start)
        while i < len(order):
            u = order[i]
            i += 1
            for v in sorted(h.adj[u]):
                if rank[v] < 0:
                    rank[v] = len(order)
                    order.append(v)
    return rank


def iter_homs(h: Graph, g, c: ConstraintSet = NO_CONSTRAINTS, max_nodes: int | None = None
              ) -> Iterator[tuple[int, ...]]:
    """All constraint-satisfying homomorphisms, in a deterministic order."""
    return _Search(h, g, c, max_nodes).solutions()


def find_hom(h: Graph, g, c: ConstraintSet = NO_CONSTRAINTS, max_nodes: int | None = None
             ) -> HomWitness | None:
    """Some constraint-satisfying homomorphism, or ``None`` if there is none.

    With a :class:`WeightedGraph` target, zero-weight vertices and edges
    count as absent and the witness carries its weight.
    """
    for mapping in iter_homs(h, g, c, max_nodes):
        weight = hom_weight(h, g, mapping) if isinstance(g, WeightedGraph) else None
        return HomWitness(mapping, weight)
    return None


def search_hom_sum(h: Graph, g: WeightedGraph, c: ConstraintSet = NO_CONSTRAINTS,
                   max_nodes: int | None = None) -> Fraction:
    return sum((hom_weight(h, g, m) for m in iter_homs(h, g, c, max_nodes)), Fraction(0))


def brute_force_hom_sum(h: Graph, g: WeightedGraph, c: ConstraintSet = NO_CONSTRAINTS,
                        cap: int = DEFAULT_BRUTE_CAP) -> Fraction:
    """Reference implementation: try every map ``V(H) -> V(G)``."""
    c.validate(h, g.n)
    if g.n ** h.n > cap:
        raise ResourceLimitError(f"{g.n}^{h.n} maps exceed the brute-force cap {cap}")
    total = Fraction(0)
    for mapping in product(range(g.n), repeat=h.n):
        if violations(h, g.graph, c, mapping):
            continue
        total += hom_weight(h, g, mapping)
    return total

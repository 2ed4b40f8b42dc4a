"""Refutation criteria: criterion matrices, PSD witnesses, the
distance-preserving homomorphism test."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ConstraintError
from .graphs import Graph, WeightedGraph, distances_from, degree_classes, TRANSITIVE
from .homs import ConstraintSet, Cover, HomWitness, find_hom, weighted_hom_sum
from .linalg import is_symmetric, negative_direction, quadratic_form
from .rational import format_fraction

ORDERED = "ordered"
PAIRS = "pairs"


@dataclass(frozen=True)
class CriterionMatrix:
    """A symmetric rational matrix with row/column labels.

    ``convention`` is ``"pairs"`` when each unordered pair of distinct
    edges ``v0v1, v0v2`` is counted once (the quadratic form of the
    perturbation) and ``"ordered"`` when ordered triples ``(v0, v1, v2)``
    with ``v1 != v2`` are summed (twice the former).
    """

    labels: tuple
    entries: tuple[tuple[Fraction, ...], ...]
    convention: str = ORDERED
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        entries = tuple(tuple(Fraction(x) for x in row) for row in self.entries)
        if len(entries) != len(self.labels) or not is_symmetric(entries):
            raise ValueError("criterion matrix must be symmetric and match its labels")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "labels", tuple(self.labels))

    def as_lists(self) -> list[list[Fraction]]:
        return [list(row) for row in self.entries]

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "convention": self.convention,
                "entries": [[format_fraction(x) for x in row] for row in self.entries]}


@dataclass(frozen=True)
class PsdVerdict:
    psd: bool
    witness: tuple[Fraction, ...] | None = None
    value: Fraction | None = None


def psd_witness(m) -> PsdVerdict:
    """Decide positive semidefiniteness exactly.

    On failure the verdict carries an integer vector ``a`` together with
    the exact, strictly negative value of ``a^T m a``.
    """
    entries = m.entries if isinstance(m, CriterionMatrix) else [[Fraction(x) for x in row] for row in m]
    if not is_symmetric(entries):
        raise ValueError("psd_witness needs a symmetric matrix")
    if len(entries) > 64:
        raise ValueError("matrices above dimension 64 are not supported")
    a = negative_direction(entries)
    if a is None:
        return PsdVerdict(True)
    value = quadratic_form(entries, a)
    assert value < 0
    return PsdVerdict(False, tuple(a), value)


def _two_paths(h: Graph):
    for v0 in range(h.n):
        nb = sorted(h.adj[v0])
        for v1 in nb:
            for v2 in nb:
                if v1 != v2:
                    yield v0, v1, v2


def _scale(convention: str) -> Fraction:
    if convention == ORDERED:
        return Fraction(1)
    if convention == PAIRS:
        return Fraction(1, 2)
    raise ValueError(f"unknown convention {convention!r}")


def _anchored_matrix(h: Graph, g: WeightedGraph, d, covers_for, convention: str, term_cap=None):
    scale = _scale(convention)
    k = d.k
    m = [[Fraction(0)] * k for _ in range(k)]
    kw = {} if term_cap is None else {"term_cap": term_cap}
    for v0, v1, v2 in _two_paths(h):
        for i in range(k):
            for j in range(i, k):
                c = ConstraintSet(anchors=((v0, d.u0), (v1, d.us[i]), (v2, d.us[j])),
                                  covers=covers_for(v1, i) + covers_for(v2, j))
                m[i][j] += weighted_hom_sum(h, g, c, **kw)
    for i in range(k):
        for j in range(i, k):
            m[i][j] *= scale
            m[j][i] = m[i][j]
    return m


def thm1_matrix(h: Graph, g: WeightedGraph, d, convention: str = PAIRS, term_cap=None) -> CriterionMatrix:
    """Anchored homomorphism sums over 2-edge paths ``v1 v0 v2`` of ``h``.

    Entry ``(i, j)`` sums the weights of homomorphisms sending
    ``(v0, v1, v2)`` to ``(u0, u_i, u_j)``.
    """
    d.validate(g.graph)
    if d.k != 2:
        raise ConstraintError("thm1_matrix takes exactly two vertices u1, u2")
    m = _anchored_matrix(h, g, d, lambda v, i: (), convention, term_cap)
    return CriterionMatrix(tuple(d.us), tuple(tuple(r) for r in m), convention)


def thm2_matrix(h: Graph, g: WeightedGraph, d, convention: str = PAIRS, term_cap=None) -> CriterionMatrix:
    """As :func:`thm1_matrix`, also requiring the neighbours of ``v1``
    (resp. ``v2``) to cover ``U_i`` (resp. ``U_j``) with the remainder
    sent to ``u0``."""
    if d.Us is None:
        raise ConstraintError("thm2_matrix needs the sets U_i")
    d.validate(g.graph, independent=True)
    loose = set()

    def covers_for(v, i):
        U = d.Us[i]
        if h.degree(v) < len(U) - 1:
            return (None,)
        if h.degree(v) != len(U):
            loose.add((v, d.us[i]))
        return (Cover(v, U, d.u0),)

    k = d.k
    scale = _scale(convention)
    m = [[Fraction(0)] * k for _ in range(k)]
    kw = {} if term_cap is None else {"term_cap": term_cap}
    for v0, v1, v2 in _two_paths(h):
        for i in range(k):
            for j in range(i, k):
                covers = covers_for(v1, i) + covers_for(v2, j)
                if None in covers:
                    continue
                c = ConstraintSet(anchors=((v0, d.u0), (v1, d.us[i]), (v2, d.us[j])), covers=covers)
                m[i][j] += weighted_hom_sum(h, g, c, **kw)
    for i in range(k):
        for j in range(i, k):
            m[i][j] *= scale
            m[j][i] = m[i][j]
    notes = ()
    if loose:
        notes = (f"multiplicity reading used for {len(loose)} (pattern vertex, u_i) pairs with deg(v) != |U_i|",)
    return CriterionMatrix(tuple(d.us), tuple(tuple(r) for r in m), convention, notes)


def degree_matrix(h: Graph) -> CriterionMatrix:
    """Counts of ordered 2-edge paths ``v1 v0 v2`` by the degrees of their ends."""
    degrees, _ = degree_classes(h)
    pos = {d: i for i, d in enumerate(degrees)}
    m = [[0] * len(degrees) for _ in degrees]
    for _, v1, v2 in _two_paths(h):
        m[pos[h.degree(v1)]][pos[h.degree(v2)]] += 1
    return CriterionMatrix(tuple(degrees), tuple(tuple(r) for r in m), ORDERED)


# ---------------------------------------------------------------- Lemma 5


@dataclass(frozen=True)
class PairResult:
    v1: int
    v2: int
    witness: HomWitness | None
    nodes: int = 0


@dataclass(frozen=True)
class Lemma5Report:
    u0: int
    u1: int
    u2: int
    pairs: tuple[PairResult, ...] = field(default_factory=tuple)

    @property
    def refuted(self) -> bool:
        return all(p.witness is None for p in self.pairs)


def verify_vertex_transitive(g: Graph, max_vertices: int = 16) -> bool:
    """Brute-force check that vertex 0 can be moved to every vertex by an
    automorphism. Only attempted for graphs with at most ``max_vertices``."""
    import networkx as nx
    from networkx.algorithms.isomorphism import GraphMatcher

    if g.n > max_vertices:
        raise ValueError(f"transitivity check limited to {max_vertices} vertices")
    if g.n == 0:
        return True
    base = nx.Graph()
    base.add_nodes_from(range(g.n))
    base.add_edges_from(g.edges)
    for v in range(g.n):
        g1, g2 = base.copy(), base.copy()
        nx.set_node_attributes(g1, {x: x == 0 for x in range(g.n)}, "mark")
        nx.set_node_attributes(g2, {x: x == v for x in range(g.n)}, "mark")
        if not GraphMatcher(g1, g2, node_match=lambda a, b: a["mark"] == b["mark"]).is_isomorphic():
            return False
    return True


def lemma5_constraints(h: Graph, u0: int, u1: int, u2: int, v1: int, v2: int, dist=None) -> ConstraintSet:
    dist = distances_from(h, u0) if dist is None else dist
    forbidden = {u0, u1, u2}
    spheres: dict = {}
    for x in range(h.n):
        spheres.setdefault(dist[x], set()).add(x)
    domains = {}
    for v in range(h.n):
        dom = set(spheres[dist[v]])
        if v not in (u0, v1, v2):
            dom -= forbidden
        domains[v] = frozenset(dom)
    N1 = h.adj[u1]
    return ConstraintSet(anchors=((u0, u0), (v1, u1), (v2, u1)), domains=domains,
                         covers=(Cover(v1, N1, u0), Cover(v2, N1, u0)))


def lemma5_violations(h: Graph, u0, u1, u2, v1, v2, mapping) -> list[str]:
    """Check a map against the three conditions directly, without going
    through a constraint set."""
    out = []
    if len(mapping) != h.n:
        return ["mapping has the wrong length"]
    for a, b in h.edges:
        if not h.has_edge(mapping[a], mapping[b]):
            out.append(f"edge {a}-{b} not preserved")
    if (mapping[u0], mapping[v1], mapping[v2]) != (u0, u1, u1):
        out.append("distinguished vertices not sent to (u0, u1, u1)")
    target = sorted(h.adj[u1])
    for v in (v1, v2):
        if sorted(mapping[x] for x in h.adj[v]) != target:
            out.append(f"neighbours of {v} are not mapped one-to-one onto N({u1})")
    dist = distances_from(h, u0)
    for v in range(h.n):
        if dist[mapping[v]] != dist[v]:
            out.append(f"distance of {v} from u0 not preserved")
    for v in range(h.n):
        if v not in (u0, v1, v2) and mapping[v] in (u0, u1, u2):
            out.append(f"vertex {v} maps onto a distinguished vertex")
    return out


def lemma5_check(h: Graph, u0: int, u1: int, u2: int, *, verify_transitivity: bool = False,
                 max_nodes: int | None = None) -> Lemma5Report:
    """Search, for every unordered pair of distinct neighbours of ``u0``, for
    a homomorphism satisfying the three distance-preserving conditions.

    The verdict refutes the step Sidorenko property when no pair admits one.
    Vertex-transitivity must be established by a generator tag or, for
    small graphs, by ``verify_transitivity=True``.
    """
    if TRANSITIVE not in h.tags:
        if not (verify_transitivity and h.n <= 16 and verify_vertex_transitive(h)):
            raise ConstraintError("vertex-transitivity of the pattern is not established")
    if len({u0, u1, u2}) != 3 or not (h.has_edge(u0, u1) and h.has_edge(u0, u2)):
        raise ConstraintError("need distinct u0, u1, u2 with u0u1 and u0u2 edges")
    dist = distances_from(h, u0)
    results = []
    nbrs = sorted(h.adj[u0])
    from .homs import _Search

    for a_i, v1 in enumerate(nbrs):
        for v2 in nbrs[a_i + 1:]:
            c = lemma5_constraints(h, u0, u1, u2, v1, v2, dist)
            search = _Search(h, h, c, max_nodes)
            mapping = next(search.solutions(), None)
            witness = None
            if mapping is not None:
                assert not lemma5_violations(h, u0, u1, u2, v1, v2, mapping)
                witness = HomWitness(mapping)
            results.append(PairResult(v1, v2, witness, search.nodes))
    return Lemma5Report(u0, u1, u2, tuple(results))

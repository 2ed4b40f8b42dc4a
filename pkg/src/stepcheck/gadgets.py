"""Weighted target graphs and perturbations used by the refutation proofs."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import factorial
from typing import Sequence

from .errors import ConstraintError
from .graphs import DistinguishedVertices, Graph, WeightedGraph, _norm_edge, distances_from
from .graphon import Coarsening, StepGraphon, from_weighted_graph
from .linalg import solve
from .rational import exact_root, to_fraction


def build_cor4_gadget(degrees: Sequence[int], eps) -> tuple[WeightedGraph, DistinguishedVertices]:
    """Complete bipartite gadget for the degree criterion.

    Vertex ids: ``u0 = 0``, ``u1..uk = 1..k``, ``u_{k+1} = k + 1``, then the
    sets ``U_1, ..., U_k`` of sizes ``d_i - 1``. The weights of ``u_i`` and of
    the vertices in ``U_i`` involve ``eps ** (1/|U_i|)``, which must be rational.
    """
    degrees = [int(d) for d in degrees]
    eps = to_fraction(eps)
    if not degrees:
        raise ValueError("need at least one degree")
    if any(d <= 1 for d in degrees):
        raise ValueError("degree classes of degree <= 1 have no gadget (|U_i| = 0)")
    if not 0 < eps < 1:
        raise ValueError("eps must lie strictly between 0 and 1")
    k = len(degrees)
    sizes = [d - 1 for d in degrees]
    u0, top = 0, k + 1
    us = list(range(1, k + 1))
    Us, nxt = [], k + 2
    for s in sizes:
        Us.append(list(range(nxt, nxt + s)))
        nxt += s
    left = us + [top]
    right = [u0] + [x for U in Us for x in U]
    vw = [Fraction(0)] * nxt
    vw[u0] = vw[top] = Fraction(1)
    for u, U, s in zip(us, Us, sizes):
        root = exact_root(eps, s)
        vw[u] = root
        for x in U:
            vw[x] = root / factorial(s - 1)
    graph = Graph.from_edges(nxt, [(a, b) for a in left for b in right])
    g = WeightedGraph.unit(graph)
    g = WeightedGraph(graph, tuple(vw), g.edge_weights)
    d = DistinguishedVertices(u0, tuple(us), tuple(frozenset(U) | {u0} for U in Us))
    return g, d


def build_lemma5_gadget(h: Graph, u0: int, u1: int, u2: int, gamma) -> WeightedGraph:
    """``h`` with vertex weights ``gamma ** dist(u0, v)``, lowered by one power
    at ``u0, u1, u2``; all edge weights one."""
    gamma = to_fraction(gamma)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if not (h.has_edge(u0, u1) and h.has_edge(u0, u2)):
        raise ConstraintError("u0u1 and u0u2 must be edges")
    if not h.is_connected():
        raise ConstraintError("the pattern must be connected")
    dist = distances_from(h, u0)
    special = {u0, u1, u2}
    vw = [gamma ** (dist[v] - 1) if v in special else gamma ** dist[v] for v in range(h.n)]
    return WeightedGraph(h, tuple(vw), (Fraction(1),) * h.size)


def vertex_coarsening(fine: WeightedGraph, merge: Sequence[int], coarse: WeightedGraph | None = None) -> Coarsening:
    """Lift a vertex merge map (fine vertex -> coarse vertex) to graphon parts.

    Zero-weight vertices carry no part and are skipped.
    """
    fine_parts = [v for v in range(fine.n) if fine.vertex_weights[v]]
    if coarse is None:
        coarse_parts = sorted({merge[v] for v in fine_parts})
    else:
        coarse_parts = [v for v in range(coarse.n) if coarse.vertex_weights[v]]
    index = {v: i for i, v in enumerate(coarse_parts)}
    return Coarsening(tuple(index[merge[v]] for v in fine_parts))


def kernel_graphon(g: WeightedGraph) -> StepGraphon:
    """W_G without the ``[0, 1]`` range check on edge weights."""
    top = max(g.edge_weights, default=Fraction(0))
    if top <= 1:
        return from_weighted_graph(g)[0]
    w, _ = from_weighted_graph(g.scaled(edge_factor=1 / top))
    return StepGraphon(w.measures, tuple(tuple(x * top for x in row) for row in w.blocks), kernel=True)


def build_thm1_perturbation(g: WeightedGraph, d: DistinguishedVertices, a: Sequence, alpha
                            ) -> tuple[WeightedGraph, Coarsening]:
    """2-blow-up of ``u0`` with the edges to ``u_i`` tilted by ``1 +- alpha a_i``.

    ``u0+`` keeps the id of ``u0``; ``u0-`` is appended as vertex ``n``.
    """
    d.validate(g.graph)
    if d.k != 2 or len(a) != 2:
        raise ConstraintError("the two-vertex perturbation needs u1, u2 and a pair a")
    a = [to_fraction(x) for x in a]
    alpha = to_fraction(alpha)
    n = g.n
    plus, minus = d.u0, n
    edges = dict(zip(g.graph.edges, g.edge_weights))
    for x in g.graph.adj[d.u0]:
        edges[_norm_edge(minus, x)] = edges[_norm_edge(d.u0, x)]
    for ai, u in zip(a, d.us):
        base = g.w(d.u0, u)
        edges[_norm_edge(plus, u)] = base * (1 + alpha * ai)
        edges[_norm_edge(minus, u)] = base * (1 - alpha * ai)
    if any(w < 0 for w in edges.values()):
        raise ValueError("perturbation makes an edge weight negative")
    vw = list(g.vertex_weights) + [g.vertex_weights[d.u0] / 2]
    vw[plus] = g.vertex_weights[d.u0] / 2
    out = WeightedGraph.from_maps(Graph.from_edges(n + 1, edges), vw, edges)
    merge = list(range(n)) + [d.u0]
    return out, vertex_coarsening(out, merge, g)


def vandermonde_b(n: int) -> list[Fraction]:
    """Solution of ``B b = e_2`` for ``B_ij = 2 ** ((i-1)(j-1))``, ``n >= 2``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    B = [[Fraction(2) ** (i * j) for j in range(n)] for i in range(n)]
    rhs = [Fraction(int(i == 1)) for i in range(n)]
    try:
        return solve(B, rhs)
    except ValueError as exc:  # B is a nonsingular Vandermonde matrix
        raise RuntimeError("Vandermonde solve failed") from exc


@dataclass(frozen=True)
class Thm2Perturbation:
    """The blown-up graph, ids of its clones and both coarsenings."""

    graph: WeightedGraph
    u0_clones: tuple[int, int, int]
    indexed: dict
    merge_pm: Coarsening
    merge_all: Coarsening
    b: tuple[Fraction, ...]


def build_thm2_perturbation(g: WeightedGraph, d: DistinguishedVertices, a: Sequence, eps, alpha, n: int
                            ) -> Thm2Perturbation:
    """The graph G_{eps,alpha}: a 3-blow-up of ``u0`` and an
    ``(n**(|U_i|-1) + 1)``-blow-up of each ``u_i``.

    ``u0'`` and ``u_i'`` keep the original ids; ``u0+`` and ``u0-`` follow
    as ``g.n`` and ``g.n + 1``; indexed clones ``u_{i,j}`` come next in
    lexicographic order of ``(i, j)``. ``merge_pm`` merges ``u0+`` with
    ``u0-``; ``merge_all`` maps every clone back to its original vertex.
    """
    if d.Us is None:
        raise ConstraintError("the perturbation needs the sets U_i")
    d.validate(g.graph, independent=True)
    a = [to_fraction(x) for x in a]
    if len(a) != d.k:
        raise ConstraintError("need one coefficient a_i per u_i")
    eps, alpha = to_fraction(eps), to_fraction(alpha)
    if not 0 < eps < 1:
        raise ValueError("eps must lie strictly between 0 and 1")
    b = vandermonde_b(n)
    N = g.n
    u0 = d.u0
    plus, minus = N, N + 1
    nxt = N + 2
    w = g.vertex_weights
    vw = list(w) + [eps * w[u0], eps * w[u0]]
    vw[u0] = (1 - 2 * eps) * w[u0]
    edges = dict(zip(g.graph.edges, g.edge_weights))
    for x in g.graph.adj[u0]:
        for c in (plus, minus):
            edges[_norm_edge(c, x)] = g.w(u0, x)
    merge = list(range(N)) + [u0, u0]
    indexed = {}
    for i, (ui, Ui) in enumerate(zip(d.us, d.Us)):
        zs = sorted(Ui - {u0})
        count = n ** len(zs)
        vw[ui] = (1 - count * eps) * w[ui]
        base = g.w(u0, ui)
        for js in product(range(1, n + 1), repeat=len(zs)):
            c = nxt
            nxt += 1
            indexed[(i, js)] = c
            vw.append(eps * w[ui])
            merge.append(ui)
            coef = Fraction(1)
            for j in js:
                coef *= b[j - 1]
            edges[_norm_edge(plus, c)] = base * (1 + a[i] * alpha * coef)
            edges[_norm_edge(minus, c)] = base * (1 - a[i] * alpha * coef)
            for z, j in zip(zs, js):
                edges[_norm_edge(c, z)] = Fraction(2) ** (j - 1) * g.w(ui, z)
    if any(x < 0 for x in vw) or any(x < 0 for x in edges.values()):
        raise ValueError("parameters make a weight negative; decrease eps or alpha")
    out = WeightedGraph.from_maps(Graph.from_edges(nxt, edges), vw, edges)
    pm = list(range(nxt))
    pm[minus] = plus
    return Thm2Perturbation(out, (u0, plus, minus), indexed, vertex_coarsening(out, pm),
                            vertex_coarsening(out, merge, g), tuple(b))

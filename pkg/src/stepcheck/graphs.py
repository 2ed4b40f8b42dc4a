"""Graphs, weighted graphs, standard generators and metric helpers."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product as cartesian_tuples
from typing import Iterable, Mapping, Sequence

from .rational import format_fraction, to_fraction

Edge = tuple[int, int]

TRANSITIVE = "known_vertex_transitive"
BIPARTITE = "known_bipartite"


def _norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """A simple loopless graph on vertices ``0..n-1``.

    ``tags`` holds provenance flags that only generators set. When
    ``known_bipartite`` is present, ``coloring`` is a proper 2-coloring.
    """

    n: int
    edges: tuple[Edge, ...]
    tags: frozenset = frozenset()
    coloring: tuple[int, ...] | None = None
    labels: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be nonnegative")
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            e = _norm_edge(u, v)
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
        object.__setattr__(self, "edges", tuple(sorted(seen)))
        object.__setattr__(self, "tags", frozenset(self.tags))
        if BIPARTITE in self.tags:
            if self.coloring is None or not is_proper_coloring(self, self.coloring):
                raise ValueError("known_bipartite requires a proper 2-coloring")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], **kwargs) -> "Graph":
        return cls(n, tuple(_norm_edge(int(u), int(v)) for u, v in edges), **kwargs)

    @cached_property
    def adj(self) -> tuple[frozenset, ...]:
        nbrs = [set() for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(frozenset(s) for s in nbrs)

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edges)}

    @property
    def size(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def with_tags(self, *tags: str, coloring=None) -> "Graph":
        return Graph(self.n, self.edges, self.tags | set(tags),
                     coloring if coloring is not None else self.coloring, self.labels)

    def without_tags(self) -> "Graph":
        return Graph(self.n, self.edges)

    def is_vertex_transitive(self) -> bool:
        return TRANSITIVE in self.tags

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        return all(d != math.inf for d in distances_from(self, 0))


def is_proper_coloring(g: Graph, coloring: Sequence[int]) -> bool:
    if len(coloring) != g.n or any(c not in (0, 1) for c in coloring):
        return False
    return all(coloring[u] != coloring[v] for u, v in g.edges)


def two_coloring(g: Graph) -> tuple[int, ...] | None:
    """BFS 2-coloring, or ``None`` when ``g`` has an odd cycle."""
    color = [-1] * g.n
    for s in range(g.n):
        if color[s] >= 0:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in g.adj[u]:
                if color[v] < 0:
                    color[v] = 1 - color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    return None
    return tuple(color)


def odd_cycle(g: Graph) -> list[int] | None:
    """Return the vertices of some odd closed walk's cycle, or ``None``."""
    parent = [-1] * g.n
    depth = [-1] * g.n
    for s in range(g.n):
        if depth[s] >= 0:
            continue
        depth[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in sorted(g.adj[u]):
                if depth[v] < 0:
                    depth[v] = depth[u] + 1
                    parent[v] = u
                    queue.append(v)
                elif depth[v] == depth[u]:
                    left, right = [u], [v]
                    while left[-1] != right[-1]:
                        left.append(parent[left[-1]])
                        right.append(parent[right[-1]])
                    return left + right[-2::-1]
    return None


@dataclass(frozen=True)
class WeightedGraph:
    """A graph with nonnegative rational vertex and edge weights.

    ``edge_weights`` is parallel to ``graph.edges``.
    """

    graph: Graph
    vertex_weights: tuple[Fraction, ...]
    edge_weights: tuple[Fraction, ...]

    def __post_init__(self):
        vw = tuple(to_fraction(x) for x in self.vertex_weights)
        ew = tuple(to_fraction(x) for x in self.edge_weights)
        if len(vw) != self.graph.n:
            raise ValueError("vertex_weights must have one entry per vertex")
        if len(ew) != self.graph.size:
            raise ValueError("edge_weights must have one entry per edge")
        if any(x < 0 for x in vw) or any(x < 0 for x in ew):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "vertex_weights", vw)
        object.__setattr__(self, "edge_weights", ew)

    @classmethod
    def unit(cls, graph: Graph) -> "WeightedGraph":
        return cls(graph, (Fraction(1),) * graph.n, (Fraction(1),) * graph.size)

    @classmethod
    def from_maps(cls, graph: Graph, vertex_weights: Sequence, edge_weights: Mapping[Edge, object] | None = None,
                  default_edge=1) -> "WeightedGraph":
        edge_weights = {_norm_edge(*e): w for e, w in (edge_weights or {}).items()}
        unknown = set(edge_weights) - set(graph.edges)
        if unknown:
            raise ValueError(f"weights given for non-edges {sorted(unknown)}")
        return cls(graph, tuple(vertex_weights), tuple(edge_weights.get(e, default_edge) for e in graph.edges))

    @property
    def n(self) -> int:
        return self.graph.n

    def w(self, u: int, v: int) -> Fraction:
        """Weight of edge ``uv`` (zero for non-edges)."""
        i = self.graph.edge_index.get(_norm_edge(u, v))
        return Fraction(0) if i is None else self.edge_weights[i]

    @cached_property
    def weighted_adj(self) -> tuple[dict, ...]:
        """Per-vertex map neighbor -> weight, positive-weight edges only."""
        out = [dict() for _ in range(self.n)]
        for (u, v), x in zip(self.graph.edges, self.edge_weights):
            if x:
                out[u][v] = x
                out[v][u] = x
        return tuple(out)

    def total_vertex_weight(self) -> Fraction:
        return sum(self.vertex_weights, Fraction(0))

    def scaled(self, vertex_factor=1, edge_factor=1) -> "WeightedGraph":
        vf, ef = to_fraction(vertex_factor), to_fraction(edge_factor)
        return WeightedGraph(self.graph, tuple(x * vf for x in self.vertex_weights),
                             tuple(x * ef for x in self.edge_weights))


@dataclass(frozen=True)
class DistinguishedVertices:
    """``u0`` adjacent to each of ``us``; optional neighbour sets ``Us``."""

    u0: int
    us: tuple[int, ...]
    Us: tuple[frozenset, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "us", tuple(self.us))
        if self.Us is not None:
            object.__setattr__(self, "Us", tuple(frozenset(U) for U in self.Us))
            if len(self.Us) != len(self.us):
                raise ValueError("need exactly one set U_i per u_i")

    @property
    def k(self) -> int:
        return len(self.us)

    def validate(self, g: Graph, *, independent: bool = False) -> None:
        """Raise ``ValueError`` unless these vertices fit ``g`` as required."""
        allv = (self.u0, *self.us)
        if any(not 0 <= x < g.n for x in allv):
            raise ValueError("distinguished vertex out of range")
        if len(set(allv)) != len(allv):
            raise ValueError("distinguished vertices must be pairwise distinct")
        for u in self.us:
            if not g.has_edge(self.u0, u):
                raise ValueError(f"u0={self.u0} is not adjacent to u={u}")
        if independent:
            for i, u in enumerate(self.us):
                for v in self.us[i + 1:]:
                    if g.has_edge(u, v):
                        raise ValueError(f"u_i vertices {u} and {v} are adjacent")
        if self.Us is not None:
            for u, U in zip(self.us, self.Us):
                if self.u0 not in U:
                    raise ValueError("each U_i must contain u0")
                if not U <= g.adj[u]:
                    raise ValueError(f"U for u={u} is not a subset of its neighbourhood")

    def to_json(self) -> dict:
        out = {"u0": self.u0, "us": list(self.us)}
        if self.Us is not None:
            out["Us"] = [sorted(U) for U in self.Us]
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "DistinguishedVertices":
        Us = data.get("Us")
        return cls(int(data["u0"]), tuple(int(x) for x in data["us"]),
                   None if Us is None else tuple(frozenset(int(x) for x in U) for U in Us))


# ---------------------------------------------------------------- generators


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    tags = {TRANSITIVE}
    coloring = None
    if n % 2 == 0:
        tags.add(BIPARTITE)
        coloring = tuple(i % 2 for i in range(n))
    return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)), tags=frozenset(tags), coloring=coloring)


def path(n: int) -> Graph:
    """Path on ``n`` vertices (``path(2)`` is K2)."""
    if n < 1:
        raise ValueError("path needs n >= 1")
    tags = {BIPARTITE}
    if n <= 2:
        tags.add(TRANSITIVE)
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)), tags=frozenset(tags),
                            coloring=tuple(i % 2 for i in range(n)))


def complete_bipartite(a: int, b: int) -> Graph:
    if a < 1 or b < 1:
        raise ValueError("complete_bipartite needs a, b >= 1")
    tags = {BIPARTITE}
    if a == b:
        tags.add(TRANSITIVE)
    return Graph.from_edges(a + b, ((i, a + j) for i in range(a) for j in range(b)), tags=frozenset(tags),
                            coloring=(0,) * a + (1,) * b)


def c4_plus() -> Graph:
    """C4 on vertices 0..3 with a pendant vertex 4 attached to vertex 0."""
    return Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4)], tags=frozenset({BIPARTITE}),
                            coloring=(0, 1, 0, 1, 1))


def cartesian_product(g1: Graph, g2: Graph) -> Graph:
    """Cartesian product; vertex ``(a, b)`` gets id ``a * |V(g2)| + b``."""
    if g1.n == 0 or g2.n == 0:
        raise ValueError("cartesian product of an empty graph")
    m = g2.n
    edges = [(a * m + u, a * m + v) for a in range(g1.n) for u, v in g2.edges]
    edges += [(u * m + b, v * m + b) for u, v in g1.edges for b in range(m)]
    tags = set()
    coloring = None
    if TRANSITIVE in g1.tags and TRANSITIVE in g2.tags:
        tags.add(TRANSITIVE)
    if BIPARTITE in g1.tags and BIPARTITE in g2.tags:
        tags.add(BIPARTITE)
        coloring = tuple((g1.coloring[a] + g2.coloring[b]) % 2 for a in range(g1.n) for b in range(m))
    return Graph.from_edges(g1.n * m, edges, tags=frozenset(tags), coloring=coloring,
                            labels=_product_labels(g1, g2))


def _product_labels(g1: Graph, g2: Graph) -> tuple:
    def parts(g):
        if g.labels is None:
            return [(i,) for i in range(g.n)]
        return [lab if isinstance(lab, tuple) else (lab,) for lab in g.labels]

    return tuple(a + b for a, b in cartesian_tuples(parts(g1), parts(g2)))


def cartesian(graphs: Sequence[Graph]) -> Graph:
    if not graphs:
        raise ValueError("cartesian product of no graphs")
    out = graphs[0]
    for g in graphs[1:]:
        out = cartesian_product(out, g)
    return out


def hypercube(d: int) -> Graph:
    if d < 1:
        raise ValueError("hypercube needs d >= 1")
    return cartesian([path(2)] * d).with_tags(TRANSITIVE)


def torus(*lengths: int) -> Graph:
    """Toroidal grid C_l1 x ... x C_lk with row-major mixed-radix numbering."""
    if not lengths or any(l < 3 for l in lengths):
        raise ValueError("torus needs one or more cycle lengths >= 3")
    return cartesian([cycle(l) for l in lengths])


_GENERATORS = {
    "cycle": (cycle, 1, 1),
    "path": (path, 1, 1),
    "complete_bipartite": (complete_bipartite, 2, 2),
    "k": (complete_bipartite, 2, 2),
    "hypercube": (hypercube, 1, 1),
    "c4_plus": (lambda: c4_plus(), 0, 0),
    "torus": (torus, 1, None),
}


def generate(spec) -> Graph:
    """Build a graph from a generator descriptor.

    Strings look like ``"cycle:6"``, ``"torus:6,4"``, ``"c4_plus"``,
    ``"complete_bipartite:2,3"`` or ``"path:2*path:3"`` (``*`` takes the
    Cartesian product). A sequence ``("cartesian", [spec, ...])`` and
    ``(name, arg, ...)`` tuples are accepted too.
    """
    if isinstance(spec, str):
        text = spec.strip()
        if "*" in text:
            return cartesian([generate(part) for part in text.split("*")])
        name, _, rest = text.partition(":")
        args = tuple(int(x) for x in rest.split(",") if x.strip()) if rest else ()
        return _call_generator(name.strip().lower(), args)
    if isinstance(spec, Sequence) and spec:
        name = str(spec[0]).lower()
        if name == "cartesian":
            return cartesian([generate(s) for s in spec[1]])
        return _call_generator(name, tuple(int(x) for x in spec[1:]))
    raise ValueError(f"unrecognised generator descriptor {spec!r}")


def _call_generator(name: str, args: tuple[int, ...]) -> Graph:
    try:
        fn, lo, hi = _GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown generator {name!r}") from None
    if len(args) < lo or (hi is not None and len(args) > hi):
        raise ValueError(f"generator {name!r} takes {lo}..{hi if hi is not None else 'many'} arguments")
    return fn(*args)


# ------------------------------------------------------------------ metrics


def distances_from(g: Graph, v: int) -> list:
    """BFS distances from ``v``; unreachable vertices get ``math.inf``."""
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    dist: list = [math.inf] * g.n
    dist[v] = 0
    queue = deque([v])
    while queue:
        u = queue.popleft()
        for x in g.adj[u]:
            if dist[x] == math.inf:
                dist[x] = dist[u] + 1
                queue.append(x)
    return dist


def degree_classes(g: Graph) -> tuple[list[int], list[list[int]]]:
    """Distinct degrees in increasing order and the vertices of each degree."""
    by_degree: dict[int, list[int]] = {}
    for v in range(g.n):
        by_degree.setdefault(g.degree(v), []).append(v)
    degrees = sorted(by_degree)
    return degrees, [by_degree[d] for d in degrees]


def blow_up(g: WeightedGraph, v: int, k: int, clone_weights: Sequence | None = None
            ) -> tuple[WeightedGraph, list[int]]:
    """Replace ``v`` by ``k`` independent clones sharing its neighbourhood.

    The first clone keeps id ``v``; the others are appended as
    ``n, n+1, ...``. Returns the new weighted graph and the clone ids.
    """
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    if k < 1:
        raise ValueError("k must be positive")
    if clone_weights is None:
        clone_weights = [g.vertex_weights[v] / k] * k
    clone_weights = [to_fraction(x) for x in clone_weights]
    if len(clone_weights) != k:
        raise ValueError("need one weight per clone")
    if any(x < 0 for x in clone_weights):
        raise ValueError("clone weights must be nonnegative")
    n = g.n
    clones = [v] + list(range(n, n + k - 1))
    edges = dict(zip(g.graph.edges, g.edge_weights))
    for x in g.graph.adj[v]:
        w = edges[_norm_edge(v, x)]
        for c in clones[1:]:
            edges[_norm_edge(c, x)] = w
    vw = list(g.vertex_weights) + [Fraction(0)] * (k - 1)
    for c, w in zip(clones, clone_weights):
        vw[c] = w
    graph = Graph.from_edges(n + k - 1, edges)
    return WeightedGraph.from_maps(graph, vw, edges), clones


def induced_relabel(g: WeightedGraph, keep: Sequence[int]) -> WeightedGraph:
    """Subgraph induced by ``keep`` with vertices renumbered in that order."""
    index = {v: i for i, v in enumerate(keep)}
    edges = {}
    for (u, v), w in zip(g.graph.edges, g.edge_weights):
        if u in index and v in index:
            edges[_norm_edge(index[u], index[v])] = w
    graph = Graph.from_edges(len(keep), edges)
    return WeightedGraph.from_maps(graph, [g.vertex_weights[v] for v in keep], edges)


# --------------------------------------------------------------------- JSON


def graph_to_json(g: Graph) -> dict:
    tags = {t: True for t in sorted(g.tags)}
    if g.coloring is not None and BIPARTITE in g.tags:
        tags["coloring"] = list(g.coloring)
    return {"n": g.n, "edges": [list(e) for e in g.edges], "tags": tags}


def graph_from_json(data: Mapping) -> Graph:
    try:
        n = int(data["n"])
        edges = [tuple(int(x) for x in e) for e in data["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed graph JSON: {exc}") from exc
    tags_in = dict(data.get("tags") or {})
    coloring = tags_in.pop("coloring", None)
    tags = frozenset(t for t, on in tags_in.items() if on)
    if any(len(e) != 2 for e in edges):
        raise ValueError("malformed graph JSON: edges must be pairs")
    if BIPARTITE in tags and coloring is None:
        coloring = two_coloring(Graph.from_edges(n, edges))
    return Graph.from_edges(n, edges, tags=tags, coloring=tuple(coloring) if coloring is not None else None)


def weighted_to_json(g: WeightedGraph) -> dict:
    out = graph_to_json(g.graph)
    out["vertex_weights"] = [format_fraction(x) for x in g.vertex_weights]
    out["edge_weights"] = [format_fraction(x) for x in g.edge_weights]
    return out


def weighted_from_json(data: Mapping) -> WeightedGraph:
    """Parse a weighted graph; missing weight arrays default to all ones."""
    g = graph_from_json(data)
    n_edges_in = len(data["edges"])
    vw = data.get("vertex_weights", ["1"] * g.n)
    ew = data.get("edge_weights", ["1"] * n_edges_in)
    if len(ew) != n_edges_in:
        raise ValueError("edge_weights must be parallel to edges")
    by_edge = {_norm_edge(int(u), int(v)): to_fraction(w) for (u, v), w in zip(data["edges"], ew)}
    return WeightedGraph.from_maps(g, [to_fraction(x) for x in vw], by_edge)

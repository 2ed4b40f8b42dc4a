"""Step graphons: exact densities, the stepping operator, W_G."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

from .contraction import DEFAULT_TERM_CAP, contract
from .errors import ResourceLimitError
from .graphs import Graph, WeightedGraph, path
from .rational import format_fraction, to_fraction


@dataclass(frozen=True)
class StepGraphon:
    """Part measures summing to one and a symmetric block-value matrix.

    Blocks must lie in ``[0, 1]`` unless ``kernel=True``, which allows any
    rational values (a bounded symmetric kernel).
    """

    measures: tuple[Fraction, ...]
    blocks: tuple[tuple[Fraction, ...], ...]
    kernel: bool = False

    def __post_init__(self):
        measures = tuple(to_fraction(x) for x in self.measures)
        blocks = tuple(tuple(to_fraction(x) for x in row) for row in self.blocks)
        k = len(measures)
        if k == 0:
            raise ValueError("a step graphon needs at least one part")
        if any(x <= 0 for x in measures):
            raise ValueError("part measures must be positive")
        if sum(measures) != 1:
            raise ValueError(f"part measures sum to {format_fraction(sum(measures))}, not 1")
        if len(blocks) != k or any(len(row) != k for row in blocks):
            raise ValueError("block matrix must be square with one row per part")
        for i in range(k):
            for j in range(i):
                if blocks[i][j] != blocks[j][i]:
                    raise ValueError(f"block matrix not symmetric at ({i}, {j})")
        if not self.kernel and any(not 0 <= x <= 1 for row in blocks for x in row):
            raise ValueError("block values must lie in [0, 1] (use kernel=True for general kernels)")
        object.__setattr__(self, "measures", measures)
        object.__setattr__(self, "blocks", blocks)

    @property
    def parts(self) -> int:
        return len(self.measures)

    @classmethod
    def constant(cls, p) -> "StepGraphon":
        return cls((Fraction(1),), ((to_fraction(p),),))

    def to_json(self) -> dict:
        return {"measures": [format_fraction(x) for x in self.measures],
                "blocks": [[format_fraction(x) for x in row] for row in self.blocks]}

    @classmethod
    def from_json(cls, data: Mapping, kernel: bool = False) -> "StepGraphon":
        try:
            return cls(tuple(data["measures"]), tuple(tuple(r) for r in data["blocks"]), kernel=kernel)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed graphon JSON: {exc}") from exc


@dataclass(frozen=True)
class Coarsening:
    """Surjective map from fine part indices to coarse part indices."""

    map: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(x) for x in self.map)
        if not m:
            raise ValueError("empty coarsening")
        if min(m) < 0 or set(m) != set(range(max(m) + 1)):
            raise ValueError("coarsening must be surjective onto 0..k-1")
        object.__setattr__(self, "map", m)

    @property
    def coarse_parts(self) -> int:
        return max(self.map) + 1

    @classmethod
    def identity(cls, n: int) -> "Coarsening":
        return cls(tuple(range(n)))

    def then(self, other: "Coarsening") -> "Coarsening":
        """Apply ``self`` and then ``other``."""
        if len(other.map) != self.coarse_parts:
            raise ValueError("coarsenings do not compose")
        return Coarsening(tuple(other.map[c] for c in self.map))

    def to_json(self) -> dict:
        return {"map": list(self.map)}

    @classmethod
    def from_json(cls, data: Mapping) -> "Coarsening":
        try:
            return cls(tuple(data["map"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed coarsening JSON: {exc}") from exc


def density(h: Graph, w: StepGraphon, method: str = "contract", term_cap: int = DEFAULT_TERM_CAP) -> Fraction:
    """Exact homomorphism density of ``h`` in the step graphon ``w``.

    ``method="enumerate"`` sums over all ``parts**|V(h)|`` maps directly;
    ``"contract"`` eliminates one pattern vertex at a time.
    """
    if h.n == 0:
        raise ValueError("density of the empty graph")
    k = w.parts
    if method == "enumerate":
        if k ** h.n > term_cap:
            raise ResourceLimitError(f"{k}^{h.n} terms exceed the cap {term_cap}")
        total = Fraction(0)
        for phi in product(range(k), repeat=h.n):
            term = Fraction(1)
            for p in phi:
                term *= w.measures[p]
            for u, v in h.edges:
                term *= w.blocks[phi[u]][phi[v]]
                if not term:
                    break
            total += term
        return total
    if method != "contract":
        raise ValueError(f"unknown density method {method!r}")
    factors = [((p,), {(i,): w.measures[i] for i in range(k)}) for p in range(h.n)]
    table = {(i, j): w.blocks[i][j] for i in range(k) for j in range(k) if w.blocks[i][j]}
    factors += [((u, v), table) for u, v in h.edges]
    return contract(factors, [k] * h.n, term_cap)


def step(w: StepGraphon, c: Coarsening) -> StepGraphon:
    """Block-wise average of ``w`` over the coarse parts of ``c``."""
    if len(c.map) != w.parts:
        raise ValueError(f"coarsening has {len(c.map)} entries, graphon has {w.parts} parts")
    k = c.coarse_parts
    measures = [Fraction(0)] * k
    for q, P in enumerate(c.map):
        measures[P] += w.measures[q]
    mass = [[Fraction(0)] * k for _ in range(k)]
    for q, P in enumerate(c.map):
        for r, R in enumerate(c.map):
            mass[P][R] += w.measures[q] * w.measures[r] * w.blocks[q][r]
    blocks = tuple(tuple(mass[P][R] / (measures[P] * measures[R]) for R in range(k)) for P in range(k))
    return StepGraphon(tuple(measures), blocks, kernel=w.kernel)


def from_weighted_graph(g: WeightedGraph) -> tuple[StepGraphon, list[int | None]]:
    """The graphon W_G of a weighted graph and the vertex -> part map.

    Zero-weight vertices are dropped (their part map entry is ``None``).
    """
    if any(x > 1 for x in g.edge_weights):
        raise ValueError("edge weights above 1 do not define a graphon")
    total = g.total_vertex_weight()
    if total <= 0:
        raise ValueError("total vertex weight must be positive")
    kept = [v for v in range(g.n) if g.vertex_weights[v]]
    part = [None] * g.n
    for i, v in enumerate(kept):
        part[v] = i
    measures = tuple(g.vertex_weights[v] / total for v in kept)
    blocks = tuple(tuple(g.w(u, v) for v in kept) for u in kept)
    return StepGraphon(measures, blocks), part


def step_sidorenko_gap(h: Graph, w: StepGraphon, c: Coarsening, **kw) -> Fraction:
    """``t(h, w) - t(h, w^P)``; negative values witness a violation."""
    return density(h, w, **kw) - density(h, step(w, c), **kw)


def sidorenko_gap(h: Graph, w: StepGraphon, **kw) -> Fraction:
    """``t(h, w) - t(K2, w)**|E(h)|``."""
    if not h.edges:
        raise ValueError("the Sidorenko gap needs a pattern with at least one edge")
    return density(h, w, **kw) - density(path(2), w, **kw) ** h.size


def example_c4_plus_graphon() -> tuple[StepGraphon, Coarsening]:
    """The C4+ counterexample: three parts of measure 1/5, 1/5, 3/5, stepped
    by merging the first two parts."""
    f = Fraction
    measures = (f(1, 5), f(1, 5), f(3, 5))
    blocks = (
        (f(9, 10), f(17, 20), f(1, 5)),
        (f(17, 20), f(1), f(0)),
        (f(1, 5), f(0), f(0)),
    )
    return StepGraphon(measures, blocks), Coarsening((0, 0, 1))

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from stepcheck.contraction import contract
from stepcheck.errors import ConstraintError, ResourceLimitError
from stepcheck.graphs import Graph, WeightedGraph, blow_up, cycle, path, torus
from stepcheck.homs import (ConstraintSet, Cover, brute_force_hom_sum, find_hom, iter_homs, search_hom_sum,
                            violations, weighted_hom_sum)
from stepcheck.criteria import lemma5_constraints
from helpers import oracle_hom_sum, random_constraints, random_graph, random_weighted


def unit(g):
    return WeightedGraph.unit(g)


def test_k2_into_k2():
    assert weighted_hom_sum(path(2), unit(path(2))) == 2


def test_star_anchored_in_c4():
    c = ConstraintSet(anchors=((1, 0),))
    for fn in (weighted_hom_sum, search_hom_sum, brute_force_hom_sum):
        assert fn(path(3), unit(cycle(4)), c) == 4


def test_zero_weight_edge():
    g = WeightedGraph.from_maps(path(2), [1, 1], {(0, 1): 0})
    c = ConstraintSet(anchors=((0, 0), (1, 1)))
    assert weighted_hom_sum(path(2), g, c) == 0
    assert find_hom(path(2), g, c) is None


def test_brute_examples():
    assert brute_force_hom_sum(cycle(4), unit(path(2))) == 2
    empty = Graph(3, ())
    g = WeightedGraph.from_maps(path(3), [1, 2, Fraction(1, 2)])
    assert brute_force_hom_sum(empty, g) == Fraction(7, 2) ** 3
    assert weighted_hom_sum(empty, g) == Fraction(7, 2) ** 3
    with pytest.raises(ResourceLimitError):
        brute_force_hom_sum(cycle(6), unit(cycle(6)), cap=100)


def test_c6_lemma5_style_witness():
    c6 = cycle(6)
    c = lemma5_constraints(c6, 0, 1, 5, 1, 5)
    assert c.anchor_map() == {0: 0, 1: 1, 5: 1}
    w = find_hom(c6, c6, c)
    assert w.mapping == (0, 1, 2, 3, 2, 1)
    assert not violations(c6, c6, c, w.mapping)
    sols = [m for m in iter_homs(c6, c6, c)]
    brute = [m for m in __import__("itertools").product(range(6), repeat=6) if not violations(c6, c6, c, m)]
    assert sorted(sols) == sorted(brute) == [(0, 1, 2, 3, 2, 1)]


def test_unsatisfiable_anchor():
    assert find_hom(path(2), cycle(6), ConstraintSet(anchors=((0, 0), (1, 3)))) is None


def test_c4c4_lemma5_style_witness():
    h = torus(4, 4)
    c = lemma5_constraints(h, 0, 4, 1, 4, 12)
    w = find_hom(h, h, c)
    assert w is not None and not violations(h, h, c, w.mapping)


def test_malformed_constraints():
    h, g = path(3), unit(path(3))
    with pytest.raises(ConstraintError):
        weighted_hom_sum(h, g, ConstraintSet(anchors=((0, 0), (0, 1))))
    with pytest.raises(ConstraintError):
        weighted_hom_sum(h, g, ConstraintSet(anchors=((0, 7),)))
    with pytest.raises(ConstraintError):
        weighted_hom_sum(h, g, ConstraintSet(covers=(Cover(1, {0, 2}, 1),)))
    with pytest.raises(ConstraintError):
        weighted_hom_sum(h, g, ConstraintSet(covers=(Cover(0, {0, 1, 2}, 1),)))
    with pytest.raises(ConstraintError):
        weighted_hom_sum(h, g, ConstraintSet(anchors=((0, 0),), domains={0: {1}}))


def test_cover_semantics():
    # K_{1,3} centre anchored to the middle of P3; cover demands exactly one leaf at 0
    star = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    c = ConstraintSet(anchors=((0, 1),), covers=(Cover(0, {0, 2}, 2),))
    assert weighted_hom_sum(star, unit(path(3)), c) == 3
    assert oracle_hom_sum(star, unit(path(3)), c) == 3


@given(st.integers(0, 10**6))
def test_three_routes_agree(seed):
    rng = random.Random(seed)
    h = random_graph(rng, rng.randint(1, 4))
    g = random_weighted(rng, random_graph(rng, rng.randint(1, 4), 0.6))
    c = random_constraints(rng, h, g.n)
    want = oracle_hom_sum(h, g, c)
    assert weighted_hom_sum(h, g, c) == want
    assert search_hom_sum(h, g, c) == want
    assert brute_force_hom_sum(h, g, c) == want
    assert (find_hom(h, g.graph, c) is not None) == any(True for _ in iter_homs(h, g.graph, c))


@given(st.integers(0, 10**6))
def test_adding_constraints_never_increases(seed):
    rng = random.Random(seed)
    h = random_graph(rng, rng.randint(1, 4))
    g = random_weighted(rng, random_graph(rng, rng.randint(1, 4), 0.6))
    c = random_constraints(rng, h, g.n)
    fewer = ConstraintSet(c.anchors, None, c.covers[1:])
    assert weighted_hom_sum(h, g, c) <= weighted_hom_sum(h, g, fewer) <= weighted_hom_sum(h, g)


@given(st.integers(0, 10**6))
def test_blow_up_invariance(seed):
    rng = random.Random(seed)
    h = random_graph(rng, rng.randint(1, 4))
    g = random_weighted(rng, random_graph(rng, rng.randint(1, 4), 0.6))
    out, _ = blow_up(g, rng.randrange(g.n), rng.choice([2, 3, 5]))
    assert weighted_hom_sum(h, out) == weighted_hom_sum(h, g)


@given(st.integers(0, 10**6))
def test_components_factor(seed):
    rng = random.Random(seed)
    h1, h2 = random_graph(rng, rng.randint(1, 3)), random_graph(rng, rng.randint(1, 3))
    edges = list(h1.edges) + [(u + h1.n, v + h1.n) for u, v in h2.edges]
    h = Graph.from_edges(h1.n + h2.n, edges)
    g = random_weighted(rng, random_graph(rng, rng.randint(1, 4), 0.6))
    assert weighted_hom_sum(h, g) == weighted_hom_sum(h1, g) * weighted_hom_sum(h2, g)


def test_search_node_cap():
    with pytest.raises(ResourceLimitError):
        list(iter_homs(cycle(6), cycle(6), max_nodes=3))


def test_contraction_term_cap():
    with pytest.raises(ResourceLimitError):
        weighted_hom_sum(torus(6, 6), unit(torus(6, 6)), term_cap=100)


def test_contract_small():
    # sum_{x,y} f(x) g(x,y) = 1*(2+3) + 4*(5+6)
    f = ((0,), {(0,): Fraction(1), (1,): Fraction(4)})
    g = ((0, 1), {(0, 0): Fraction(2), (0, 1): Fraction(3), (1, 0): Fraction(5), (1, 1): Fraction(6)})
    assert contract([f, g], [2, 2]) == 49

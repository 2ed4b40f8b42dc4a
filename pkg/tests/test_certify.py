import copy
import json
from fractions import Fraction

import pytest

from stepcheck.certify import (ODD_CLAIM, AlphaSearchError, CertificateFormatError, Inconclusive,
                               RefutationCertificate, alpha_search, derive_lemma5_vertices, refute, verify)
from stepcheck.criteria import thm1_matrix
from stepcheck.errors import ConstraintError
from stepcheck.graphon import Coarsening, example_c4_plus_graphon, step
from stepcheck.graphs import (DistinguishedVertices, graph_to_json, WeightedGraph, c4_plus, complete_bipartite, cycle, generate,
                              hypercube, path, torus)
from stepcheck.rational import round_decimal


def test_degree_certificate():
    cert = refute(c4_plus(), ["degree"])
    assert cert.method == "degree"
    assert cert.matrix.entries == ((0, 2, 0), (2, 4, 2), (0, 2, 0))
    assert cert.witness == (2, -1, 0) and cert.witness_value == -4
    assert verify(cert).accepted
    assert verify(json.loads(cert.dumps())).accepted


def test_lemma5_certificate():
    cert = refute(torus(6, 6), ["lemma5"])
    assert cert.method == "lemma5" and len(cert.pairs) == 6
    assert all(p["result"] == "no homomorphism" for p in cert.pairs)
    assert cert.inputs["u0"] == 0
    assert "known_vertex_transitive" in cert.meta["provenance"]
    verdict = verify(cert)
    assert verdict.accepted and verdict.notes


def test_inconclusive():
    out = refute(hypercube(3), ["degree", "lemma5"])
    assert isinstance(out, Inconclusive) and len(out.attempts) == 2
    assert isinstance(refute(torus(4, 4)), Inconclusive)


def test_default_strategy_skips_missing_inputs():
    out = refute(cycle(6))
    assert isinstance(out, Inconclusive)
    assert any("thm1" in a for a in out.attempts)


def test_unavailable_inputs_raise():
    with pytest.raises(ConstraintError):
        refute(c4_plus(), ["lemma5"])
    with pytest.raises(ConstraintError):
        refute(c4_plus(), ["thm1"])
    with pytest.raises(ConstraintError):
        refute(c4_plus(), ["explicit"])
    with pytest.raises(ConstraintError):
        refute(c4_plus(), ["bogus"])


def test_derived_lemma5_vertices():
    assert derive_lemma5_vertices(torus(6, 6)) == (0, 6, 1)
    h = torus(4, 6)
    u0, u1, u2 = derive_lemma5_vertices(h)
    assert h.labels[u1] == (0, 1) and h.labels[u2] == (1, 0)
    assert derive_lemma5_vertices(cycle(6)) == (0, 1, 5)


def test_odd_cycle_certificate():
    cert = refute(torus(5, 4))
    assert cert.method == "odd_cycle" and cert.claim == ODD_CLAIM
    assert verify(cert).accepted
    data = cert.to_json()
    data["inputs"]["cycle"] = data["inputs"]["cycle"][:-1]
    assert not verify(data).accepted


def test_explicit_certificate():
    w, p = example_c4_plus_graphon()
    cert = refute(c4_plus(), ["explicit"], {"graphon": w, "coarsening": p})
    assert round_decimal(cert.counterexample.t_W) == "0.007453"
    assert round_decimal(cert.counterexample.t_WP) == "0.007461"
    assert verify(cert).accepted
    out = refute(c4_plus(), ["explicit"], {"graphon": step(w, p), "coarsening": Coarsening.identity(2)})
    assert isinstance(out, Inconclusive)


def test_thm1_pipeline():
    g = WeightedGraph.unit(path(4))
    d = DistinguishedVertices(1, (0, 2))
    cert = refute(path(4), ["thm1"], {"target": g, "distinguished": d})
    assert cert.method == "thm1"
    assert cert.counterexample.t_W < cert.counterexample.t_WP
    assert Fraction(cert.inputs["sum_after"]) < Fraction(cert.inputs["sum_before"])
    assert verify(cert).accepted


def test_thm2_pipeline_shared_sets():
    g = WeightedGraph.unit(complete_bipartite(3, 3))
    d = DistinguishedVertices(3, (0, 1), ({3, 4}, {3, 4, 5}))
    h = generate("path:2*path:3")
    cert = refute(h, ["thm2"], {"target": g, "distinguished": d}, meta=False)
    assert cert.witness == (2, -5)
    assert cert.counterexample.t_W < cert.counterexample.t_WP
    assert verify(cert).accepted
    again = refute(h, ["thm2"], {"target": g, "distinguished": d}, meta=False)
    assert again.dumps() == cert.dumps()


def test_alpha_search_null_witness():
    g = WeightedGraph.unit(path(4))
    d = DistinguishedVertices(1, (0, 2))
    with pytest.raises(AlphaSearchError):
        alpha_search(path(4), g, d, (0, 0), "thm1", max_iter=6)


def test_alpha_search_thm1_result():
    g = WeightedGraph.unit(path(4))
    d = DistinguishedVertices(1, (0, 2))
    res = alpha_search(path(4), g, d, (4, -3), "thm1")
    assert res.after < res.before and res.alpha.numerator == 1
    assert (res.alpha.denominator & (res.alpha.denominator - 1)) == 0


def tampered(cert, edit):
    data = copy.deepcopy(cert.to_json())
    edit(data)
    return data


def test_tampering_is_rejected():
    cert = refute(c4_plus(), ["degree"])
    v = verify(tampered(cert, lambda d: d["witness"].update(value="4")))
    assert not v.accepted and "witness not negative" in v.reasons
    v = verify(tampered(cert, lambda d: d["witness"].update(vector=["1", "1", "1"])))
    assert "witness not negative" in v.reasons
    v = verify(tampered(cert, lambda d: d["matrix"]["entries"][0].__setitem__(0, "5")))
    assert "stored matrix differs from recomputation" in v.reasons
    v = verify(tampered(cert, lambda d: d.update(claim="something else")))
    assert not v.accepted
    w, p = example_c4_plus_graphon()
    cert = refute(c4_plus(), ["explicit"], {"graphon": w, "coarsening": p})
    v = verify(tampered(cert, lambda d: d["counterexample"].update(t_W="1/2")))
    assert "t_W differs from recomputation" in v.reasons
    v = verify(tampered(cert, lambda d: d["counterexample"].update(coarsening={"map": [0, 1, 2]})))
    assert not v.accepted


def test_lemma5_tampering():
    cert = refute(torus(6, 6), ["lemma5"])
    v = verify(tampered(cert, lambda d: d.update(graph=graph_to_json(torus(4, 4)))))
    assert not v.accepted
    v = verify(tampered(cert, lambda d: d["pairs"].pop()))
    assert "stored pair list does not cover every neighbour pair" in v.reasons


@pytest.mark.parametrize("edit", [
    lambda d: d.pop("version"),
    lambda d: d.update(version="99"),
    lambda d: d.update(method="magic"),
    lambda d: d.update(graph={"n": 2}),
    lambda d: d.pop("witness"),
    lambda d: d["witness"].update(value="x/y"),
])
def test_malformed(edit):
    cert = refute(c4_plus(), ["degree"])
    with pytest.raises(CertificateFormatError):
        verify(tampered(cert, edit))
    with pytest.raises(CertificateFormatError):
        verify([1, 2])


def test_meta_off_is_deterministic():
    a = refute(c4_plus(), ["degree"], meta=False).dumps()
    b = refute(c4_plus(), ["degree"], meta=False).dumps()
    assert a == b and "created" not in a
    assert "created" in refute(c4_plus(), ["degree"]).meta

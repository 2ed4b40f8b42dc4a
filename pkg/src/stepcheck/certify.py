"""Refutation pipelines and an independent certificate verifier."""
from __future__ import annotations

import json
import platform
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .contraction import DEFAULT_TERM_CAP
from .criteria import (PAIRS, CriterionMatrix, degree_matrix, lemma5_check, psd_witness, thm1_matrix,
                       thm2_matrix, verify_vertex_transitive)
from .errors import ConstraintError, StepcheckError
from .gadgets import build_cor4_gadget, build_thm1_perturbation, build_thm2_perturbation
from .graphon import Coarsening, StepGraphon, density, from_weighted_graph, step
from .graphs import (TRANSITIVE, DistinguishedVertices, Graph, WeightedGraph, degree_classes, graph_from_json,
                     graph_to_json, odd_cycle, weighted_from_json, weighted_to_json)
from .homs import weighted_hom_sum
from .linalg import quadratic_form
from .rational import format_fraction, to_fraction

VERSION = "1"
STEP_CLAIM = "does not have the step Sidorenko property"
ODD_CLAIM = "fails Sidorenko: odd cycle witness"
ODD_CYCLE = "odd_cycle"
METHODS = ("degree", "lemma5", "thm1", "thm2", "explicit")
DEFAULT_STRATEGY = ("degree", "lemma5", "thm1", "thm2")
DEFAULT_EPS_GRID = (Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000))
DEFAULT_MAX_ITER = 40
DEFAULT_GADGET_EPS = Fraction(1, 100)


class CertificateFormatError(StepcheckError, ValueError):
    """The certificate is not syntactically valid."""


class AlphaSearchError(StepcheckError):
    """alpha_search ran out of iterations without a strict decrease."""


# ------------------------------------------------------------ certificate


@dataclass(frozen=True)
class Counterexample:
    graphon: StepGraphon
    coarsening: Coarsening
    t_W: Fraction
    t_WP: Fraction

    def to_json(self) -> dict:
        return {"graphon": self.graphon.to_json(), "coarsening": self.coarsening.to_json(),
                "t_W": format_fraction(self.t_W), "t_WP": format_fraction(self.t_WP)}


@dataclass(frozen=True)
class RefutationCertificate:
    graph: Graph
    method: str
    claim: str = STEP_CLAIM
    matrix: CriterionMatrix | None = None
    witness: tuple[Fraction, ...] | None = None
    witness_value: Fraction | None = None
    pairs: tuple[dict, ...] | None = None
    counterexample: Counterexample | None = None
    inputs: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"version": VERSION, "claim": self.claim, "graph": graph_to_json(self.graph),
               "method": self.method, "meta": dict(self.meta)}
        if self.matrix is not None:
            out["matrix"] = self.matrix.to_json()
        if self.witness is not None:
            out["witness"] = {"vector": [format_fraction(x) for x in self.witness],
                              "value": format_fraction(self.witness_value)}
        if self.pairs is not None:
            out["pairs"] = [dict(p) for p in self.pairs]
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample.to_json()
        if self.inputs:
            out["inputs"] = self.inputs
        return out

    def dumps(self) -> str:
        return dumps(self.to_json())


def dumps(data) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


@dataclass(frozen=True)
class Inconclusive:
    """No method in the strategy produced a refutation."""

    attempts: tuple[str, ...]

    def to_json(self) -> dict:
        return {"verdict": "inconclusive", "attempts": list(self.attempts)}


def make_meta(enabled: bool = True, term_cap: int | None = None, provenance: Sequence[str] = ()) -> dict:
    from . import __version__

    meta = {"tool": "stepcheck", "version": __version__, "term_cap": term_cap or DEFAULT_TERM_CAP,
            "provenance": sorted(set(provenance))}
    if enabled:
        meta["python"] = platform.python_version()
        meta["created"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return meta


# ----------------------------------------------------------- alpha search


@dataclass(frozen=True)
class AlphaResult:
    alpha: Fraction
    eps: Fraction | None
    before: Fraction
    after: Fraction
    perturbed: WeightedGraph
    unperturbed: WeightedGraph
    coarsening: Coarsening
    iterations: int


def _perturb(mode, g, d, a, eps, alpha, n):
    if mode == "thm1":
        out, c = build_thm1_perturbation(g, d, a, alpha)
        return out, c
    p = build_thm2_perturbation(g, d, a, eps, alpha, n)
    return p.graph, p.merge_pm


def alpha_search(h: Graph, g: WeightedGraph, d: DistinguishedVertices, a: Sequence, mode: str = "thm1", *,
                 eps=None, eps_grid: Sequence | None = None, max_iter: int = DEFAULT_MAX_ITER,
                 term_cap: int | None = None) -> AlphaResult:
    """Scan ``alpha = 2**-m`` (and, for thm2, ``eps`` over a descending grid)
    until the perturbed hom sum drops strictly below the unperturbed one.

    Raises ``AlphaSearchError`` when ``max_iter`` values of ``alpha`` fail
    for every ``eps``.
    """
    if mode not in ("thm1", "thm2"):
        raise ValueError(f"unknown mode {mode!r}")
    cap = term_cap or DEFAULT_TERM_CAP
    if mode == "thm1":
        grid = [None]
    elif eps is not None:
        grid = [to_fraction(eps)]
    else:
        grid = sorted((to_fraction(e) for e in (eps_grid or DEFAULT_EPS_GRID)), reverse=True)
    tried = 0
    for e in grid:
        try:
            base, _ = _perturb(mode, g, d, a, e, 0, h.n)
        except ValueError:
            continue  # eps too large for the clone weights
        before = weighted_hom_sum(h, base, term_cap=cap)
        for m in range(1, max_iter + 1):
            alpha = Fraction(1, 2 ** m)
            tried += 1
            try:
                graph, coarsening = _perturb(mode, g, d, a, e, alpha, h.n)
            except ValueError:
                continue  # some weight went negative; a smaller alpha fixes that
            after = weighted_hom_sum(h, graph, term_cap=cap)
            if after < before:
                return AlphaResult(alpha, e, before, after, graph, base, coarsening, tried)
    raise AlphaSearchError(f"no strict decrease after {tried} perturbations "
                           f"(alpha down to 2^-{max_iter}); the witness is probably wrong")


def _common_scale(*graphs: WeightedGraph) -> Fraction:
    top = max((max(g.edge_weights, default=Fraction(0)) for g in graphs), default=Fraction(0))
    return Fraction(1) / top if top > 1 else Fraction(1)


def graphon_pair(res: AlphaResult) -> tuple[StepGraphon, StepGraphon, Coarsening]:
    """Graphons of the perturbed and unperturbed graphs, scaled together into [0, 1]."""
    s = _common_scale(res.perturbed, res.unperturbed)
    w_alpha, _ = from_weighted_graph(res.perturbed.scaled(edge_factor=s))
    w_zero, _ = from_weighted_graph(res.unperturbed.scaled(edge_factor=s))
    return w_alpha, w_zero, res.coarsening


def constant_on_parts(w: StepGraphon, c: Coarsening) -> bool:
    """Whether ``w`` is already constant on the coarse blocks of ``c``."""
    stepped = step(w, c)
    return all(w.blocks[q][r] == stepped.blocks[c.map[q]][c.map[r]]
               for q in range(w.parts) for r in range(w.parts))


def _counterexample(h: Graph, w: StepGraphon, c: Coarsening, term_cap) -> Counterexample:
    cap = term_cap or DEFAULT_TERM_CAP
    return Counterexample(w, c, density(h, w, term_cap=cap), density(h, step(w, c), term_cap=cap))


# ----------------------------------------------------------------- refute


def derive_lemma5_vertices(h: Graph) -> tuple[int, int, int]:
    """``u0`` at the origin, ``u1`` one step along the longest coordinate
    cycle and ``u2`` one step along the shortest, read off product labels.

    Without tuple labels the two smallest neighbours of vertex 0 are used.
    """
    labels = h.labels
    if labels and all(isinstance(x, tuple) for x in labels) and len(labels[0]) >= 2:
        dims = len(labels[0])
        lengths = [max(lab[i] for lab in labels) + 1 for i in range(dims)]
        i1 = max(range(dims), key=lambda i: (lengths[i], -i))
        i2 = min((i for i in range(dims) if i != i1), key=lambda i: (lengths[i], i))
        index = {lab: v for v, lab in enumerate(labels)}
        origin = (0,) * dims
        unit = lambda i: tuple(int(j == i) for j in range(dims))
        return index[origin], index[unit(i1)], index[unit(i2)]
    nbrs = sorted(h.adj[0]) if h.n else []
    if len(nbrs) < 2:
        raise ConstraintError("cannot derive distinguished vertices: vertex 0 has fewer than two neighbours")
    return 0, nbrs[0], nbrs[1]


def _transitivity(h: Graph, params: Mapping) -> str | None:
    if TRANSITIVE in h.tags:
        return "tag"
    if params.get("verify_transitivity", True) and h.n <= 16 and verify_vertex_transitive(h):
        return "checked"
    return None


def _target(h: Graph, params: Mapping):
    g, d = params.get("target"), params.get("distinguished")
    if isinstance(g, str) and g == "cor4":
        degrees, _ = degree_classes(h)
        return build_cor4_gadget(degrees, params.get("gadget_eps", DEFAULT_GADGET_EPS))
    if g is None or d is None:
        return None
    return g, d


def refute(h: Graph, strategy: Sequence[str] | None = None, params: Mapping | None = None, *,
           term_cap: int | None = None, meta: bool = True):
    """Try the methods of ``strategy`` in order and return the first
    certificate, or ``Inconclusive``.

    ``params`` may hold ``u0``/``u1``/``u2`` and ``max_nodes`` (lemma5),
    ``target`` (a weighted graph or ``"cor4"``) with ``distinguished``,
    ``eps``/``eps_grid``/``max_iter`` (thm1, thm2), and ``graphon`` with
    ``coarsening`` (explicit). Methods named explicitly whose inputs are
    missing raise ``ConstraintError``; in the default strategy they are
    skipped.
    """
    params = dict(params or {})
    explicit_strategy = strategy is not None
    strategy = tuple(strategy or DEFAULT_STRATEGY)
    for m in strategy:
        if m not in METHODS:
            raise ConstraintError(f"unknown method {m!r}")
    cycle_ = odd_cycle(h)
    if cycle_ is not None:
        return RefutationCertificate(h, ODD_CYCLE, ODD_CLAIM, inputs={"cycle": list(cycle_)},
                                     meta=make_meta(meta, term_cap))
    attempts = []

    def unavailable(msg):
        if explicit_strategy:
            raise ConstraintError(msg)
        attempts.append(f"skipped: {msg}")

    for method in strategy:
        if method == "degree":
            m = degree_matrix(h)
            v = psd_witness(m)
            if not v.psd:
                return RefutationCertificate(h, "degree", matrix=m, witness=v.witness, witness_value=v.value,
                                             meta=make_meta(meta, term_cap))
            attempts.append("degree: matrix is positive semidefinite")
        elif method == "lemma5":
            how = _transitivity(h, params)
            if how is None:
                unavailable("lemma5 needs vertex-transitivity (generator tag, or at most 16 vertices)")
                continue
            if all(k in params for k in ("u0", "u1", "u2")):
                us = (int(params["u0"]), int(params["u1"]), int(params["u2"]))
            else:
                try:
                    us = derive_lemma5_vertices(h)
                except ConstraintError as exc:
                    unavailable(str(exc))
                    continue
            budget = params.get("max_nodes")
            report = lemma5_check(h, *us, verify_transitivity=True, max_nodes=budget)
            if report.refuted:
                pairs = tuple({"v1": p.v1, "v2": p.v2, "result": "no homomorphism", "nodes": p.nodes}
                              for p in report.pairs)
                prov = [TRANSITIVE] if how == "tag" else []
                return RefutationCertificate(
                    h, "lemma5", pairs=pairs,
                    inputs={"u0": us[0], "u1": us[1], "u2": us[2], "max_nodes": budget},
                    meta=make_meta(meta, term_cap, prov))
            found = sum(p.witness is not None for p in report.pairs)
            attempts.append(f"lemma5: {found} of {len(report.pairs)} pairs admit a homomorphism")
        elif method in ("thm1", "thm2"):
            t = _target(h, params)
            if t is None:
                unavailable(f"{method} needs a target weighted graph and distinguished vertices")
                continue
            g, d = t
            if method == "thm2" and d.Us is None:
                unavailable("thm2 needs the sets U_i")
                continue
            build = thm1_matrix if method == "thm1" else thm2_matrix
            m = build(h, g, d, PAIRS, term_cap=term_cap)
            v = psd_witness(m)
            if v.psd:
                attempts.append(f"{method}: matrix is positive semidefinite")
                continue
            res = alpha_search(h, g, d, v.witness, method, eps=params.get("eps"), eps_grid=params.get("eps_grid"),
                               max_iter=params.get("max_iter", DEFAULT_MAX_ITER), term_cap=term_cap)
            w_alpha, _, c = graphon_pair(res)
            inputs = {"target": weighted_to_json(g), "distinguished": d.to_json(),
                      "alpha": format_fraction(res.alpha), "sum_before": format_fraction(res.before),
                      "sum_after": format_fraction(res.after)}
            if res.eps is not None:
                inputs["eps"] = format_fraction(res.eps)
            return RefutationCertificate(h, method, matrix=m, witness=v.witness, witness_value=v.value,
                                         counterexample=_counterexample(h, w_alpha, c, term_cap),
                                         inputs=inputs, meta=make_meta(meta, term_cap))
        elif method == "explicit":
            w, c = params.get("graphon"), params.get("coarsening")
            if w is None or c is None:
                unavailable("explicit needs a graphon and a coarsening")
                continue
            cx = _counterexample(h, w, c, term_cap)
            if cx.t_W < cx.t_WP:
                return RefutationCertificate(h, "explicit", counterexample=cx, meta=make_meta(meta, term_cap))
            attempts.append("explicit: stepping does not increase the density")
    return Inconclusive(tuple(attempts))


# ----------------------------------------------------------------- verify


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reasons: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"verdict": "accept" if self.accepted else "reject", "reasons": list(self.reasons),
                "notes": list(self.notes)}


def _parse(data: Mapping):
    if isinstance(data, RefutationCertificate):
        data = data.to_json()
    if not isinstance(data, Mapping):
        raise CertificateFormatError("certificate must be a JSON object")
    for key in ("version", "claim", "graph", "method", "meta"):
        if key not in data:
            raise CertificateFormatError(f"missing field {key!r}")
    if data["version"] != VERSION:
        raise CertificateFormatError(f"unsupported certificate version {data['version']!r}")
    if data["method"] not in METHODS + (ODD_CYCLE,):
        raise CertificateFormatError(f"unknown method {data['method']!r}")
    try:
        h = graph_from_json(data["graph"])
    except (ValueError, TypeError) as exc:
        raise CertificateFormatError(str(exc)) from exc
    return data, h


def _field(data, key, convert):
    try:
        return convert(data[key])
    except KeyError:
        raise CertificateFormatError(f"missing field {key!r}") from None
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise CertificateFormatError(f"malformed field {key!r}: {exc}") from exc


def _check_witness(data, recomputed: CriterionMatrix, reasons: list):
    stored = _field(data, "matrix", lambda m: [[to_fraction(x) for x in row] for row in m["entries"]])
    if stored != recomputed.as_lists():
        reasons.append("stored matrix differs from recomputation")
    vec = _field(data, "witness", lambda w: [to_fraction(x) for x in w["vector"]])
    claimed = _field(data, "witness", lambda w: to_fraction(w["value"]))
    if len(vec) != len(recomputed.labels):
        reasons.append("witness has the wrong dimension")
        return
    value = quadratic_form(recomputed.entries, vec)
    if value >= 0 or claimed >= 0:
        reasons.append("witness not negative")
    elif value != claimed:
        reasons.append("stored witness value differs from recomputation")


def _check_counterexample(h: Graph, data, reasons: list, term_cap) -> StepGraphon | None:
    cx = data["counterexample"]
    try:
        w = StepGraphon.from_json(cx["graphon"])
        c = Coarsening.from_json(cx["coarsening"])
        t_w, t_wp = to_fraction(cx["t_W"]), to_fraction(cx["t_WP"])
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise CertificateFormatError(f"malformed counterexample: {exc}") from exc
    if len(c.map) != w.parts:
        raise CertificateFormatError("coarsening does not match the graphon")
    got = _counterexample(h, w, c, term_cap)
    if got.t_W != t_w:
        reasons.append("t_W differs from recomputation")
    if got.t_WP != t_wp:
        reasons.append("t_WP differs from recomputation")
    if not got.t_W < got.t_WP:
        reasons.append("stepping does not increase the density")
    return w


def verify(cert, *, term_cap: int | None = None, max_vertices_transitive: int = 16) -> Verdict:
    """Recompute every claim of a certificate exactly.

    Raises ``CertificateFormatError`` for malformed input; a well-formed
    certificate whose claims fail gives a rejecting verdict.
    """
    data, h = _parse(cert)
    method = data["method"]
    reasons: list[str] = []
    notes: list[str] = []
    expected_claim = ODD_CLAIM if method == ODD_CYCLE else STEP_CLAIM
    if data["claim"] != expected_claim:
        reasons.append(f"claim does not match method {method!r}")
    inputs = data.get("inputs") or {}

    if method == ODD_CYCLE:
        cyc = _field(inputs, "cycle", lambda c: [int(x) for x in c])
        if len(cyc) % 2 == 0 or len(cyc) < 3:
            reasons.append("cycle length is not odd")
        if any(not 0 <= v < h.n for v in cyc) or any(
                not h.has_edge(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))):
            reasons.append("cycle is not a closed walk in the graph")
    elif method == "degree":
        _check_witness(data, degree_matrix(h), reasons)
    elif method in ("thm1", "thm2"):
        g = _field(inputs, "target", weighted_from_json)
        d = _field(inputs, "distinguished", DistinguishedVertices.from_json)
        conv = _field(data, "matrix", lambda m: m.get("convention", PAIRS))
        build = thm1_matrix if method == "thm1" else thm2_matrix
        try:
            m = build(h, g, d, conv, term_cap=term_cap)
        except ConstraintError as exc:
            reasons.append(f"criterion inputs invalid: {exc}")
        else:
            _check_witness(data, m, reasons)
    elif method == "lemma5":
        us = _field(inputs, "u0", int), _field(inputs, "u1", int), _field(inputs, "u2", int)
        budget = inputs.get("max_nodes")
        if h.n <= max_vertices_transitive:
            if not verify_vertex_transitive(h, max_vertices_transitive):
                reasons.append("graph is not vertex-transitive")
        elif TRANSITIVE in h.tags:
            notes.append("vertex-transitivity taken from the generator tag")
        else:
            reasons.append("vertex-transitivity not established")
        if not reasons:
            try:
                report = lemma5_check(h, *us, verify_transitivity=False if TRANSITIVE in h.tags else True,
                                      max_nodes=budget)
            except ConstraintError as exc:
                reasons.append(f"lemma5 inputs invalid: {exc}")
            else:
                stored = _field(data, "pairs", lambda ps: {(int(p["v1"]), int(p["v2"])) for p in ps})
                wanted = {(p.v1, p.v2) for p in report.pairs}
                if stored != wanted:
                    reasons.append("stored pair list does not cover every neighbour pair")
                for p in report.pairs:
                    if p.witness is not None:
                        reasons.append(f"pair ({p.v1}, {p.v2}) admits a homomorphism {list(p.witness.mapping)}")
    if "counterexample" in data:
        w = _check_counterexample(h, data, reasons, term_cap)
        if method in ("thm1", "thm2") and "alpha" in inputs and not reasons:
            _check_construction(h, data, inputs, w, method, reasons)
    elif method == "explicit":
        reasons.append("explicit certificate carries no counterexample")
    return Verdict(not reasons, tuple(reasons), tuple(notes))


def _check_construction(h, data, inputs, w, method, reasons):
    """Rebuild the perturbation from its parameters and compare graphons."""
    g = weighted_from_json(inputs["target"])
    d = DistinguishedVertices.from_json(inputs["distinguished"])
    a = [to_fraction(x) for x in data["witness"]["vector"]]
    alpha = _field(inputs, "alpha", to_fraction)
    eps = _field(inputs, "eps", to_fraction) if method == "thm2" else None
    try:
        graph, c = _perturb(method, g, d, a, eps, alpha, h.n)
        base, _ = _perturb(method, g, d, a, eps, 0, h.n)
    except (ValueError, StepcheckError) as exc:
        reasons.append(f"perturbation cannot be rebuilt: {exc}")
        return
    res = AlphaResult(alpha, eps, Fraction(0), Fraction(0), graph, base, c, 0)
    w_alpha, w_zero, c = graphon_pair(res)
    if w_alpha != w:
        reasons.append("counterexample graphon does not match the perturbation")
    if step(w_alpha, c) != step(w_zero, c) or not constant_on_parts(w_zero, c):
        reasons.append("stepping the perturbed graphon does not give the unperturbed one")

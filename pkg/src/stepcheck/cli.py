"""Command-line interface: ``stepcheck <subcommand> ...`` with JSON on stdout.

Exit codes: 0 computed/accepted, 1 inconclusive/rejected, 2 usage error,
3 resource cap or time limit.
"""
from __future__ import annotations

import argparse
import json
import os
import signal
import sys
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

from . import certify as cert_mod
from .contraction import DEFAULT_TERM_CAP
from .criteria import ORDERED, PAIRS, degree_matrix, lemma5_check, psd_witness, thm1_matrix, thm2_matrix
from .errors import ResourceLimitError, StepcheckError
from .graphon import Coarsening, StepGraphon, density, step
from .graphs import DistinguishedVertices, generate, graph_from_json, graph_to_json, weighted_from_json
from .rational import format_fraction, round_decimal, to_fraction

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ inputs


def _load_json(arg: str):
    """A path to a JSON file, or inline JSON text."""
    p = Path(arg)
    if p.is_file():
        try:
            return json.loads(p.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read {arg}: {exc}") from exc
    try:
        return json.loads(arg)
    except json.JSONDecodeError:
        raise UsageError(f"{arg!r} is neither a readable JSON file nor inline JSON") from None


def _load_graph(arg: str):
    """A generator spec such as ``torus:6,6``, a JSON file, or inline JSON."""
    if Path(arg).is_file() or arg.lstrip().startswith("{"):
        try:
            return graph_from_json(_load_json(arg))
        except (ValueError, TypeError, KeyError) as exc:
            raise UsageError(f"bad graph: {exc}") from exc
    try:
        return generate(arg)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad generator spec {arg!r}: {exc}") from exc


def _load_weighted(arg: str):
    if Path(arg).is_file() or arg.lstrip().startswith("{"):
        try:
            return weighted_from_json(_load_json(arg))
        except (ValueError, TypeError, KeyError) as exc:
            raise UsageError(f"bad weighted graph: {exc}") from exc
    from .graphs import WeightedGraph

    return WeightedGraph.unit(_load_graph(arg))


def _parse(loader, arg, what):
    try:
        return loader(_load_json(arg))
    except (ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
        raise UsageError(f"bad {what}: {exc}") from exc


def _fraction(text: str) -> Fraction:
    try:
        return to_fraction(text)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def threads_hint() -> int:
    """The advisory ``STEPCHECK_THREADS`` value (default 1)."""
    raw = os.environ.get("STEPCHECK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"STEPCHECK_THREADS must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------- commands


def _verdict_json(m, verdict) -> dict:
    out = {"matrix": m.to_json(), "psd": verdict.psd}
    if m.notes:
        out["notes"] = list(m.notes)
    if not verdict.psd:
        out["witness"] = [format_fraction(x) for x in verdict.witness]
        out["value"] = format_fraction(verdict.value)
    return out


def cmd_generate(args):
    return EXIT_OK, graph_to_json(_load_graph(args.spec))


def cmd_density(args):
    h = _load_graph(args.H)
    w = _parse(StepGraphon.from_json, args.W, "graphon")
    t = density(h, w, method=args.method, term_cap=args.term_cap)
    return EXIT_OK, {"t": format_fraction(t), "decimal6": round_decimal(t, 6)}


def cmd_step(args):
    w = _parse(StepGraphon.from_json, args.W, "graphon")
    c = _parse(Coarsening.from_json, args.P, "coarsening")
    try:
        return EXIT_OK, step(w, c).to_json()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_check_degree(args):
    m = degree_matrix(_load_graph(args.H))
    v = psd_witness(m)
    return (EXIT_NEGATIVE if v.psd else EXIT_OK), _verdict_json(m, v)


def _check_thm(args, build):
    h = _load_graph(args.H)
    g = _load_weighted(args.G)
    d = _parse(DistinguishedVertices.from_json, args.distinguished, "distinguished vertices")
    try:
        m = build(h, g, d, args.convention, term_cap=args.term_cap)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    v = psd_witness(m)
    return (EXIT_NEGATIVE if v.psd else EXIT_OK), _verdict_json(m, v)


def cmd_check_thm1(args):
    return _check_thm(args, thm1_matrix)


def cmd_check_thm2(args):
    return _check_thm(args, thm2_matrix)


def cmd_check_lemma5(args):
    h = _load_graph(args.H)
    if args.u0 is None or args.u1 is None or args.u2 is None:
        us = cert_mod.derive_lemma5_vertices(h)
    else:
        us = (args.u0, args.u1, args.u2)
    try:
        report = lemma5_check(h, *us, verify_transitivity=True, max_nodes=args.max_nodes)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    pairs = [{"v1": p.v1, "v2": p.v2, "nodes": p.nodes,
              "result": "no homomorphism" if p.witness is None else "homomorphism",
              **({"witness": list(p.witness.mapping)} if p.witness is not None else {})}
             for p in report.pairs]
    out = {"u0": us[0], "u1": us[1], "u2": us[2], "refuted": report.refuted, "pairs": pairs}
    return (EXIT_OK if report.refuted else EXIT_NEGATIVE), out


def cmd_certify(args):
    h = _load_graph(args.H)
    strategy = None
    if args.strategy:
        strategy = [s.strip() for s in args.strategy.split(",") if s.strip()]
    params = {}
    for key in ("u0", "u1", "u2", "max_nodes", "eps", "max_iter"):
        if getattr(args, key, None) is not None:
            params[key] = getattr(args, key)
    if args.G:
        params["target"] = "cor4" if args.G == "cor4" else _load_weighted(args.G)
    if args.distinguished:
        params["distinguished"] = _parse(DistinguishedVertices.from_json, args.distinguished,
                                         "distinguished vertices")
    if args.gadget_eps is not None:
        params["gadget_eps"] = args.gadget_eps
    if args.W:
        params["graphon"] = _parse(StepGraphon.from_json, args.W, "graphon")
    if args.P:
        params["coarsening"] = _parse(Coarsening.from_json, args.P, "coarsening")
    try:
        result = cert_mod.refute(h, strategy, params, term_cap=args.term_cap, meta=args.meta == "on")
    except cert_mod.AlphaSearchError as exc:
        return EXIT_CAP, {"error": "alpha search cap reached", "detail": str(exc)}
    except StepcheckError as exc:
        if isinstance(exc, ResourceLimitError):
            raise
        raise UsageError(str(exc)) from exc
    if isinstance(result, cert_mod.Inconclusive):
        return EXIT_NEGATIVE, result.to_json()
    if args.meta == "on":
        result.meta["threads"] = threads_hint()
    return EXIT_OK, result.to_json()


def cmd_verify(args):
    data = _load_json(args.certificate)
    try:
        verdict = cert_mod.verify(data, term_cap=args.term_cap)
    except cert_mod.CertificateFormatError as exc:
        raise UsageError(f"malformed certificate: {exc}") from exc
    return (EXIT_OK if verdict.accepted else EXIT_NEGATIVE), verdict.to_json()


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--time-limit", type=_positive_float, default=None, metavar="SECONDS",
                        help="abort with exit code 3 after this many seconds")
    common.add_argument("--term-cap", type=_positive_int, default=DEFAULT_TERM_CAP,
                        help="largest intermediate table the exact contraction may build")
    common.add_argument("--meta", choices=("on", "off"), default="on",
                        help="'off' drops timestamps so output is byte-stable")
    common.add_argument("-o", "--output", default=None, help="write JSON here instead of stdout")

    p = argparse.ArgumentParser(prog="stepcheck", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    s = sub.add_parser("generate", parents=[common], help="emit a built-in graph as JSON")
    s.add_argument("spec", help="generator spec, e.g. torus:6,6 or path:2*path:3")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("density", parents=[common], help="exact t(H, W) for a step graphon")
    s.add_argument("-H", required=True, help="pattern: generator spec or graph JSON")
    s.add_argument("-W", required=True, help="step graphon JSON (file or inline)")
    s.add_argument("--method", choices=("contract", "enumerate"), default="contract")
    s.set_defaults(func=cmd_density)

    s = sub.add_parser("step", parents=[common], help="apply the stepping operator")
    s.add_argument("-W", required=True, help="step graphon JSON")
    s.add_argument("-P", required=True, help="coarsening JSON")
    s.set_defaults(func=cmd_step)

    s = sub.add_parser("check-degree", parents=[common], help="degree criterion")
    s.add_argument("-H", required=True)
    s.set_defaults(func=cmd_check_degree)

    for name, fn in (("check-thm1", cmd_check_thm1), ("check-thm2", cmd_check_thm2)):
        s = sub.add_parser(name, parents=[common], help="criterion matrix for a weighted target")
        s.add_argument("-H", required=True)
        s.add_argument("-G", required=True, help="weighted target graph JSON or generator spec (unit weights)")
        s.add_argument("--distinguished", required=True, help='JSON such as {"u0": 1, "us": [0, 2]}')
        s.add_argument("--convention", choices=(PAIRS, ORDERED), default=PAIRS)
        s.set_defaults(func=fn)

    s = sub.add_parser("check-lemma5", parents=[common], help="distance-preserving homomorphism test")
    s.add_argument("-H", required=True)
    s.add_argument("--u0", type=int)
    s.add_argument("--u1", type=int)
    s.add_argument("--u2", type=int)
    s.add_argument("--max-nodes", type=_positive_int, default=None)
    s.set_defaults(func=cmd_check_lemma5)

    s = sub.add_parser("certify", parents=[common], help="emit a refutation certificate")
    s.add_argument("-H", required=True)
    s.add_argument("--strategy", help="comma-separated methods: " + ",".join(cert_mod.METHODS))
    s.add_argument("-G", help="target for thm1/thm2: weighted graph JSON, generator spec, or 'cor4'")
    s.add_argument("--distinguished")
    s.add_argument("--eps", type=_fraction, help="fix the thm2 perturbation eps")
    s.add_argument("--gadget-eps", type=_fraction, help="eps of the cor4 gadget (default 1/100)")
    s.add_argument("--max-iter", type=_positive_int)
    s.add_argument("--u0", type=int)
    s.add_argument("--u1", type=int)
    s.add_argument("--u2", type=int)
    s.add_argument("--max-nodes", type=_positive_int)
    s.add_argument("-W", help="graphon for the explicit method")
    s.add_argument("-P", help="coarsening for the explicit method")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("verify", parents=[common], help="re-check a certificate")
    s.add_argument("certificate", help="certificate JSON file")
    s.set_defaults(func=cmd_verify)
    return p


class _Timeout(ResourceLimitError):
    pass


@contextmanager
def _time_limit(seconds):
    if not seconds or not hasattr(signal, "setitimer"):
        yield
        return

    def fire(signum, frame):
        raise _Timeout(f"time limit of {seconds} s exceeded")

    old = signal.signal(signal.SIGALRM, fire)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def _emit(payload, output):
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        threads_hint()
        with _time_limit(args.time_limit):
            code, payload = args.func(args)
    except UsageError as exc:
        print(f"stepcheck: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        _emit({"error": "resource limit", "detail": str(exc), "command": args.command}, None)
        return EXIT_CAP
    _emit(payload, args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())

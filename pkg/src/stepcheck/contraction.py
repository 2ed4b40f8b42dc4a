"""Exact sum-product contraction of sparse factors by variable elimination.

A factor is a pair ``(scope, table)`` where ``scope`` is a tuple of
variable ids and ``table`` maps value tuples (aligned with ``scope``)
to rationals. Absent keys are zero. ``contract`` returns the sum over
all joint assignments of the product of all factors.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import ResourceLimitError

DEFAULT_TERM_CAP = 10**8

Factor = tuple[tuple[int, ...], dict]


def join(f: Factor, g: Factor) -> Factor:
    fs, ft = f
    gs, gt = g
    shared = [v for v in gs if v in fs]
    f_pos = [fs.index(v) for v in shared]
    g_pos = [gs.index(v) for v in shared]
    rest_pos = [i for i, v in enumerate(gs) if v not in fs]
    index: dict[tuple, list] = {}
    for key, val in gt.items():
        index.setdefault(tuple(key[i] for i in g_pos), []).append((tuple(key[i] for i in rest_pos), val))
    out = {}
    for key, val in ft.items():
        for rest, val2 in index.get(tuple(key[i] for i in f_pos), ()):
            out[key + rest] = val * val2
    return fs + tuple(gs[i] for i in rest_pos), out


def sum_out(f: Factor, var: int) -> Factor:
    scope, table = f
    pos = scope.index(var)
    out: dict[tuple, Fraction] = {}
    for key, val in table.items():
        k = key[:pos] + key[pos + 1:]
        out[k] = out.get(k, 0) + val
    return scope[:pos] + scope[pos + 1:], out


def contract(factors: Sequence[Factor], domain_sizes: Sequence[int], term_cap: int = DEFAULT_TERM_CAP):
    """Sum over all assignments of the product of ``factors``.

    Variables are eliminated greedily by smallest estimated joint table.
    ``term_cap`` bounds the estimated size of any single joint table.
    """
    factors = [f for f in factors]
    for scope, table in factors:
        if not table:
            return Fraction(0)
    live = {v for scope, _ in factors for v in scope}
    total = Fraction(1)
    while live:
        best = None
        for v in live:
            union = set()
            for scope, _ in factors:
                if v in scope:
                    union.update(scope)
            est = 1
            for u in union:
                est *= max(1, domain_sizes[u])
            key = (est, len(union), v)
            if best is None or key < best[0]:
                best = (key, v)
        (est, _, _), var = best
        if est > term_cap:
            raise ResourceLimitError(f"contraction needs ~{est} terms, above the cap {term_cap}")
        touching = [f for f in factors if var in f[0]]
        factors = [f for f in factors if var not in f[0]]
        touching.sort(key=lambda f: len(f[1]))
        acc = touching[0]
        for f in touching[1:]:
            acc = join(acc, f)
            if not acc[1]:
                return Fraction(0)
        reduced = sum_out(acc, var)
        if not reduced[1]:
            return Fraction(0)
        if reduced[0]:
            factors.append(reduced)
        else:
            total *= reduced[1][()]
        live.discard(var)
    for scope, table in factors:
        total *= table[()]
    return Fraction(total)

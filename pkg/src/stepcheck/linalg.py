"""Exact rational linear algebra: PSD tests with witnesses, solving,
polynomial interpolation."""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd, lcm
from typing import Sequence

Matrix = Sequence[Sequence[Fraction]]


def quadratic_form(m: Matrix, a: Sequence) -> Fraction:
    n = len(a)
    return sum((Fraction(m[i][j]) * a[i] * a[j] for i in range(n) for j in range(n)), Fraction(0))


def is_symmetric(m: Matrix) -> bool:
    n = len(m)
    return all(len(row) == n for row in m) and all(m[i][j] == m[j][i] for i in range(n) for j in range(i))


def determinant(m: Matrix) -> Fraction:
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                for j in range(c, n):
                    a[r][j] -= f * a[c][j]
    return det


def principal_minors_nonnegative(m: Matrix) -> bool:
    """Brute-force PSD test over every principal minor (small matrices)."""
    n = len(m)
    for size in range(1, n + 1):
        for idx in combinations(range(n), size):
            if determinant([[m[i][j] for j in idx] for i in idx]) < 0:
                return False
    return True


def primitive(v: Sequence[Fraction]) -> list[Fraction]:
    """Scale a nonzero rational vector to coprime integers, first nonzero entry kept in sign."""
    v = [Fraction(x) for x in v]
    den = lcm(*(x.denominator for x in v)) if v else 1
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return v
    return [Fraction(x // g) for x in ints]


def _two_by_two_witness(p, q, r):
    """Witness for [[p, q], [q, r]] with p, r >= 0 and p*r < q*q."""
    if r > 0:
        return [r, -q]
    if p > 0:
        return [q, -p]
    return [Fraction(1), Fraction(-1 if q > 0 else 1)]


def negative_direction(m: Matrix) -> list[Fraction] | None:
    """A rational vector ``a`` with ``a^T m a < 0``, or ``None`` if ``m`` is PSD.

    Small principal minors are tried first because they give short,
    readable witnesses; a symmetric elimination decides the rest exactly.
    """
    n = len(m)
    m = [[Fraction(x) for x in row] for row in m]
    for i in range(n):
        if m[i][i] < 0:
            return [Fraction(int(j == i)) for j in range(n)]
    for i, j in combinations(range(n), 2):
        p, q, r = m[i][i], m[i][j], m[j][j]
        if p * r < q * q:
            x, y = _two_by_two_witness(p, q, r)
            a = [Fraction(0)] * n
            a[i], a[j] = x, y
            return primitive(a)
    return _elimination_witness(m)


def _elimination_witness(m: list[list[Fraction]]) -> list[Fraction] | None:
    n = len(m)
    a = [row[:] for row in m]
    steps: list[tuple[int, dict[int, Fraction]]] = []
    active = list(range(n))
    while active:
        i = active[0]
        rest = active[1:]
        d = a[i][i]
        y = None
        if d < 0:
            y = {i: Fraction(1)}
        elif d == 0:
            j = next((j for j in rest if a[i][j]), None)
            if j is not None:
                x, z = _two_by_two_witness(Fraction(0), a[i][j], a[j][j])
                y = {i: x, j: z}
        if y is not None:
            vec = [Fraction(0)] * n
            for k, val in y.items():
                vec[k] = val
            for piv, coeffs in reversed(steps):
                vec[piv] = -sum((c * vec[k] for k, c in coeffs.items()), Fraction(0))
            return primitive(vec)
        if d > 0:
            coeffs = {j: a[i][j] / d for j in rest if a[i][j]}
            for j, cj in coeffs.items():
                for k in rest:
                    if a[i][k]:
                        a[j][k] -= cj * a[i][k]
            steps.append((i, coeffs))
        active = rest
    return None


def solve(a: Matrix, b: Sequence) -> list[Fraction]:
    """Solve ``a x = b`` exactly; raises ``ValueError`` if ``a`` is singular."""
    n = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((r for r in range(c, n) if aug[r][c]), None)
        if piv is None:
            raise ValueError("singular matrix")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c]:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return [row[n] for row in aug]


def interpolate(xs: Sequence, ys: Sequence) -> list[Fraction]:
    """Monomial coefficients (constant term first) of the interpolating
    polynomial, via Newton divided differences."""
    xs = [Fraction(x) for x in xs]
    coef = [Fraction(y) for y in ys]
    n = len(xs)
    if len(set(xs)) != n:
        raise ValueError("interpolation nodes must be distinct")
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - level])
    poly = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        # poly = poly * (x - xs[i]) + coef[i]
        shifted = [Fraction(0)] + poly[:-1]
        poly = [s - xs[i] * p for s, p in zip(shifted, poly)]
        poly[0] += coef[i]
    return poly

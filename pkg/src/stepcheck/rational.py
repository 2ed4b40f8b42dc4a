"""Parsing and rendering of exact rationals."""
from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from numbers import Rational

def to_fraction(value) -> Fraction:
    """Coerce ``value`` to a :class:`Fraction` without any rounding.

    Strings may be ``"p/q"`` or exact decimals such as ``"0.85"``.
    Floats are rejected because their binary expansion is rarely what
    the caller meant.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational literal")
        try:
            return Fraction(text)
        except ValueError as exc:
            raise ValueError(f"not a rational literal: {value!r}") from exc
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a string such as '0.85'")
    raise TypeError(f"cannot interpret {type(value).__name__} as a rational")


def format_fraction(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def round_decimal(value: Fraction, places: int = 6) -> str:
    """Round an exact rational to ``places`` decimals (half-even) as text."""
    value = Fraction(value)
    with localcontext() as ctx:
        ctx.prec = max(50, places + len(str(abs(value.numerator))) + 10)
        dec = Decimal(value.numerator) / Decimal(value.denominator)
        quant = Decimal(1).scaleb(-places)
        return str(dec.quantize(quant, rounding=ROUND_HALF_EVEN))


def exact_root(value: Fraction, k: int) -> Fraction:
    """Return the exact ``k``-th root of a nonnegative rational, or raise."""
    value = Fraction(value)
    if value < 0:
        raise ValueError("root of a negative rational")
    if k == 1:
        return value
    num = _int_root(value.numerator, k)
    den = _int_root(value.denominator, k)
    if num is None or den is None:
        raise ValueError(f"{format_fraction(value)} has no rational {k}-th root")
    return Fraction(num, den)


def _int_root(n: int, k: int) -> int | None:
    if n < 2:
        return n
    lo, hi = 0, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**k <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo if lo**k == n else None

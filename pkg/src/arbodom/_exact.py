"""Small exact-arithmetic helpers shared by the algorithm modules."""
from __future__ import annotations

import decimal
import math
from fractions import Fraction

ROOT_DENOM_BITS = 20


def parse_fraction(text: str | int | Fraction) -> Fraction:
    """Parse ``p/q`` (or a plain integer) into a Fraction.

    Decimal strings such as ``"0.1"`` are rejected on purpose: rational
    parameters must be written exactly.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    if "." in s or "e" in s.lower():
        raise ValueError(f"expected p/q rational, got {text!r}")
    return Fraction(s)


def format_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def ceil_log(base: Fraction, value: Fraction) -> int:
    """Smallest integer t >= 0 with base**t >= value (base > 1)."""
    if base <= 1:
        raise ValueError("base must exceed 1")
    t, acc = 0, Fraction(1)
    while acc < value:
        acc *= base
        t += 1
    return t


def rational_root_upper(value: int, k: int, bits: int = ROOT_DENOM_BITS) -> Fraction:
    """Smallest z / 2**bits with (z / 2**bits)**k >= value."""
    if value < 0 or k < 1:
        raise ValueError("need value >= 0 and k >= 1")
    scale = 1 << bits
    target = value * scale**k
    z = int(math.floor(value ** (1.0 / k) * scale))
    z = max(z - 2, 0)
    while z**k < target:
        z += 1
    while z > 0 and (z - 1) ** k >= target:
        z -= 1
    return Fraction(z, scale)


def decimal_string(q: Fraction, digits: int = 20) -> str:
    ctx = decimal.Context(prec=digits)
    return str(ctx.divide(decimal.Decimal(q.numerator), decimal.Decimal(q.denominator)))

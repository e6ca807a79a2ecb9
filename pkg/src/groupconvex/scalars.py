"""Exact scalar arithmetic helpers.

All quantities in this package are arbitrary-precision integers or
`fractions.Fraction` values; nothing here ever touches floating point.
Dyadic rationals are Fractions whose denominator is a power of two --
`Fraction` keeps them in lowest terms, so the numerator is odd whenever
the exponent is positive.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

Scalar = Union[int, Fraction]


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_scalar(value)
    raise TypeError(f"cannot interpret {value!r} as an exact scalar")


def as_int(value) -> int:
    """Coerce an exact scalar to int, rejecting genuine fractions."""
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    if isinstance(value, str):
        return as_int(parse_scalar(value))
    raise ValueError(f"{value!r} is not an integer scalar")


def is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


def dyadic_exponent(q: Fraction) -> int:
    """k such that q = p / 2^k in lowest terms (0 for integers)."""
    if not is_dyadic(q):
        raise ValueError(f"{q} is not a dyadic rational")
    return q.denominator.bit_length() - 1


def parse_scalar(text: str) -> Fraction:
    """Parse "p", "p/q" or "p/2^k" into an exact Fraction."""
    text = text.strip()
    if "/2^" in text:
        num, _, exp = text.partition("/2^")
        return Fraction(int(num), 2 ** int(exp))
    return Fraction(text)


def format_dyadic(q: Fraction) -> str:
    """Render a dyadic rational in the canonical "p/2^k" notation."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/2^{dyadic_exponent(q)}"


def format_rational(q: Scalar) -> str:
    return str(Fraction(q))


def int_root_floor(n: int, m: int) -> int:
    """floor(n ** (1/m)) for n >= 0, m >= 1, in exact integer arithmetic."""
    if n < 0:
        raise ValueError("negative radicand")
    if m < 1:
        raise ValueError("root index must be positive")
    if m == 1 or n in (0, 1):
        return n
    # Newton iteration on integers, then clamp defensively.
    x = 1 << (-(-n.bit_length() // m) + 1)
    while True:
        y = ((m - 1) * x + n // x ** (m - 1)) // m
        if y >= x:
            break
        x = y
    while x ** m > n:
        x -= 1
    while (x + 1) ** m <= n:
        x += 1
    return x


def _exact_root(q: Fraction, m: int) -> Fraction | None:
    rn = int_root_floor(q.numerator, m)
    rd = int_root_floor(q.denominator, m)
    if rn ** m == q.numerator and rd ** m == q.denominator:
        return Fraction(rn, rd)
    return None


def root_upper(q: Fraction, m: int, bits: int = 24) -> Fraction:
    """Certified rational upper bound on q ** (1/m) (exact when the root is rational)."""
    if q < 0:
        raise ValueError("negative radicand")
    exact = _exact_root(q, m)
    if exact is not None:
        return exact
    target = q.numerator << (bits * m)
    k = int_root_floor(target // q.denominator, m)
    while k ** m * q.denominator < target:
        k += 1
    return Fraction(k, 1 << bits)


def root_lower(q: Fraction, m: int, bits: int = 24) -> Fraction:
    """Certified rational lower bound on q ** (1/m) (exact when the root is rational)."""
    if q < 0:
        raise ValueError("negative radicand")
    exact = _exact_root(q, m)
    if exact is not None:
        return exact
    target = q.numerator << (bits * m)
    k = int_root_floor(target // q.denominator, m)
    while (k + 1) ** m * q.denominator <= target:
        k += 1
    while k > 0 and k ** m * q.denominator > target:
        k -= 1
    return Fraction(k, 1 << bits)

"""Exact rational scalars.

Every coefficient in this package is a gmpy2.mpq; no floating point is used
anywhere. INF is the marker for an omitted (unbounded) constraint.
"""

from __future__ import annotations

from typing import Union

from gmpy2 import mpq, mpz

Q = mpq
QLike = Union[int, str, mpq]

ZERO = mpq(0)
ONE = mpq(1)

INF = None  # +infinity marker for bound functions; never an mpq


def as_q(value: QLike) -> mpq:
    """Coerce an int, mpq, or "p/q" string to mpq; floats are rejected."""
    if isinstance(value, float):
        raise TypeError("floating point is not allowed; pass int, mpq, or 'p/q' string")
    return mpq(value)


def q_str(value: mpq) -> str:
    """Render as "p" or "p/q" (gmpy2's canonical lowest-terms form)."""
    return str(mpq(value))


def parse_bound(text: str):
    """Parse "p/q" or "inf" (case-insensitive) into mpq or INF."""
    if text.strip().lower() in ("inf", "+inf", "infinity"):
        return INF
    return mpq(text)


def is_integral(value: mpq) -> bool:
    return mpq(value).denominator == 1


def q_int(value: mpq) -> int:
    if not is_integral(value):
        raise ValueError(f"{value} is not an integer")
    return int(mpz(mpq(value).numerator))

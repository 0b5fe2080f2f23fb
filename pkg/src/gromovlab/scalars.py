"""Exact and high-precision scalar helpers.

Two scalar families are used throughout: ``fractions.Fraction`` (exact mode)
and ``decimal.Decimal`` (approximate mode, for constants like e**(n*n)).
A single space never mixes the two.  Comparisons between Decimals use a
relative tolerance; Fractions are compared exactly.
"""

from __future__ import annotations

from decimal import Decimal, InvalidOperation
from fractions import Fraction
from numbers import Rational
from typing import Union

Scalar = Union[Fraction, Decimal]

REL_TOL = Decimal("1e-30")
DEFAULT_PRECISION = 50


def to_scalar(value) -> Scalar:
    """Coerce ints, floats, strings, Fractions and Decimals to a Scalar.

    Floats are converted exactly (``Fraction(0.1)`` is not 1/10); pass
    strings if that matters.
    """
    if isinstance(value, (Fraction, Decimal)):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        return parse_scalar(value)
    raise TypeError(f"cannot interpret {value!r} as a scalar")


def parse_scalar(text: str, kind: str | None = None) -> Scalar:
    """Parse ``"314/100"``, ``"3"`` or ``"3.14"``.

    ``kind`` forces ``"rational"`` or ``"decimal"``; otherwise strings with a
    decimal point or exponent become Decimals.
    """
    text = text.strip()
    if kind is None:
        kind = "decimal" if any(c in text for c in ".eE") and "/" not in text else "rational"
    try:
        if kind == "rational":
            return Fraction(text)
        if kind == "decimal":
            return Decimal(text)
    except (ValueError, ZeroDivisionError, InvalidOperation) as exc:
        raise ValueError(f"malformed scalar {text!r}") from exc
    raise ValueError(f"unknown scalar kind {kind!r}")


def format_scalar(value: Scalar) -> str:
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return str(value)


def scalar_kind(value: Scalar) -> str:
    return "decimal" if isinstance(value, Decimal) else "rational"


def half(value: Scalar) -> Scalar:
    return value / 2


def _slack(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, Decimal) or isinstance(b, Decimal):
        return max(abs(Decimal(a) if not isinstance(a, Decimal) else a),
                   abs(Decimal(b) if not isinstance(b, Decimal) else b)) * REL_TOL
    return 0


def _as_decimal(value) -> Decimal:
    if isinstance(value, Fraction):
        return Decimal(value.numerator) / Decimal(value.denominator)
    return Decimal(value)


def _align(a, b):
    # Decimal and Fraction do not interoperate; promote to Decimal.
    if isinstance(a, Decimal) and not isinstance(b, Decimal):
        return a, _as_decimal(b)
    if isinstance(b, Decimal) and not isinstance(a, Decimal):
        return _as_decimal(a), b
    return a, b


def leq(a, b) -> bool:
    """a <= b, up to relative tolerance when Decimals are involved."""
    a, b = _align(a, b)
    return a <= b + _slack(a, b)


def lt(a, b) -> bool:
    """a < b strictly, beyond relative tolerance when Decimals are involved."""
    a, b = _align(a, b)
    return a < b - _slack(a, b)


def close(a, b) -> bool:
    a, b = _align(a, b)
    return abs(a - b) <= _slack(a, b)


def to_float(value) -> float:
    return float(value)

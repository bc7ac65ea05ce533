"""Fixed-precision number formatting for report files."""

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal


def round_half_even(value: float, digits: int) -> Decimal:
    # str() gives the shortest repr, so 2.675 rounds as the decimal 2.675 does.
    return Decimal(str(value)).quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN)


def fmt(value: float | int | None, digits: int = 2, missing: str = "") -> str:
    if value is None:
        return missing
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    d = round_half_even(value, digits)
    if d == 0:
        d = abs(d)  # no "-0.00"
    return f"{d:.{digits}f}"

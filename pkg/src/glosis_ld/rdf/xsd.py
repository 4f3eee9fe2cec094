"""Lexical-space checks and numeric conversion for the XSD datatypes in use."""

from __future__ import annotations

import re
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from .terms import RDF_LANGSTRING, XSD, XSD_STRING, Literal

_FLOAT = re.compile(r"^(?:[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?INF|NaN)$")
_DECIMAL = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)$")
_INTEGER = re.compile(r"^[+-]?\d+$")
_BOOLEAN = re.compile(r"^(?:true|false|1|0)$")
_DATE = r"-?\d{4,}-\d{2}-\d{2}"
_TZ = r"(?:Z|[+-]\d{2}:\d{2})?"
_DATETIME = re.compile(rf"^{_DATE}T\d{{2}}:\d{{2}}:\d{{2}}(?:\.\d+)?{_TZ}$")
_DATE_ONLY = re.compile(rf"^{_DATE}{_TZ}$")

FLOAT_TYPES = {XSD.float.value, XSD.double.value}
INTEGER_BOUNDS: dict[str, tuple[int | None, int | None]] = {
    XSD.integer.value: (None, None),
    XSD.nonNegativeInteger.value: (0, None),
    XSD.positiveInteger.value: (1, None),
    XSD.nonPositiveInteger.value: (None, 0),
    XSD.negativeInteger.value: (None, -1),
    XSD.long.value: (-(2**63), 2**63 - 1),
    XSD.int.value: (-(2**31), 2**31 - 1),
    XSD.short.value: (-(2**15), 2**15 - 1),
    XSD.byte.value: (-128, 127),
    XSD.unsignedLong.value: (0, 2**64 - 1),
    XSD.unsignedInt.value: (0, 2**32 - 1),
    XSD.unsignedShort.value: (0, 2**16 - 1),
    XSD.unsignedByte.value: (0, 255),
}
NUMERIC_TYPES = FLOAT_TYPES | {XSD.decimal.value} | set(INTEGER_BOUNDS)


def valid_lexical(lexical: str, datatype: str) -> bool:
    """Whether ``lexical`` is in the lexical space of ``datatype``.

    Datatypes outside the checked set are accepted as-is.
    """
    if datatype in FLOAT_TYPES:
        return bool(_FLOAT.match(lexical))
    if datatype == XSD.decimal.value:
        return bool(_DECIMAL.match(lexical))
    if datatype in INTEGER_BOUNDS:
        if not _INTEGER.match(lexical):
            return False
        low, high = INTEGER_BOUNDS[datatype]
        value = int(lexical)
        return (low is None or value >= low) and (high is None or value <= high)
    if datatype == XSD.boolean.value:
        return bool(_BOOLEAN.match(lexical))
    if datatype == XSD.dateTime.value:
        return bool(_DATETIME.match(lexical))
    if datatype == XSD.date.value:
        return bool(_DATE_ONLY.match(lexical))
    return True


def derives_from(actual: str, declared: str) -> bool:
    """Datatype compatibility: equality, integer subtypes under decimal, and
    language-tagged strings counting as strings."""
    if actual == declared:
        return True
    if declared == XSD.decimal.value and actual in INTEGER_BOUNDS:
        return True
    if declared == XSD.integer.value and actual in INTEGER_BOUNDS:
        return True
    if declared == XSD_STRING and actual == RDF_LANGSTRING:
        return True
    return False


def conforms(lit: Literal, declared: str) -> bool:
    return derives_from(lit.datatype.value, declared) and valid_lexical(lit.lexical, lit.datatype.value)


def numeric_value(lit: Literal) -> Fraction | float | None:
    """Value of a numeric literal: exact ``Fraction`` for integer/decimal,
    ``float`` for float/double; ``None`` for invalid or non-numeric literals."""
    dt = lit.datatype.value
    if dt not in NUMERIC_TYPES or not valid_lexical(lit.lexical, dt):
        return None
    if dt in FLOAT_TYPES:
        text = lit.lexical.replace("INF", "inf")
        return float(text)
    try:
        return Fraction(Decimal(lit.lexical))
    except (InvalidOperation, ValueError):
        return None

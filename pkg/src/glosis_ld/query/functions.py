"""Expression values: numeric promotion, comparison, casts and built-in calls.

Every failure inside an expression raises :class:`ExpressionError`; filters
treat that as false for the row, per the SPARQL error convention.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction

from ..geo import WKTError, parse_wkt, sf_intersects
from ..rdf import IRI, XSD, BNode, Literal
from ..rdf.terms import RDF_LANGSTRING, XSD_STRING
from ..rdf.xsd import INTEGER_BOUNDS, numeric_value, valid_lexical
from .parser import GEOF_SF_INTERSECTS

Number = Fraction | float
TRUE = Literal("true", XSD.boolean)
FALSE = Literal("false", XSD.boolean)

# numeric type promotion order
_RANK = {XSD.integer.value: 0, XSD.decimal.value: 1, XSD.float.value: 2, XSD.double.value: 3}


class ExpressionError(ValueError):
    pass


def boolean(value: bool) -> Literal:
    return TRUE if value else FALSE


def numeric_rank(lit: Literal) -> int:
    dt = lit.datatype.value
    if dt in INTEGER_BOUNDS:
        return 0
    if dt in _RANK:
        return _RANK[dt]
    raise ExpressionError(f"{lit.n3()} is not numeric")


def as_number(term) -> Number:
    if not isinstance(term, Literal):
        raise ExpressionError(f"{term} is not a numeric literal")
    value = numeric_value(term)
    if value is None:
        raise ExpressionError(f"{term.n3()} is not a valid numeric literal")
    return value


def is_numeric(term) -> bool:
    return isinstance(term, Literal) and numeric_value(term) is not None


def _common(a: Number, b: Number) -> tuple[Number, Number]:
    if isinstance(a, float) or isinstance(b, float):
        return float(a), float(b)
    return a, b


def format_number(value: Number, rank: int) -> Literal:
    """A literal for ``value`` typed by promotion ``rank``."""
    if rank >= 2:
        dt = XSD.double if rank == 3 else XSD.float
        v = float(value)
        if math.isnan(v):
            return Literal("NaN", dt)
        if math.isinf(v):
            return Literal("INF" if v > 0 else "-INF", dt)
        return Literal(repr(v), dt)
    if rank == 0 and isinstance(value, Fraction) and value.denominator == 1:
        return Literal(str(value.numerator), XSD.integer)
    return Literal(decimal_text(Fraction(value)), XSD.decimal)


def decimal_text(value: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = 30
        d = Decimal(value.numerator) / Decimal(value.denominator)
    text = format(d.normalize(), "f")
    return text if "." in text else text + ".0"


def ebv(term) -> bool:
    """Effective boolean value."""
    if isinstance(term, Literal):
        dt = term.datatype.value
        if dt == XSD.boolean.value:
            if not valid_lexical(term.lexical, dt):
                raise ExpressionError(f"invalid boolean {term.lexical!r}")
            return term.lexical in ("true", "1")
        if dt in (XSD_STRING, RDF_LANGSTRING):
            return bool(term.lexical)
        if is_numeric(term):
            v = as_number(term)
            return not (v == 0 or (isinstance(v, float) and math.isnan(v)))
    raise ExpressionError(f"no effective boolean value for {term}")


def _is_stringlike(term) -> bool:
    return isinstance(term, Literal) and term.datatype.value in (XSD_STRING, RDF_LANGSTRING)


def compare(op: str, a, b) -> bool:
    """Relational operators. Numbers compare by value across integer, decimal,
    float and double; strings and dates compare lexically; any other mix is an
    error except for (in)equality, which falls back to term identity."""
    if is_numeric(a) and is_numeric(b):
        x, y = _common(as_number(a), as_number(b))
        return {"=": x == y, "!=": x != y, "<": x < y, ">": x > y, "<=": x <= y, ">=": x >= y}[op]
    if op in ("=", "!="):
        same = a == b
        return same if op == "=" else not same
    if isinstance(a, Literal) and isinstance(b, Literal) and a.datatype == b.datatype and a.lang == b.lang \
            and (_is_stringlike(a) or a.datatype.value in (XSD.dateTime.value, XSD.date.value)):
        x, y = a.lexical, b.lexical
        return {"<": x < y, ">": x > y, "<=": x <= y, ">=": x >= y}[op]
    raise ExpressionError(f"cannot order {a} and {b}")


def arithmetic(op: str, a, b) -> Literal:
    x, y = as_number(a), as_number(b)
    rank = max(numeric_rank(a), numeric_rank(b))
    x, y = _common(x, y)
    if op == "+":
        r = x + y
    elif op == "-":
        r = x - y
    elif op == "*":
        r = x * y
    elif op == "/":
        if y == 0 and not isinstance(y, float):
            raise ExpressionError("division by zero")
        if isinstance(y, float) and y == 0:
            r = math.copysign(math.inf, x) if x != 0 else math.nan
        else:
            r = x / y
        rank = max(rank, 1)
    else:
        raise ExpressionError(f"unknown operator {op}")
    return format_number(r, rank)


def negate(a) -> Literal:
    return format_number(-as_number(a), numeric_rank(a))


def cast(target: str, term) -> Literal:
    """XSD constructor functions over literals."""
    if target == XSD.string.value:
        if isinstance(term, BNode):
            raise ExpressionError("cannot cast a blank node to a string")
        return Literal(term.value if isinstance(term, IRI) else term.lexical)
    if not isinstance(term, Literal):
        raise ExpressionError(f"cannot cast {term} to {target}")
    dt = term.datatype.value
    lexical = term.lexical.strip()
    if target == XSD.integer.value:
        if dt in INTEGER_BOUNDS or (dt in (XSD_STRING,) and valid_lexical(lexical, target)):
            if not valid_lexical(lexical, XSD.integer.value):
                raise ExpressionError(f"{lexical!r} is not an integer")
            return Literal(str(int(lexical)), XSD.integer)
        if is_numeric(term):
            v = as_number(term)
            if isinstance(v, float) and (math.isnan(v) or math.isinf(v)):
                raise ExpressionError(f"cannot cast {lexical} to an integer")
            return Literal(str(int(v)), XSD.integer)
        raise ExpressionError(f"cannot cast {term.n3()} to xsd:integer")
    if target == XSD.decimal.value:
        if is_numeric(term):
            v = as_number(term)
            if isinstance(v, float) and (math.isnan(v) or math.isinf(v)):
                raise ExpressionError(f"cannot cast {lexical} to a decimal")
            return Literal(decimal_text(Fraction(v)), XSD.decimal)
        if dt == XSD_STRING and valid_lexical(lexical, target):
            return Literal(decimal_text(Fraction(Decimal(lexical))), XSD.decimal)
        raise ExpressionError(f"cannot cast {term.n3()} to xsd:decimal")
    if target in (XSD.float.value, XSD.double.value):
        if is_numeric(term):
            return Literal(repr(float(as_number(term))), IRI(target))
        if dt == XSD_STRING and valid_lexical(lexical, target):
            return Literal(lexical, IRI(target))
        raise ExpressionError(f"cannot cast {term.n3()} to {target}")
    raise ExpressionError(f"no cast to {target}")


def _wkt(term):
    if not isinstance(term, Literal):
        raise ExpressionError(f"{term} is not a WKT literal")
    try:
        return parse_wkt(term.lexical)
    except WKTError as exc:
        raise ExpressionError(str(exc)) from None


def call(name: str, args: list) -> Literal:
    """Invoke a cast, ``geof:sfIntersects`` or a keyword built-in on evaluated
    arguments. ``BOUND`` is handled by the evaluator."""
    if name == GEOF_SF_INTERSECTS:
        return boolean(sf_intersects(_wkt(args[0]), _wkt(args[1])))
    if name == "TEXTCONTAINS":
        text, needle = args
        if not isinstance(text, Literal) or not isinstance(needle, Literal):
            raise ExpressionError("textContains expects two literals")
        return boolean(needle.lexical in text.lexical)
    if name == "STR":
        (term,) = args
        if isinstance(term, IRI):
            return Literal(term.value)
        if isinstance(term, Literal):
            return Literal(term.lexical)
        raise ExpressionError("STR of a blank node")
    if ":" in name:
        return cast(name, args[0])
    raise ExpressionError(f"unknown function {name}")


def term_order_key(term) -> tuple:
    """Total order used by ORDER BY: unbound, blank nodes, IRIs, then literals
    (numbers by value ahead of other literals)."""
    if term is None:
        return (0,)
    if isinstance(term, BNode):
        return (1, term.label)
    if isinstance(term, IRI):
        return (2, term.value)
    if is_numeric(term):
        v = as_number(term)
        return (3, 0, float(v) if isinstance(v, float) else v, term.lexical)
    return (3, 1, term.lexical, term.datatype.value, term.lang or "")

"""Syntax tree for the supported SPARQL subset, plus a serializer back to query
text and a shape function used to compare trees up to their constants."""

from __future__ import annotations

from dataclasses import dataclass, fields, is_dataclass
from typing import Union

from ..rdf import IRI, XSD, BNode, Literal
from ..rdf.terms import XSD_STRING


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


Term = Union[IRI, Literal, BNode]
Node = Union[Var, IRI, Literal, BNode]


# -- property paths -----------------------------------------------------------------

@dataclass(frozen=True)
class PathPredicate:
    iri: IRI


@dataclass(frozen=True)
class PathSequence:
    steps: tuple[Path, ...]

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("a path sequence needs at least one step")


@dataclass(frozen=True)
class PathAlternative:
    options: tuple[Path, ...]

    def __post_init__(self) -> None:
        if not self.options:
            raise ValueError("a path alternative needs at least one option")


@dataclass(frozen=True)
class PathZeroOrMore:
    path: Path


Path = Union[PathPredicate, PathSequence, PathAlternative, PathZeroOrMore]


# -- expressions ----------------------------------------------------------------------

@dataclass(frozen=True)
class Call:
    """A function call. ``name`` is an absolute IRI for casts and extension
    functions, or an upper-cased keyword for built-ins (``STR``, ``BOUND``,
    ``TEXTCONTAINS``)."""

    name: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class UnaryOp:
    op: str
    operand: Expr


@dataclass(frozen=True)
class Aggregate:
    func: str  # AVG or COUNT
    distinct: bool
    expr: Expr | None  # None means COUNT(*)


Expr = Union[Var, IRI, Literal, Call, BinaryOp, UnaryOp, Aggregate]


# -- graph patterns -------------------------------------------------------------------

@dataclass(frozen=True)
class TriplePattern:
    subject: Node
    predicate: Union[Var, IRI, Path]
    object: Node


@dataclass(frozen=True)
class BGP:
    triples: tuple[TriplePattern, ...]


@dataclass(frozen=True)
class Filter:
    expr: Expr


@dataclass(frozen=True)
class Union_:
    branches: tuple[Group, ...]


@dataclass(frozen=True)
class SubSelect:
    query: SelectQuery


@dataclass(frozen=True)
class Service:
    endpoint: IRI | Var
    silent: bool
    group: Group


@dataclass(frozen=True)
class Group:
    elements: tuple[Element, ...]


Element = Union[BGP, Filter, Union_, SubSelect, Service, Group]


@dataclass(frozen=True)
class SelectItem:
    var: Var
    expr: Expr | None = None  # None: plain projected variable


@dataclass(frozen=True)
class OrderKey:
    expr: Expr
    descending: bool = False


@dataclass(frozen=True)
class SelectQuery:
    items: tuple[SelectItem, ...] | None  # None is SELECT *
    where: Group
    distinct: bool = False
    order_by: tuple[OrderKey, ...] = ()
    limit: int | None = None
    prefixes: tuple[tuple[str, str], ...] = ()

    def has_aggregates(self) -> bool:
        return any(item.expr is not None and contains_aggregate(item.expr) for item in self.items or ())

    def projected(self) -> list[str]:
        if self.items is not None:
            return [item.var.name for item in self.items]
        return visible_vars(self.where)


def contains_aggregate(expr: Expr) -> bool:
    if isinstance(expr, Aggregate):
        return True
    if isinstance(expr, Call):
        return any(contains_aggregate(a) for a in expr.args)
    if isinstance(expr, BinaryOp):
        return contains_aggregate(expr.left) or contains_aggregate(expr.right)
    if isinstance(expr, UnaryOp):
        return contains_aggregate(expr.operand)
    return False


def visible_vars(group: Group) -> list[str]:
    """In-scope variables of a pattern in order of first appearance; hidden
    (blank-node) variables start with an underscore-colon and are skipped."""
    seen: list[str] = []

    def note(node) -> None:
        if isinstance(node, Var) and not node.name.startswith("_:") and node.name not in seen:
            seen.append(node.name)

    def walk(el) -> None:
        if isinstance(el, Group):
            for e in el.elements:
                walk(e)
        elif isinstance(el, BGP):
            for t in el.triples:
                note(t.subject)
                note(t.predicate)
                note(t.object)
        elif isinstance(el, Union_):
            for b in el.branches:
                walk(b)
        elif isinstance(el, SubSelect):
            for name in el.query.projected():
                note(Var(name))
        elif isinstance(el, Service):
            walk(el.group)

    walk(group)
    return seen


# -- serialization ------------------------------------------------------------------

_IRI_UNSAFE = set('<>"{}|^`\\')


def iri_text(iri: IRI) -> str:
    out = []
    for ch in iri.value:
        if ch in _IRI_UNSAFE or ord(ch) <= 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "<" + "".join(out) + ">"


def string_text(text: str) -> str:
    out = ['"']
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def term_text(node: Node) -> str:
    if isinstance(node, Var):
        if node.name.startswith("_:"):
            return node.name
        return f"?{node.name}"
    if isinstance(node, IRI):
        return iri_text(node)
    if isinstance(node, BNode):
        return f"_:{node.label}"
    if node.lang:
        return f"{string_text(node.lexical)}@{node.lang}"
    if node.datatype.value == XSD_STRING:
        return string_text(node.lexical)
    return f"{string_text(node.lexical)}^^{iri_text(node.datatype)}"


def path_text(path) -> str:
    if isinstance(path, (Var, IRI)):
        return term_text(path)
    if isinstance(path, PathPredicate):
        return iri_text(path.iri)
    if isinstance(path, PathSequence):
        return "(" + "/".join(path_text(s) for s in path.steps) + ")"
    if isinstance(path, PathAlternative):
        return "(" + "|".join(path_text(s) for s in path.options) + ")"
    if isinstance(path, PathZeroOrMore):
        return "(" + path_text(path.path) + ")*"
    raise TypeError(f"not a path: {path!r}")


def expr_text(expr: Expr) -> str:
    if isinstance(expr, (Var, IRI, Literal)):
        return term_text(expr)
    if isinstance(expr, Call):
        args = ", ".join(expr_text(a) for a in expr.args)
        name = iri_text(IRI(expr.name)) if ":" in expr.name else expr.name
        return f"{name}({args})"
    if isinstance(expr, BinaryOp):
        return f"({expr_text(expr.left)} {expr.op} {expr_text(expr.right)})"
    if isinstance(expr, UnaryOp):
        return f"({expr.op}{expr_text(expr.operand)})"
    if isinstance(expr, Aggregate):
        inner = "*" if expr.expr is None else expr_text(expr.expr)
        return f"{expr.func}({'DISTINCT ' if expr.distinct else ''}{inner})"
    raise TypeError(f"not an expression: {expr!r}")


def _group_text(group: Group, indent: int) -> str:
    pad = "  " * indent
    if len(group.elements) == 1 and isinstance(group.elements[0], SubSelect):
        # the parser reads "{ SELECT ... }" as a group holding only the sub-select
        return _element_text(group.elements[0], indent)
    lines = ["{"]
    for el in group.elements:
        lines.append(pad + "  " + _element_text(el, indent + 1))
    lines.append(pad + "}")
    return "\n".join(lines)


def _element_text(el: Element, indent: int) -> str:
    pad = "  " * indent
    if isinstance(el, BGP):
        return (" .\n" + pad).join(
            f"{term_text(t.subject)} {path_text(t.predicate)} {term_text(t.object)}" for t in el.triples
        ) + " ."
    if isinstance(el, Filter):
        return f"FILTER ({expr_text(el.expr)})"
    if isinstance(el, Union_):
        return " UNION ".join(_group_text(b, indent) for b in el.branches)
    if isinstance(el, SubSelect):
        return "{ " + _select_text(el.query, indent + 1) + " }"
    if isinstance(el, Service):
        silent = "SILENT " if el.silent else ""
        return f"SERVICE {silent}{term_text(el.endpoint)} {_group_text(el.group, indent)}"
    if isinstance(el, Group):
        return _group_text(el, indent)
    raise TypeError(f"not a pattern element: {el!r}")


def _select_text(q: SelectQuery, indent: int) -> str:
    parts = ["SELECT"]
    if q.distinct:
        parts.append("DISTINCT")
    if q.items is None:
        parts.append("*")
    else:
        for item in q.items:
            if item.expr is None:
                parts.append(term_text(item.var))
            else:
                parts.append(f"({expr_text(item.expr)} AS {term_text(item.var)})")
    text = " ".join(parts) + " WHERE " + _group_text(q.where, indent)
    if q.order_by:
        keys = " ".join(
            f"{'DESC' if k.descending else 'ASC'}({expr_text(k.expr)})" for k in q.order_by
        )
        text += f" ORDER BY {keys}"
    if q.limit is not None:
        text += f" LIMIT {q.limit}"
    return text


def to_sparql(query: SelectQuery) -> str:
    """Query text that parses back to an equivalent tree. All IRIs are written
    in full, so prefix declarations are not needed."""
    return _select_text(query, 0) + "\n"


def group_as_select(group: Group) -> str:
    """``SELECT * WHERE { group }`` text, as sent to a SERVICE endpoint."""
    return to_sparql(SelectQuery(items=None, where=group))


# -- structure comparison -----------------------------------------------------------

def ast_shape(node) -> object:
    """The tree with every constant RDF term reduced to its kind.

    Two queries with equal shapes differ only in the IRIs and literals they
    mention, never in their patterns, operators or variables. Prefix
    declarations are ignored.
    """
    if isinstance(node, IRI):
        return "IRI"
    if isinstance(node, Literal):
        return "Literal"
    if isinstance(node, BNode):
        return "BNode"
    if isinstance(node, Var):
        return ("Var", node.name)
    if isinstance(node, tuple):
        return tuple(ast_shape(n) for n in node)
    if is_dataclass(node):
        return (type(node).__name__,) + tuple(
            ast_shape(getattr(node, f.name)) for f in fields(node) if f.name != "prefixes"
        )
    return node


XSD_CASTS = {XSD.integer.value, XSD.float.value, XSD.double.value, XSD.decimal.value, XSD.string.value}

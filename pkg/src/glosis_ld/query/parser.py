"""Recursive-descent parser for the supported SPARQL SELECT subset.

Anything outside the subset is rejected with :class:`UnsupportedFeatureError`
naming the feature, rather than being misread.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..rdf import GLOSIS_PREFIXES, IRI, XSD, Literal
from .ast import (
    BGP, XSD_CASTS, Aggregate, BinaryOp, Call, Expr, Filter, Group, OrderKey, PathAlternative, PathPredicate,
    PathSequence, PathZeroOrMore, SelectItem, SelectQuery, Service, SubSelect, TriplePattern, UnaryOp, Union_,
    Var,
)

RDF_TYPE = IRI("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")
GEOF_SF_INTERSECTS = "http://www.opengis.net/def/function/geosparql/sfIntersects"
BUILTINS = {"STR", "BOUND", "TEXTCONTAINS"}
KNOWN_FUNCTIONS = XSD_CASTS | {GEOF_SF_INTERSECTS}

DEFAULT_QUERY_PREFIXES = {
    **GLOSIS_PREFIXES,
    "g_sp": GLOSIS_PREFIXES["glosis_sp"],
    "g_pr": GLOSIS_PREFIXES["glosis_pr"],
    "g_lh": GLOSIS_PREFIXES["glosis_lh"],
    "g_cl": GLOSIS_PREFIXES["glosis_cl"],
    "g_pd": GLOSIS_PREFIXES["glosis_proc"],
    "ramon": "http://rdfdata.eionet.europa.eu/ramon/ontology/",
}

UNSUPPORTED_KEYWORDS = {
    "CONSTRUCT", "ASK", "DESCRIBE", "OPTIONAL", "MINUS", "BIND", "VALUES", "GRAPH", "GROUP", "HAVING",
    "OFFSET", "FROM", "NAMED", "INSERT", "DELETE", "LOAD", "CLEAR", "DROP", "CREATE", "REDUCED", "EXISTS",
    "NOT", "IN", "SUM", "MIN", "MAX", "SAMPLE", "GROUP_CONCAT", "REGEX", "BASE",
}


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UnsupportedFeatureError(ValueError):
    """Raised for SPARQL constructs outside the supported subset."""

    def __init__(self, feature: str, line: int = 0, column: int = 0) -> None:
        where = f" at line {line}, column {column}" if line else ""
        super().__init__(f"unsupported SPARQL feature: {feature}{where}")
        self.feature = feature


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


_TOKEN_SPEC = [
    ("WS", r"\s+|#[^\n]*"),
    ("IRIREF", r"<(?:[^<>\"{}|^`\\\x00-\x20]|\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8})*>"),
    ("VAR", r"[?$][A-Za-z0-9_][A-Za-z0-9_]*"),
    ("BNODE", r"_:[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?"),
    ("STRING", r'"""(?:[^"\\]|\\.|"(?!""))*"""' + r"|'''(?:[^'\\]|\\.|'(?!''))*'''"
               + r'|"(?:[^"\\\n\r]|\\.)*"' + r"|'(?:[^'\\\n\r]|\\.)*'"),
    ("LANGTAG", r"@[A-Za-z]+(?:-[A-Za-z0-9]+)*"),
    ("NUMBER", r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"),
    ("PNAME", r"(?:[A-Za-z](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)?:(?:(?:[A-Za-z0-9_\-:%]|\.(?=[A-Za-z0-9_\-:%]))*)"),
    ("NAME", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("OP", r"\^\^|&&|\|\||!=|<=|>=|[{}().;,*|/^+?!=<>\[\]-]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{rx})" for name, rx in _TOKEN_SPEC))
_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", "b": "\b", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
_UCHAR = re.compile(r"\\u([0-9A-Fa-f]{4})|\\U([0-9A-Fa-f]{8})")


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            line, col = _line_col(text, pos)
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind != "WS":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("EOF", "", len(text)))
    return tokens


def _unescape_string(body: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        nxt = body[i + 1]
        if nxt in _ESCAPES:
            out.append(_ESCAPES[nxt])
            i += 2
        elif nxt == "u":
            out.append(chr(int(body[i + 2:i + 6], 16)))
            i += 6
        elif nxt == "U":
            out.append(chr(int(body[i + 2:i + 10], 16)))
            i += 10
        else:
            raise ValueError(f"invalid escape \\{nxt}")
    return "".join(out)


class _Parser:
    def __init__(self, text: str, prefixes: dict[str, str]) -> None:
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.prefixes = dict(prefixes)
        self.declared: list[tuple[str, str]] = []
        self.bnode_vars = 0

    # -- token helpers -----------------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message: str, token: Token | None = None) -> QuerySyntaxError:
        token = token or self.tok
        line, col = _line_col(self.text, token.pos)
        return QuerySyntaxError(message, line, col)

    def unsupported(self, feature: str, token: Token | None = None) -> UnsupportedFeatureError:
        token = token or self.tok
        line, col = _line_col(self.text, token.pos)
        return UnsupportedFeatureError(feature, line, col)

    def is_keyword(self, word: str, token: Token | None = None) -> bool:
        token = token or self.tok
        return token.kind == "NAME" and token.text.upper() == word

    def accept_keyword(self, word: str) -> bool:
        if self.is_keyword(word):
            self.i += 1
            return True
        return False

    def expect_keyword(self, word: str) -> None:
        if not self.accept_keyword(word):
            self.reject_unsupported()
            raise self.error(f"expected {word}, found {self.tok.text or 'end of query'!r}")

    def is_op(self, op: str) -> bool:
        return self.tok.kind == "OP" and self.tok.text == op

    def accept_op(self, op: str) -> bool:
        if self.is_op(op):
            self.i += 1
            return True
        return False

    def expect_op(self, op: str) -> None:
        if not self.accept_op(op):
            self.reject_unsupported()
            raise self.error(f"expected {op!r}, found {self.tok.text or 'end of query'!r}")

    def reject_unsupported(self) -> None:
        if self.tok.kind == "NAME" and self.tok.text.upper() in UNSUPPORTED_KEYWORDS:
            raise self.unsupported(self.tok.text.upper())

    # -- terms -------------------------------------------------------------------------
    def iri_ref(self, token: Token) -> IRI:
        body = token.text[1:-1]
        body = _UCHAR.sub(lambda m: chr(int(m.group(1) or m.group(2), 16)), body)
        return IRI(body)

    def pname(self, token: Token) -> IRI:
        prefix, _, local = token.text.partition(":")
        if prefix not in self.prefixes:
            raise self.error(f"undefined prefix {prefix!r}", token)
        return IRI(self.prefixes[prefix] + local)

    def iri(self) -> IRI:
        t = self.advance()
        if t.kind == "IRIREF":
            return self.iri_ref(t)
        if t.kind == "PNAME":
            return self.pname(t)
        self.i -= 1
        raise self.error(f"expected an IRI, found {t.text or 'end of query'!r}", t)

    def literal(self) -> Literal:
        t = self.advance()
        if t.kind == "STRING":
            quote = 3 if t.text[:3] in ('"""', "'''") else 1
            try:
                lexical = _unescape_string(t.text[quote:-quote])
            except (ValueError, IndexError) as exc:
                raise self.error(str(exc), t) from None
            if self.tok.kind == "LANGTAG":
                return Literal(lexical, lang=self.advance().text[1:].lower())
            if self.accept_op("^^"):
                return Literal(lexical, self.iri())
            return Literal(lexical)
        if t.kind == "NUMBER":
            return self.number_literal(t.text)
        if t.kind == "NAME" and t.text in ("true", "false"):
            return Literal(t.text, XSD.boolean)
        self.i -= 1
        raise self.error(f"expected a literal, found {t.text or 'end of query'!r}", t)

    @staticmethod
    def number_literal(text: str) -> Literal:
        if "e" in text.lower():
            return Literal(text, XSD.double)
        if "." in text:
            return Literal(text, XSD.decimal)
        return Literal(text, XSD.integer)

    def var_or_term(self, allow_literal: bool = True):
        t = self.tok
        if t.kind == "VAR":
            self.i += 1
            return Var(t.text[1:])
        if t.kind == "BNODE":
            self.i += 1
            return Var(t.text)
        if t.kind in ("IRIREF", "PNAME"):
            return self.iri()
        if allow_literal and (t.kind in ("STRING", "NUMBER") or (t.kind == "NAME" and t.text in ("true", "false"))):
            return self.literal()
        if allow_literal and t.kind == "OP" and t.text in "+-" and self.peek().kind == "NUMBER":
            sign = self.advance().text
            lit = self.literal()
            return Literal(("-" if sign == "-" else "") + lit.lexical, lit.datatype)
        if t.kind == "OP" and t.text == "[":
            if self.peek().kind == "OP" and self.peek().text == "]":
                self.i += 2
                self.bnode_vars += 1
                return Var(f"_:anon{self.bnode_vars}")
            raise self.unsupported("blank node property list")
        if t.kind == "OP" and t.text == "(":
            raise self.unsupported("RDF collection in a triple pattern")
        self.reject_unsupported()
        raise self.error(f"expected a variable or RDF term, found {t.text or 'end of query'!r}")

    # -- query ---------------------------------------------------------------------------
    def query(self) -> SelectQuery:
        while self.is_keyword("PREFIX"):
            self.advance()
            t = self.advance()
            if t.kind != "PNAME" or not t.text.endswith(":") or t.text.count(":") != 1:
                raise self.error("expected a prefix name ending in ':'", t)
            iri = self.iri()
            self.prefixes[t.text[:-1]] = iri.value
            self.declared.append((t.text[:-1], iri.value))
        if not self.is_keyword("SELECT"):
            self.reject_unsupported()
            raise self.error("expected SELECT")
        q = self.select()
        if self.tok.kind != "EOF":
            self.reject_unsupported()
            raise self.error(f"unexpected {self.tok.text!r} after the query")
        return SelectQuery(q.items, q.where, q.distinct, q.order_by, q.limit, tuple(self.declared))

    def select(self) -> SelectQuery:
        self.expect_keyword("SELECT")
        distinct = self.accept_keyword("DISTINCT")
        items: list[SelectItem] | None = []
        if self.accept_op("*"):
            items = None
        else:
            while True:
                item = self.select_item(len(items))
                if item is None:
                    break
                items.append(item)
            if not items:
                raise self.error("SELECT needs at least one variable or expression")
        self.accept_keyword("WHERE")
        where = self.group()
        order: list[OrderKey] = []
        if self.is_keyword("ORDER"):
            self.advance()
            self.expect_keyword("BY")
            while True:
                key = self.order_key()
                if key is None:
                    break
                order.append(key)
            if not order:
                raise self.error("ORDER BY needs at least one key")
        limit = None
        if self.accept_keyword("LIMIT"):
            t = self.advance()
            if t.kind != "NUMBER" or not t.text.isdigit():
                raise self.error("LIMIT expects a non-negative integer", t)
            limit = int(t.text)
        self.reject_unsupported()
        q = SelectQuery(None if items is None else tuple(items), where, distinct, tuple(order), limit)
        self.check_projection(q)
        return q

    def check_projection(self, q: SelectQuery) -> None:
        if q.items is None:
            return
        names = [item.var.name for item in q.items]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise self.error(f"variable(s) projected twice: {', '.join(dupes)}")
        if q.has_aggregates():
            plain = [item.var.name for item in q.items if item.expr is None]
            if plain:
                raise self.unsupported(f"projecting ?{plain[0]} next to an aggregate without GROUP BY")

    def select_item(self, index: int) -> SelectItem | None:
        t = self.tok
        if t.kind == "VAR":
            self.advance()
            return SelectItem(Var(t.text[1:]))
        if t.kind == "OP" and t.text == "(":
            self.advance()
            expr = self.expression(allow_aggregate=True)
            self.expect_keyword("AS")
            var = self.variable()
            self.expect_op(")")
            return SelectItem(var, expr)
        if t.kind == "NAME" and t.text.upper() in ("AVG", "COUNT"):
            agg = self.aggregate()
            if self.accept_keyword("AS"):
                return SelectItem(self.variable(), agg)
            inner = agg.expr.name if isinstance(agg.expr, Var) else "all"
            return SelectItem(Var(f"{agg.func.lower()}_{inner}" if index == 0 else f"{agg.func.lower()}_{inner}_{index}"), agg)
        return None

    def variable(self) -> Var:
        t = self.advance()
        if t.kind != "VAR":
            self.i -= 1
            raise self.error(f"expected a variable, found {t.text or 'end of query'!r}", t)
        return Var(t.text[1:])

    def order_key(self) -> OrderKey | None:
        t = self.tok
        if t.kind == "NAME" and t.text.upper() in ("ASC", "DESC"):
            self.advance()
            self.expect_op("(")
            expr = self.expression(allow_aggregate=False)
            self.expect_op(")")
            return OrderKey(expr, t.text.upper() == "DESC")
        if t.kind == "VAR":
            self.advance()
            return OrderKey(Var(t.text[1:]))
        if t.kind == "OP" and t.text == "(":
            self.advance()
            expr = self.expression(allow_aggregate=False)
            self.expect_op(")")
            return OrderKey(expr)
        return None

    # -- patterns ------------------------------------------------------------------------
    def group(self) -> Group:
        self.expect_op("{")
        if self.is_keyword("SELECT"):
            sub = self.select()
            self.expect_op("}")
            return Group((SubSelect(sub),))
        elements: list = []
        triples: list[TriplePattern] = []

        def flush() -> None:
            if triples:
                elements.append(BGP(tuple(triples)))
                triples.clear()

        while not self.is_op("}"):
            t = self.tok
            if t.kind == "EOF":
                raise self.error("unterminated group: expected '}'")
            if self.is_op("{"):
                flush()
                branches = [self.group()]
                while self.accept_keyword("UNION"):
                    branches.append(self.group())
                elements.append(Union_(tuple(branches)) if len(branches) > 1 else branches[0])
                self.accept_op(".")
            elif self.is_keyword("FILTER"):
                flush()
                self.advance()
                elements.append(Filter(self.constraint()))
                self.accept_op(".")
            elif self.is_keyword("SERVICE"):
                flush()
                self.advance()
                silent = self.accept_keyword("SILENT")
                if self.tok.kind == "VAR":
                    if not self.tok.text[1:].startswith("_"):
                        raise self.unsupported("SERVICE with a variable endpoint")
                    endpoint = Var(self.advance().text[1:])  # template placeholder, bound before evaluation
                else:
                    endpoint = self.iri()
                elements.append(Service(endpoint, silent, self.group()))
                self.accept_op(".")
            elif t.kind == "NAME" and t.text.upper() in UNSUPPORTED_KEYWORDS:
                raise self.unsupported(t.text.upper())
            else:
                self.triples_same_subject(triples)
                if not self.accept_op("."):
                    if not self.is_op("}") and not self.is_op("{") and not self.is_keyword("FILTER") \
                            and not self.is_keyword("SERVICE"):
                        self.reject_unsupported()
                        raise self.error(f"expected '.' or '}}', found {self.tok.text or 'end of query'!r}")
        self.advance()
        flush()
        return Group(tuple(elements))

    def triples_same_subject(self, out: list[TriplePattern]) -> None:
        subject = self.var_or_term(allow_literal=False)
        while True:
            predicate = self.verb()
            while True:
                obj = self.var_or_term()
                out.append(TriplePattern(subject, predicate, obj))
                if not self.accept_op(","):
                    break
            if not self.accept_op(";"):
                return
            while self.accept_op(";"):
                pass
            if self.is_op(".") or self.is_op("}"):
                return

    def verb(self):
        if self.tok.kind == "VAR":
            return Var(self.advance().text[1:])
        path = self.path_alternative()
        return path.iri if isinstance(path, PathPredicate) else path

    def path_alternative(self):
        options = [self.path_sequence()]
        while self.accept_op("|"):
            options.append(self.path_sequence())
        return options[0] if len(options) == 1 else PathAlternative(tuple(options))

    def path_sequence(self):
        steps = [self.path_element()]
        while self.accept_op("/"):
            steps.append(self.path_element())
        return steps[0] if len(steps) == 1 else PathSequence(tuple(steps))

    def path_element(self):
        t = self.tok
        if t.kind == "OP" and t.text == "^":
            raise self.unsupported("inverse property path '^'")
        if t.kind == "OP" and t.text == "!":
            raise self.unsupported("negated property set '!'")
        if t.kind == "OP" and t.text == "(":
            self.advance()
            primary = self.path_alternative()
            self.expect_op(")")
        elif t.kind == "NAME" and t.text == "a":
            self.advance()
            primary = PathPredicate(RDF_TYPE)
        elif t.kind in ("IRIREF", "PNAME"):
            primary = PathPredicate(self.iri())
        else:
            self.reject_unsupported()
            raise self.error(f"expected a predicate, found {t.text or 'end of query'!r}")
        if self.is_op("*"):
            self.advance()
            return PathZeroOrMore(primary)
        if self.is_op("+") or self.is_op("?"):
            raise self.unsupported(f"property path modifier '{self.tok.text}'")
        return primary

    # -- expressions -----------------------------------------------------------------------
    def constraint(self) -> Expr:
        if self.is_op("("):
            self.advance()
            expr = self.expression(allow_aggregate=False)
            self.expect_op(")")
            return expr
        return self.primary(allow_aggregate=False)

    def expression(self, allow_aggregate: bool) -> Expr:
        left = self.and_expr(allow_aggregate)
        while self.accept_op("||"):
            left = BinaryOp("||", left, self.and_expr(allow_aggregate))
        return left

    def and_expr(self, allow_aggregate: bool) -> Expr:
        left = self.relational(allow_aggregate)
        while self.accept_op("&&"):
            left = BinaryOp("&&", left, self.relational(allow_aggregate))
        return left

    def relational(self, allow_aggregate: bool) -> Expr:
        left = self.additive(allow_aggregate)
        for op in ("=", "!=", "<=", ">=", "<", ">"):
            if self.accept_op(op):
                return BinaryOp(op, left, self.additive(allow_aggregate))
        if self.is_keyword("IN") or self.is_keyword("NOT"):
            raise self.unsupported("IN / NOT IN")
        return left

    def additive(self, allow_aggregate: bool) -> Expr:
        left = self.multiplicative(allow_aggregate)
        while self.tok.kind == "OP" and self.tok.text in "+-":
            op = self.advance().text
            left = BinaryOp(op, left, self.multiplicative(allow_aggregate))
        return left

    def multiplicative(self, allow_aggregate: bool) -> Expr:
        left = self.unary(allow_aggregate)
        while self.tok.kind == "OP" and self.tok.text in "*/":
            op = self.advance().text
            left = BinaryOp(op, left, self.unary(allow_aggregate))
        return left

    def unary(self, allow_aggregate: bool) -> Expr:
        if self.tok.kind == "OP" and self.tok.text in ("!", "-", "+"):
            op = self.advance().text
            return UnaryOp(op, self.unary(allow_aggregate))
        return self.primary(allow_aggregate)

    def primary(self, allow_aggregate: bool) -> Expr:
        t = self.tok
        if t.kind == "OP" and t.text == "(":
            self.advance()
            expr = self.expression(allow_aggregate)
            self.expect_op(")")
            return expr
        if t.kind == "VAR":
            self.advance()
            return Var(t.text[1:])
        if t.kind in ("STRING", "NUMBER"):
            return self.literal()
        if t.kind == "NAME":
            word = t.text.upper()
            if t.text in ("true", "false"):
                return self.literal()
            if word in ("AVG", "COUNT"):
                if not allow_aggregate:
                    raise self.unsupported(f"aggregate {word} outside the SELECT clause")
                return self.aggregate()
            if word in BUILTINS:
                self.advance()
                return Call(word, self.arguments(word))
            if word in UNSUPPORTED_KEYWORDS:
                raise self.unsupported(word)
            raise self.unsupported(f"function {t.text}")
        if t.kind in ("IRIREF", "PNAME"):
            iri = self.iri()
            if not self.is_op("("):
                return iri
            if iri.value not in KNOWN_FUNCTIONS:
                raise self.unsupported(f"function <{iri.value}>", t)
            return Call(iri.value, self.arguments(iri.value))
        raise self.error(f"expected an expression, found {t.text or 'end of query'!r}")

    def arguments(self, name: str) -> tuple[Expr, ...]:
        self.expect_op("(")
        args: list[Expr] = []
        if not self.accept_op(")"):
            while True:
                args.append(self.expression(allow_aggregate=False))
                if self.accept_op(")"):
                    break
                self.expect_op(",")
        expected = {"STR": 1, "BOUND": 1, "TEXTCONTAINS": 2, GEOF_SF_INTERSECTS: 2}.get(name, 1)
        if len(args) != expected:
            raise self.error(f"{name} takes {expected} argument(s), got {len(args)}")
        if name == "BOUND" and not isinstance(args[0], Var):
            raise self.error("BOUND takes a variable")
        return tuple(args)

    def aggregate(self) -> Aggregate:
        func = self.advance().text.upper()
        self.expect_op("(")
        distinct = self.accept_keyword("DISTINCT")
        if self.accept_op("*"):
            if func != "COUNT":
                raise self.error("only COUNT accepts '*'")
            expr = None
        else:
            expr = self.expression(allow_aggregate=False)
        self.expect_op(")")
        return Aggregate(func, distinct, expr)


def parse_query(text: str, prefixes: dict[str, str] | None = None) -> SelectQuery:
    """Parse a SELECT query.

    ``prefixes`` are available without declaration; by default the usual
    GloSIS, SOSA, QUDT, GeoSPARQL and W3C prefixes are predeclared, so the
    query texts can omit their PREFIX header.
    """
    return _Parser(text, DEFAULT_QUERY_PREFIXES if prefixes is None else prefixes).query()


__all__ = [
    "DEFAULT_QUERY_PREFIXES", "QuerySyntaxError", "UnsupportedFeatureError", "parse_query", "tokenize",
]

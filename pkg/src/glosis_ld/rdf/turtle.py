"""Turtle parser.

Covers the Turtle 1.1 grammar minus RDF-star: directives in both ``@prefix``
and SPARQL style, predicate/object lists, blank-node property lists,
collections, numeric/boolean shorthand and the full string escape set.
"""

from __future__ import annotations

import re
from urllib.parse import urljoin

from .graph import BNodeFactory, Graph
from .terms import IRI, RDF_FIRST, RDF_NIL, RDF_REST, RDF_TYPE, XSD, BNode, Literal, Term

ABSOLUTE_IRI = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")

_DOUBLE = re.compile(r"[+-]?(?:[0-9]+\.[0-9]*[eE][+-]?[0-9]+|\.[0-9]+[eE][+-]?[0-9]+|[0-9]+[eE][+-]?[0-9]+)")
_DECIMAL = re.compile(r"[+-]?[0-9]*\.[0-9]+")
_INTEGER = re.compile(r"[+-]?[0-9]+")
_LANGTAG = re.compile(r"[a-zA-Z]+(?:-[a-zA-Z0-9]+)*")
_PN_PREFIX = re.compile(r"(?:[^\W\d_](?:[\w.\-·]*[\w\-·])?)?:", re.UNICODE)
_LOCAL_CHAR = re.compile(r"[\w\-.:%\\·]", re.UNICODE)
_BNODE_LABEL = re.compile(r"[\w](?:[\w.\-·]*[\w\-·])?", re.UNICODE)
_IRI_FORBIDDEN = set('<>"{}|^`\\') | {chr(c) for c in range(0x21)}
_ECHAR = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
_LOCAL_ESCAPABLE = set("_~.-!$&'()*+,;=/?#@%")
_DELIMITERS = set(" \t\r\n#<[(\"',;.)]")


class TurtleError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UndefinedPrefixError(TurtleError):
    pass


class RelativeIRIError(TurtleError):
    pass


def resolve_iri(ref: str, base: str | None) -> str | None:
    if ABSOLUTE_IRI.match(ref):
        return ref
    if not base:
        return None
    return urljoin(base, ref)


class _Parser:
    def __init__(self, text: str, base: str | None) -> None:
        self.text = text
        self.pos = 0
        self.base = base
        self.prefixes: dict[str, str] = {}
        self.graph = Graph()
        self.fresh = BNodeFactory("b")
        self.labels: dict[str, BNode] = {}

    # -- low level -------------------------------------------------------
    def error(self, message: str, cls=TurtleError, pos: int | None = None):
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        column = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return cls(message, line, column)

    def skip_ws(self) -> None:
        text, n = self.text, len(self.text)
        while self.pos < n:
            ch = text[self.pos]
            if ch in " \t\r\n":
                self.pos += 1
            elif ch == "#":
                end = text.find("\n", self.pos)
                self.pos = n if end < 0 else end + 1
            else:
                break

    def peek(self, k: int = 1) -> str:
        return self.text[self.pos:self.pos + k]

    def expect(self, token: str) -> None:
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            found = self.peek() or "end of input"
            raise self.error(f"expected {token!r}, found {found!r}")
        self.pos += len(token)

    def at_keyword(self, word: str) -> bool:
        end = self.pos + len(word)
        if self.text[self.pos:end].lower() != word.lower():
            return False
        return end >= len(self.text) or self.text[end] in _DELIMITERS

    # -- document --------------------------------------------------------
    def parse(self) -> Graph:
        while True:
            self.skip_ws()
            if self.pos >= len(self.text):
                break
            self.statement()
        self.graph.prefixes = dict(self.prefixes)
        return self.graph

    def statement(self) -> None:
        if self.peek() == "@":
            if self.text.startswith("@prefix", self.pos):
                self.pos += len("@prefix")
                self.prefix_decl()
                self.expect(".")
                return
            if self.text.startswith("@base", self.pos):
                self.pos += len("@base")
                self.base_decl()
                self.expect(".")
                return
            raise self.error("unknown directive")
        if self.at_keyword("PREFIX"):
            self.pos += len("PREFIX")
            self.prefix_decl()
            return
        if self.at_keyword("BASE"):
            self.pos += len("BASE")
            self.base_decl()
            return
        self.triples()
        self.expect(".")

    def prefix_decl(self) -> None:
        self.skip_ws()
        m = _PN_PREFIX.match(self.text, self.pos)
        if not m:
            raise self.error("expected prefix name")
        self.pos = m.end()
        self.skip_ws()
        iri = self.iriref()
        self.prefixes[m.group()[:-1]] = iri

    def base_decl(self) -> None:
        self.skip_ws()
        self.base = self.iriref()

    def triples(self) -> None:
        ch = self.peek()
        if ch == "[":
            subject = self.blank_property_list()
            self.skip_ws()
            if self.peek() != ".":
                self.predicate_object_list(subject)
            return
        subject = self.subject()
        self.predicate_object_list(subject)

    def subject(self) -> Term:
        self.skip_ws()
        ch = self.peek()
        if ch == "(":
            return self.collection()
        if ch == "_":
            return self.blank_label()
        if ch == "<" or ch == ":" or _PN_PREFIX.match(self.text, self.pos):
            return self.iri()
        raise self.error("expected subject")

    def predicate_object_list(self, subject: Term) -> None:
        self.skip_ws()
        self.verb_object_list(subject)
        while True:
            self.skip_ws()
            if self.peek() != ";":
                return
            while self.peek() == ";":
                self.pos += 1
                self.skip_ws()
            if self.peek() in (".", "]", ""):
                return
            self.verb_object_list(subject)

    def verb_object_list(self, subject: Term) -> None:
        predicate = self.verb()
        self.graph.add(subject, predicate, self.object())
        while True:
            self.skip_ws()
            if self.peek() != ",":
                return
            self.pos += 1
            self.graph.add(subject, predicate, self.object())

    def verb(self) -> IRI:
        self.skip_ws()
        if self.peek() == "a" and (self.pos + 1 >= len(self.text) or self.text[self.pos + 1] in _DELIMITERS):
            self.pos += 1
            return RDF_TYPE
        if self.peek() == "<" or _PN_PREFIX.match(self.text, self.pos):
            return self.iri()
        raise self.error("expected predicate")

    def object(self) -> Term:
        self.skip_ws()
        ch = self.peek()
        if ch == "[":
            return self.blank_property_list()
        if ch == "(":
            return self.collection()
        if ch == "_":
            return self.blank_label()
        if ch in ('"', "'"):
            return self.rdf_literal()
        if ch and (ch.isdigit() or ch in "+-."):
            return self.numeric()
        for word in ("true", "false"):
            if self.at_keyword(word):
                self.pos += len(word)
                return Literal(word, XSD.boolean)
        if ch == "<" or _PN_PREFIX.match(self.text, self.pos):
            return self.iri()
        raise self.error("expected object" if ch else "unexpected end of input")

    # -- terms -----------------------------------------------------------
    def iriref(self) -> str:
        start = self.pos
        if self.peek() != "<":
            raise self.error("expected IRI")
        self.pos += 1
        out = []
        text = self.text
        while True:
            if self.pos >= len(text):
                raise self.error("unterminated IRI", pos=start)
            ch = text[self.pos]
            if ch == ">":
                self.pos += 1
                break
            if ch == "\\":
                out.append(self.uchar())
                continue
            if ch in _IRI_FORBIDDEN:
                raise self.error(f"illegal character {ch!r} in IRI")
            out.append(ch)
            self.pos += 1
        ref = "".join(out)
        resolved = resolve_iri(ref, self.base)
        if resolved is None:
            raise self.error(f"relative IRI <{ref}> with no base", RelativeIRIError, pos=start)
        return resolved

    def uchar(self) -> str:
        kind = self.text[self.pos + 1:self.pos + 2]
        width = {"u": 4, "U": 8}.get(kind)
        if width is None:
            raise self.error("bad escape in IRI")
        digits = self.text[self.pos + 2:self.pos + 2 + width]
        if len(digits) != width or not all(c in "0123456789abcdefABCDEF" for c in digits):
            raise self.error("bad unicode escape")
        self.pos += 2 + width
        return chr(int(digits, 16))

    def iri(self) -> IRI:
        if self.peek() == "<":
            return IRI(self.iriref())
        start = self.pos
        m = _PN_PREFIX.match(self.text, self.pos)
        if not m:
            raise self.error("expected IRI")
        prefix = m.group()[:-1]
        self.pos = m.end()
        local = self.local_name()
        if prefix not in self.prefixes:
            raise self.error(f"undefined prefix {prefix!r}", UndefinedPrefixError, pos=start)
        return IRI(self.prefixes[prefix] + local)

    def local_name(self) -> str:
        text = self.text
        start = self.pos
        end = start
        while end < len(text) and _LOCAL_CHAR.match(text, end):
            end += 2 if text[end] == "\\" else 1
        while end > start and text[end - 1] == "." and not (end - 2 >= start and text[end - 2] == "\\"):
            end -= 1
        raw = text[start:end]
        self.pos = end
        if not raw:
            return ""
        out = []
        i = 0
        while i < len(raw):
            ch = raw[i]
            if ch == "\\":
                nxt = raw[i + 1:i + 2]
                if nxt not in _LOCAL_ESCAPABLE:
                    raise self.error("bad escape in local name", pos=start + i)
                out.append(nxt)
                i += 2
            elif ch == "%":
                hexpart = raw[i + 1:i + 3]
                if len(hexpart) != 2 or not all(c in "0123456789abcdefABCDEF" for c in hexpart):
                    raise self.error("bad percent escape in local name", pos=start + i)
                out.append(raw[i:i + 3])
                i += 3
            else:
                out.append(ch)
                i += 1
        return "".join(out)

    def blank_label(self) -> BNode:
        if not self.text.startswith("_:", self.pos):
            raise self.error("expected blank node label")
        m = _BNODE_LABEL.match(self.text, self.pos + 2)
        if not m:
            raise self.error("empty blank node label")
        self.pos = m.end()
        label = m.group()
        node = self.labels.get(label)
        if node is None:
            node = self.labels[label] = self.fresh()
        return node

    def blank_property_list(self) -> BNode:
        self.expect("[")
        node = self.fresh()
        self.skip_ws()
        if self.peek() != "]":
            self.predicate_object_list(node)
        self.expect("]")
        return node

    def collection(self) -> Term:
        self.expect("(")
        items: list[Term] = []
        while True:
            self.skip_ws()
            if self.peek() == ")":
                self.pos += 1
                break
            if not self.peek():
                raise self.error("unterminated collection")
            items.append(self.object())
        if not items:
            return RDF_NIL
        nodes = [self.fresh() for _ in items]
        for i, item in enumerate(items):
            self.graph.add(nodes[i], RDF_FIRST, item)
            self.graph.add(nodes[i], RDF_REST, nodes[i + 1] if i + 1 < len(nodes) else RDF_NIL)
        return nodes[0]

    def numeric(self) -> Literal:
        for pattern, datatype in ((_DOUBLE, XSD.double), (_DECIMAL, XSD.decimal), (_INTEGER, XSD.integer)):
            m = pattern.match(self.text, self.pos)
            if m:
                self.pos = m.end()
                return Literal(m.group(), datatype)
        raise self.error("malformed number")

    def rdf_literal(self) -> Literal:
        lexical = self.string()
        if self.peek() == "@":
            m = _LANGTAG.match(self.text, self.pos + 1)
            if not m:
                raise self.error("malformed language tag")
            self.pos = m.end()
            return Literal(lexical, lang=m.group())
        if self.peek(2) == "^^":
            self.pos += 2
            return Literal(lexical, self.iri())
        return Literal(lexical)

    def string(self) -> str:
        text = self.text
        start = self.pos
        quote = text[self.pos]
        long_quote = quote * 3
        is_long = text.startswith(long_quote, self.pos)
        self.pos += 3 if is_long else 1
        out = []
        while True:
            if self.pos >= len(text):
                raise self.error("unterminated string", pos=start)
            ch = text[self.pos]
            if is_long:
                if text.startswith(long_quote, self.pos):
                    # up to two extra quotes may precede the closing delimiter
                    extra = 0
                    while text.startswith(quote, self.pos + 3 + extra) and extra < 2:
                        extra += 1
                    out.append(quote * extra)
                    self.pos += 3 + extra
                    break
            elif ch == quote:
                self.pos += 1
                break
            elif ch in "\r\n":
                raise self.error("newline in single-quoted string")
            if ch == "\\":
                nxt = text[self.pos + 1:self.pos + 2]
                if nxt in _ECHAR:
                    out.append(_ECHAR[nxt])
                    self.pos += 2
                elif nxt in ("u", "U"):
                    out.append(self.uchar())
                else:
                    raise self.error("bad string escape")
                continue
            out.append(ch)
            self.pos += 1
        return "".join(out)


def parse_turtle(text: str, base: str | None = None) -> tuple[Graph, dict[str, str]]:
    """Parse Turtle ``text`` into a graph; returns the graph and its prefix map.

    Blank nodes are relabelled ``b0``, ``b1``, ... in order of first appearance.
    Raises :class:`TurtleError` (or a subclass) with line and column on bad input.
    """
    graph = _Parser(text, base).parse()
    return graph, dict(graph.prefixes)


def parse_file(path, base: str | None = None) -> Graph:
    from pathlib import Path

    path = Path(path)
    if base is None:
        base = path.resolve().as_uri()
    graph, _ = parse_turtle(path.read_text(encoding="utf-8"), base)
    return graph

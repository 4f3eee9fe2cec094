"""Deterministic Turtle writer.

Subjects are written IRIs first (sorted), then unreferenced or shared blank
nodes. Blank nodes referenced exactly once are nested as ``[ ... ]`` and
well-formed RDF lists (e.g. ``owl:oneOf`` enumerations) as ``( ... )``.
"""

from __future__ import annotations

import re

from .graph import Graph
from .terms import IRI, RDF_FIRST, RDF_NIL, RDF_REST, RDF_TYPE, XSD, XSD_STRING, BNode, Literal, Term, escape_string
from .turtle import _DECIMAL, _DOUBLE, _INTEGER

_SAFE_LOCAL = re.compile(r"^[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?$")
_SAFE_PREFIX = re.compile(r"^(?:[A-Za-z](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?)?$")
_SHORTHAND = {
    XSD.integer: _INTEGER,
    XSD.decimal: _DECIMAL,
    XSD.double: _DOUBLE,
}


class _Writer:
    def __init__(self, graph: Graph, prefixes: dict[str, str]) -> None:
        self.graph = graph
        self.prefixes = {p: ns for p, ns in prefixes.items() if _SAFE_PREFIX.match(p)}
        # longest namespace wins when several match
        self.namespaces = sorted(self.prefixes.items(), key=lambda kv: -len(kv[1]))
        self.labels: dict[BNode, str] = {}

    # -- term rendering ----------------------------------------------------
    def iri(self, iri: IRI) -> str:
        if iri == RDF_TYPE:
            return "a"
        return self.name(iri)

    def name(self, iri: IRI) -> str:
        value = iri.value
        for prefix, ns in self.namespaces:
            if value.startswith(ns):
                local = value[len(ns):]
                if local == "" or _SAFE_LOCAL.match(local):
                    return f"{prefix}:{local}"
        escaped = "".join(c if c not in '<>"{}|^`\\' and ord(c) > 0x20 else f"\\u{ord(c):04X}" for c in value)
        return f"<{escaped}>"

    def literal(self, lit: Literal) -> str:
        if lit.lang:
            return f'"{escape_string(lit.lexical)}"@{lit.lang}'
        if lit.datatype.value == XSD_STRING:
            return f'"{escape_string(lit.lexical)}"'
        pattern = _SHORTHAND.get(lit.datatype)
        if pattern is not None and pattern.fullmatch(lit.lexical):
            return lit.lexical
        if lit.datatype == XSD.boolean and lit.lexical in ("true", "false"):
            return lit.lexical
        return f'"{escape_string(lit.lexical)}"^^{self.name(lit.datatype)}'

    # -- structure ---------------------------------------------------------
    def plan(self) -> None:
        g = self.graph
        refs: dict[BNode, int] = {}
        for t in g:
            if isinstance(t.o, BNode):
                refs[t.o] = refs.get(t.o, 0) + 1
        self.refs = refs

        # list nodes: exactly first+rest, nothing else, referenced once
        def list_node(n: Term) -> bool:
            if not isinstance(n, BNode) or refs.get(n, 0) != 1:
                return False
            triples = g.match(n, None, None)
            preds = sorted(t.p.value for t in triples)
            return preds == sorted([RDF_FIRST.value, RDF_REST.value])

        self.lists: dict[BNode, list[Term]] = {}
        self.members: dict[BNode, list[BNode]] = {}
        for n in list(refs):
            if not list_node(n):
                continue
            # a head is not the rdf:rest of another list node
            referrer = g.match(None, None, n)[0]
            if referrer.p == RDF_REST and list_node(referrer.s):
                continue
            chain, node, ok = [], n, True
            members: list[BNode] = []
            while node != RDF_NIL:
                if not list_node(node) or node in members:
                    ok = False
                    break
                members.append(node)
                chain.append(g.value(node, RDF_FIRST))
                node = g.value(node, RDF_REST)
            if ok:
                self.lists[n] = chain
                self.members[n] = members
        self.promoted: set[BNode] = set()
        self.refresh()

    def refresh(self) -> None:
        self.list_members = {m for ms in self.members.values() for m in ms}
        self.inline = {
            b for b, c in self.refs.items()
            if c == 1 and b not in self.list_members and b not in self.promoted
        }

    def write(self) -> str:
        self.plan()
        lines = [f"@prefix {p}: <{ns}> ." for p, ns in sorted(self.prefixes.items())]
        body: list[str] = []
        while True:
            self.emitted: set[BNode] = set()
            body = []
            for subject in self.top_subjects():
                body.append(self.statement(subject))
            pending = [b for b in self.inline if b not in self.emitted and self.graph.has_subject(b)]
            pending += [b for b in self.lists if b not in self.emitted]
            if not pending:
                break
            # blank-node cycle: promote one node to a labelled top-level subject
            victim = min(pending, key=lambda b: b.label)
            self.promoted.add(victim)
            if victim in self.lists:
                del self.lists[victim]
                del self.members[victim]
            self.refresh()
        if lines and body:
            lines.append("")
        text = "\n".join(lines + body).rstrip("\n")
        return text + "\n" if text else ""

    def top_subjects(self) -> list[Term]:
        iris, blanks = [], []
        for s in self.graph.subject_terms():
            if isinstance(s, IRI):
                iris.append(s)
            elif s not in self.inline and s not in self.list_members and s not in self.lists:
                blanks.append(s)
        iris.sort(key=lambda i: i.value)
        blanks.sort(key=lambda b: b.label)
        return iris + blanks

    def label(self, b: BNode) -> str:
        if b not in self.labels:
            self.labels[b] = f"_:b{len(self.labels)}"
        return self.labels[b]

    def statement(self, subject: Term) -> str:
        head = self.name(subject) if isinstance(subject, IRI) else self.label(subject)
        return head + " " + self.predicate_objects(subject, "    ") + " .\n"

    def predicate_objects(self, subject: Term, indent: str) -> str:
        grouped: dict[IRI, list[Term]] = {}
        for t in self.graph.match(subject, None, None):
            grouped.setdefault(t.p, []).append(t.o)
        preds = sorted(grouped, key=lambda p: (p != RDF_TYPE, p.value))
        parts = []
        for p in preds:
            objs = sorted(grouped[p], key=_sort_key)
            rendered = ", ".join(self.object(o, indent + "    ") for o in objs)
            parts.append(f"{self.iri(p)} {rendered}")
        return (" ;\n" + indent).join(parts)

    def object(self, o: Term, indent: str) -> str:
        if isinstance(o, Literal):
            return self.literal(o)
        if isinstance(o, IRI):
            return self.name(o)
        if o in self.lists:
            self.emitted.add(o)
            items = " ".join(self.object(i, indent + "    ") for i in self.lists[o])
            return f"( {items} )"
        if o in self.inline:
            self.emitted.add(o)
            if not self.graph.has_subject(o):
                return "[]"
            return "[ " + self.predicate_objects(o, indent + "    ") + " ]"
        return self.label(o)


def _sort_key(term: Term) -> tuple:
    if isinstance(term, IRI):
        return (0, term.value, "", "")
    if isinstance(term, BNode):
        return (1, term.label, "", "")
    return (2, term.lexical, term.datatype.value, term.lang or "")


def serialize_turtle(graph: Graph, prefixes: dict[str, str] | None = None) -> str:
    """Render ``graph`` as Turtle; the output re-parses to an isomorphic graph."""
    if prefixes is None:
        prefixes = graph.prefixes
    return _Writer(graph, prefixes).write()

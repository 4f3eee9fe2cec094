"""Indexed in-memory triple set and named-graph dataset."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Iterator

from .terms import IRI, RDF_FIRST, RDF_NIL, RDF_REST, BNode, Literal, Term, Triple


class MalformedListError(ValueError):
    def __init__(self, node: Term, reason: str) -> None:
        super().__init__(f"malformed RDF list at {node}: {reason}")
        self.node = node


class Graph:
    """A set of triples with subject, predicate, (predicate, object) and object indexes.

    Insertion order is kept so that lookups are deterministic for a given build.
    Graphs are meant to be built once and then only read; readers may share one
    freely across threads.
    """

    def __init__(self, triples: Iterable[Triple] = (), prefixes: dict[str, str] | None = None) -> None:
        self._triples: dict[Triple, None] = {}
        self._by_s: dict[Term, list[Triple]] = defaultdict(list)
        self._by_p: dict[IRI, list[Triple]] = defaultdict(list)
        self._by_po: dict[tuple[IRI, Term], list[Triple]] = defaultdict(list)
        self._by_o: dict[Term, list[Triple]] = defaultdict(list)
        self.prefixes: dict[str, str] = dict(prefixes or {})
        for t in triples:
            self.add(*t)

    def add(self, s: Term, p: IRI, o: Term) -> bool:
        if not isinstance(p, IRI):
            raise TypeError(f"predicate must be an IRI, got {p!r}")
        if isinstance(s, Literal):
            raise TypeError(f"subject cannot be a literal: {s!r}")
        t = Triple(s, p, o)
        if t in self._triples:
            return False
        self._triples[t] = None
        self._by_s[s].append(t)
        self._by_p[p].append(t)
        self._by_po[(p, o)].append(t)
        self._by_o[o].append(t)
        return True

    def remove(self, s: Term, p: IRI, o: Term) -> bool:
        t = Triple(s, p, o)
        if t not in self._triples:
            return False
        del self._triples[t]
        for index, key in ((self._by_s, s), (self._by_p, p), (self._by_po, (p, o)), (self._by_o, o)):
            bucket = index[key]
            bucket.remove(t)
            if not bucket:
                del index[key]
        return True

    def update(self, triples: Iterable[Triple]) -> None:
        for t in triples:
            self.add(*t)

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(list(self._triples))

    def __contains__(self, triple) -> bool:
        return Triple(*triple) in self._triples

    def __or__(self, other: Graph) -> Graph:
        merged = Graph(self, {**self.prefixes, **other.prefixes})
        merged.update(other)
        return merged

    def copy(self) -> Graph:
        return Graph(self, self.prefixes)

    def match(self, s: Term | None = None, p: IRI | None = None, o: Term | None = None) -> list[Triple]:
        if s is not None:
            candidates = self._by_s.get(s, ())
        elif p is not None and o is not None:
            return list(self._by_po.get((p, o), ()))
        elif o is not None:
            candidates = self._by_o.get(o, ())
        elif p is not None:
            return list(self._by_p.get(p, ()))
        else:
            return list(self._triples)
        return [
            t for t in candidates
            if (p is None or t.p == p) and (o is None or t.o == o)
        ]

    def count(self, s: Term | None = None, p: IRI | None = None, o: Term | None = None) -> int:
        if s is None and o is None:
            return len(self._by_p.get(p, ())) if p is not None else len(self._triples)
        if s is None and p is not None:
            return len(self._by_po.get((p, o), ()))
        return len(self.match(s, p, o))

    def objects(self, s: Term, p: IRI) -> list[Term]:
        return [t.o for t in self.match(s, p, None)]

    def subjects(self, p: IRI, o: Term) -> list[Term]:
        return [t.s for t in self.match(None, p, o)]

    def value(self, s: Term, p: IRI) -> Term | None:
        found = self.match(s, p, None)
        return found[0].o if found else None

    def subject_terms(self) -> list[Term]:
        return list(self._by_s)

    def object_terms(self) -> list[Term]:
        return list(self._by_o)

    def nodes(self) -> list[Term]:
        """Every term occurring in subject or object position, in first-seen order."""
        seen = dict.fromkeys(self._by_s)
        seen.update(dict.fromkeys(self._by_o))
        return list(seen)

    def has_subject(self, s: Term) -> bool:
        return s in self._by_s

    def __repr__(self) -> str:
        return f"<Graph with {len(self)} triples>"


def merge(graphs: Iterable[Graph]) -> Graph:
    """RDF merge: blank nodes of different input graphs are kept apart.

    Every blank node is relabelled ``m0``, ``m1``, ... in order of first
    appearance, so two graphs that both use ``_:b0`` contribute two nodes.
    """
    merged = Graph()
    fresh = BNodeFactory("m")
    for g in graphs:
        merged.prefixes.update(g.prefixes)
        renamed: dict[BNode, BNode] = {}

        def term(t: Term) -> Term:
            if isinstance(t, BNode):
                if t not in renamed:
                    renamed[t] = fresh()
                return renamed[t]
            return t

        for s, p, o in g:
            merged.add(term(s), p, term(o))
    return merged


def match(graph: Graph, s: Term | None = None, p: IRI | None = None, o: Term | None = None) -> list[Triple]:
    return graph.match(s, p, o)


def read_list(graph: Graph, head: Term) -> list[Term]:
    """Members of the rdf:first/rdf:rest chain starting at ``head``, in order."""
    items: list[Term] = []
    seen: set[Term] = set()
    node = head
    while node != RDF_NIL:
        if node in seen:
            raise MalformedListError(node, "cycle in rdf:rest chain")
        seen.add(node)
        firsts = graph.objects(node, RDF_FIRST)
        rests = graph.objects(node, RDF_REST)
        if len(firsts) != 1:
            raise MalformedListError(node, f"expected one rdf:first, found {len(firsts)}")
        if len(rests) != 1:
            raise MalformedListError(node, f"expected one rdf:rest, found {len(rests)}")
        items.append(firsts[0])
        node = rests[0]
    return items


def write_list(graph: Graph, items: Iterable[Term], make_node) -> Term:
    """Add an RDF collection to ``graph`` and return its head (rdf:nil when empty)."""
    items = list(items)
    if not items:
        return RDF_NIL
    nodes = [make_node() for _ in items]
    for i, (node, item) in enumerate(zip(nodes, items)):
        graph.add(node, RDF_FIRST, item)
        graph.add(node, RDF_REST, nodes[i + 1] if i + 1 < len(nodes) else RDF_NIL)
    return nodes[0]


class BNodeFactory:
    """Mints graph-local blank nodes ``{prefix}0``, ``{prefix}1``, ..."""

    def __init__(self, prefix: str = "b") -> None:
        self.prefix = prefix
        self.counter = 0

    def __call__(self) -> BNode:
        node = BNode(f"{self.prefix}{self.counter}")
        self.counter += 1
        return node


class Dataset:
    """A default graph plus named graphs keyed by graph IRI."""

    def __init__(self, default: Graph | None = None) -> None:
        self.default = default if default is not None else Graph()
        self.named: dict[IRI, Graph] = {}

    def add_graph(self, name: IRI, graph: Graph) -> None:
        if name in self.named:
            raise ValueError(f"duplicate graph IRI {name}")
        self.named[name] = graph

    def union(self) -> Graph:
        """RDF merge of the default graph and every named graph."""
        return merge([self.default, *self.named.values()])

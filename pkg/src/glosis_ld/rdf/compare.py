"""Graph isomorphism with blank-node bijection search."""

from __future__ import annotations

from collections import defaultdict

from .graph import Graph
from .terms import BNode, Term, Triple


def _ground(graph: Graph) -> set[Triple]:
    return {t for t in graph if not isinstance(t.s, BNode) and not isinstance(t.o, BNode)}


def _colour(graph: Graph) -> dict[BNode, int]:
    """Iterated neighbourhood hashing of blank nodes (colour refinement)."""
    blanks = [n for n in graph.nodes() if isinstance(n, BNode)]
    colours = {b: 0 for b in blanks}

    def show(term: Term) -> object:
        return ("_", colours[term]) if isinstance(term, BNode) else term

    for _ in range(len(blanks) + 1):
        updated = {}
        for b in blanks:
            out = sorted(repr((t.p, show(t.o))) for t in graph.match(b, None, None))
            inc = sorted(repr((show(t.s), t.p)) for t in graph.match(None, None, b))
            updated[b] = hash((colours[b], tuple(out), tuple(inc)))
        if len(set(updated.values())) == len(set(colours.values())):
            colours = updated
            break
        colours = updated
    return colours


def find_bijection(g1: Graph, g2: Graph) -> dict[BNode, BNode] | None:
    """A blank-node mapping that turns ``g1`` into ``g2``, or ``None``."""
    if len(g1) != len(g2) or _ground(g1) != _ground(g2):
        return None
    c1, c2 = _colour(g1), _colour(g2)
    if sorted(c1.values()) != sorted(c2.values()):
        return None
    by_colour: dict[int, list[BNode]] = defaultdict(list)
    for b, c in c2.items():
        by_colour[c].append(b)
    order = sorted(c1, key=lambda b: (len(by_colour[c1[b]]), c1[b]))
    touching = {b: g1.match(b, None, None) + g1.match(None, None, b) for b in order}
    mapping: dict[BNode, BNode] = {}
    used: set[BNode] = set()

    def image(term: Term) -> Term | None:
        if isinstance(term, BNode):
            return mapping.get(term)
        return term

    def consistent(b: BNode) -> bool:
        for t in touching[b]:
            s, o = image(t.s), image(t.o)
            if s is None or o is None:
                continue
            if (s, t.p, o) not in g2:
                return False
        return True

    def search(i: int) -> bool:
        if i == len(order):
            return True
        b = order[i]
        for candidate in by_colour[c1[b]]:
            if candidate in used:
                continue
            mapping[b] = candidate
            used.add(candidate)
            if consistent(b) and search(i + 1):
                return True
            del mapping[b]
            used.discard(candidate)
        return False

    return dict(mapping) if search(0) else None


def isomorphic(g1: Graph, g2: Graph) -> bool:
    return find_bijection(g1, g2) is not None


def graph_diff(g1: Graph, g2: Graph) -> tuple[set[Triple], set[Triple]]:
    """Triples only in ``g1`` and only in ``g2`` (blank nodes compared by label)."""
    a, b = set(g1), set(g2)
    return a - b, b - a

"""Property path evaluation over a graph.

Paths are evaluated with set semantics: every reachable node is reported
once, however many routes lead to it.
"""

from __future__ import annotations

from collections import deque

from ..rdf import IRI, Graph, Term
from .ast import Path, PathAlternative, PathPredicate, PathSequence, PathZeroOrMore


def _as_path(path) -> Path:
    return PathPredicate(path) if isinstance(path, IRI) else path


def eval_path(graph: Graph, path, start: Term) -> set[Term]:
    """Nodes reachable from ``start`` along ``path``."""
    path = _as_path(path)
    if isinstance(path, PathPredicate):
        return set(graph.objects(start, path.iri))
    if isinstance(path, PathAlternative):
        out: set[Term] = set()
        for option in path.options:
            out |= eval_path(graph, option, start)
        return out
    if isinstance(path, PathSequence):
        frontier = {start}
        for step in path.steps:
            nxt: set[Term] = set()
            for node in frontier:
                nxt |= eval_path(graph, step, node)
            frontier = nxt
            if not frontier:
                break
        return frontier
    if isinstance(path, PathZeroOrMore):
        seen = {start}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for nxt in eval_path(graph, path.path, node):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen
    raise TypeError(f"not a path: {path!r}")


def eval_path_inverse(graph: Graph, path, end: Term) -> set[Term]:
    """Nodes from which ``end`` is reachable along ``path``."""
    path = _as_path(path)
    if isinstance(path, PathPredicate):
        return set(graph.subjects(path.iri, end))
    if isinstance(path, PathAlternative):
        out: set[Term] = set()
        for option in path.options:
            out |= eval_path_inverse(graph, option, end)
        return out
    if isinstance(path, PathSequence):
        frontier = {end}
        for step in reversed(path.steps):
            nxt: set[Term] = set()
            for node in frontier:
                nxt |= eval_path_inverse(graph, step, node)
            frontier = nxt
            if not frontier:
                break
        return frontier
    if isinstance(path, PathZeroOrMore):
        seen = {end}
        queue = deque([end])
        while queue:
            node = queue.popleft()
            for prev in eval_path_inverse(graph, path.path, node):
                if prev not in seen:
                    seen.add(prev)
                    queue.append(prev)
        return seen
    raise TypeError(f"not a path: {path!r}")


def path_pairs(graph: Graph, path) -> set[tuple[Term, Term]]:
    """All (start, end) pairs connected by ``path``. Zero-length steps pair
    every node of the graph with itself."""
    path = _as_path(path)
    if isinstance(path, PathPredicate):
        return {(t.s, t.o) for t in graph.match(None, path.iri, None)}
    return {(node, end) for node in graph.nodes() for end in eval_path(graph, path, node)}

"""Evaluation of parsed queries over an in-memory graph.

Solutions are dictionaries from variable name to term, combined with bag
semantics. Triple patterns inside a basic graph pattern are matched one at a
time, always picking the pattern with the fewest candidate matches under the
bindings made so far.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator

from ..rdf import IRI, Dataset, Graph, Literal
from .ast import (
    BGP, Aggregate, BinaryOp, Call, Expr, Filter, Group, PathAlternative, PathPredicate, PathSequence,
    PathZeroOrMore, SelectQuery, Service, SubSelect, TriplePattern, UnaryOp, Union_, Var, group_as_select,
)
from .federation import FederationClient, FederationError
from .functions import (
    ExpressionError, arithmetic, as_number, boolean, call, compare, ebv, format_number, negate, numeric_rank,
    term_order_key,
)
from .paths import eval_path, eval_path_inverse, path_pairs
from .results import SolutionTable

Solution = dict
_PATH_TYPES = (PathPredicate, PathSequence, PathAlternative, PathZeroOrMore)


def evaluate(source: Graph | Dataset, query: SelectQuery, federation: FederationClient | None = None) -> SolutionTable:
    """Run ``query`` against ``source``; a dataset is queried as the merge of its graphs."""
    graph = source.union() if isinstance(source, Dataset) else source
    variables, rows = _Evaluator(graph, federation).select(query)
    return SolutionTable.from_solutions(variables, rows)


def run_query(source: Graph | Dataset, text: str, federation: FederationClient | None = None,
              prefixes: dict[str, str] | None = None) -> SolutionTable:
    from .parser import parse_query

    return evaluate(source, parse_query(text, prefixes), federation)


def join(left: list[Solution], right: list[Solution]) -> list[Solution]:
    out = []
    for a in left:
        for b in right:
            if all(a[k] == v for k, v in b.items() if k in a):
                out.append({**a, **b})
    return out


def _bind(sol: Solution, pairs) -> Solution | None:
    """Extend ``sol`` by matching each (pattern node, term) pair, or None on conflict."""
    out = sol
    for node, term in pairs:
        if isinstance(node, Var):
            bound = out.get(node.name)
            if bound is None:
                out = {**out, node.name: term}
            elif bound != term:
                return None
        elif node != term:
            return None
    return out


class _Evaluator:
    def __init__(self, graph: Graph, federation: FederationClient | None) -> None:
        self.graph = graph
        self.federation = federation

    # -- patterns -------------------------------------------------------------------------
    def group(self, group: Group, seeds: list[Solution] | None = None) -> list[Solution]:
        solutions = seeds if seeds is not None else [{}]
        filters: list[Expr] = []
        for el in group.elements:
            if isinstance(el, Filter):
                filters.append(el.expr)
            elif isinstance(el, BGP):
                solutions = [s for seed in solutions for s in self.bgp(list(el.triples), seed)]
            else:
                solutions = join(solutions, self.element(el))
        if filters:
            solutions = [s for s in solutions if all(self.test(f, s) for f in filters)]
        return solutions

    def element(self, el) -> list[Solution]:
        if isinstance(el, Group):
            return self.group(el)
        if isinstance(el, Union_):
            return [s for branch in el.branches for s in self.group(branch)]
        if isinstance(el, SubSelect):
            return self.select(el.query)[1]
        if isinstance(el, Service):
            return self.service(el)
        raise TypeError(f"unexpected pattern element {el!r}")

    def service(self, el: Service) -> list[Solution]:
        try:
            if isinstance(el.endpoint, Var):
                raise FederationError(str(el.endpoint), "endpoint placeholder was never filled in")
            if self.federation is None:
                raise FederationError(el.endpoint.value, "no federation client configured")
            table = self.federation.select(el.endpoint.value, group_as_select(el.group))
        except FederationError:
            if el.silent:
                return [{}]
            raise
        return table.solutions()

    def bgp(self, patterns: list[TriplePattern], sol: Solution) -> Iterator[Solution]:
        if not patterns:
            yield sol
            return
        best = min(range(len(patterns)), key=lambda i: self.cost(patterns[i], sol))
        pattern = patterns[best]
        rest = patterns[:best] + patterns[best + 1:]
        for extended in self.match(pattern, sol):
            yield from self.bgp(rest, extended)

    @staticmethod
    def resolve(node, sol: Solution):
        if isinstance(node, Var):
            return sol.get(node.name)
        return node

    def cost(self, pattern: TriplePattern, sol: Solution) -> tuple[int, int]:
        s = self.resolve(pattern.subject, sol)
        o = self.resolve(pattern.object, sol)
        if isinstance(pattern.predicate, _PATH_TYPES):
            bound = (s is not None) + (o is not None)
            return (2 - bound, len(self.graph) if bound else len(self.graph) ** 2)
        p = self.resolve(pattern.predicate, sol)
        if p is not None and not isinstance(p, IRI):
            return (0, 0)
        return (0, self.graph.count(s, p, o))

    def match(self, pattern: TriplePattern, sol: Solution) -> Iterator[Solution]:
        s = self.resolve(pattern.subject, sol)
        o = self.resolve(pattern.object, sol)
        pred = pattern.predicate
        if isinstance(pred, _PATH_TYPES):
            if s is not None:
                pairs = ((s, end) for end in eval_path(self.graph, pred, s))
            elif o is not None:
                pairs = ((start, o) for start in eval_path_inverse(self.graph, pred, o))
            else:
                pairs = iter(path_pairs(self.graph, pred))
            for start, end in pairs:
                if o is not None and end != o:
                    continue
                b = _bind(sol, ((pattern.subject, start), (pattern.object, end)))
                if b is not None:
                    yield b
            return
        p = self.resolve(pred, sol)
        if p is not None and not isinstance(p, IRI):
            return
        for t in self.graph.match(s, p, o):
            b = _bind(sol, ((pattern.subject, t.s), (pred, t.p), (pattern.object, t.o)))
            if b is not None:
                yield b

    # -- expressions ----------------------------------------------------------------------
    def test(self, expr: Expr, sol: Solution) -> bool:
        try:
            return ebv(self.expr(expr, sol))
        except ExpressionError:
            return False

    def expr(self, e: Expr, sol: Solution):
        if isinstance(e, Var):
            if e.name not in sol:
                raise ExpressionError(f"?{e.name} is unbound")
            return sol[e.name]
        if isinstance(e, (IRI, Literal)):
            return e
        if isinstance(e, Call):
            if e.name == "BOUND":
                return boolean(e.args[0].name in sol)
            return call(e.name, [self.expr(a, sol) for a in e.args])
        if isinstance(e, BinaryOp):
            if e.op in ("||", "&&"):
                return self.logical(e, sol)
            left, right = self.expr(e.left, sol), self.expr(e.right, sol)
            if e.op in ("=", "!=", "<", ">", "<=", ">="):
                return boolean(compare(e.op, left, right))
            return arithmetic(e.op, left, right)
        if isinstance(e, UnaryOp):
            value = self.expr(e.operand, sol)
            if e.op == "!":
                return boolean(not ebv(value))
            if e.op == "-":
                return negate(value)
            as_number(value)
            return value
        if isinstance(e, Aggregate):
            raise ExpressionError("aggregate outside the SELECT clause")
        raise TypeError(f"unexpected expression {e!r}")

    def logical(self, e: BinaryOp, sol: Solution) -> Literal:
        results = []
        for side in (e.left, e.right):
            try:
                results.append(ebv(self.expr(side, sol)))
            except ExpressionError:
                results.append(None)
        if e.op == "||":
            if True in results:
                return boolean(True)
            if None in results:
                raise ExpressionError("error in disjunction")
            return boolean(False)
        if False in results:
            return boolean(False)
        if None in results:
            raise ExpressionError("error in conjunction")
        return boolean(True)

    # -- aggregates -----------------------------------------------------------------------
    def aggregate_value(self, e: Expr, rows: list[Solution]):
        if isinstance(e, Aggregate):
            return self.aggregate(e, rows)
        if isinstance(e, (IRI, Literal)):
            return e
        if isinstance(e, Var):
            raise ExpressionError(f"?{e.name} used outside an aggregate")
        if isinstance(e, Call):
            return call(e.name, [self.aggregate_value(a, rows) for a in e.args])
        if isinstance(e, BinaryOp):
            left, right = self.aggregate_value(e.left, rows), self.aggregate_value(e.right, rows)
            if e.op in ("=", "!=", "<", ">", "<=", ">="):
                return boolean(compare(e.op, left, right))
            if e.op == "&&":
                return boolean(ebv(left) and ebv(right))
            if e.op == "||":
                return boolean(ebv(left) or ebv(right))
            return arithmetic(e.op, left, right)
        if isinstance(e, UnaryOp):
            value = self.aggregate_value(e.operand, rows)
            return boolean(not ebv(value)) if e.op == "!" else negate(value) if e.op == "-" else value
        raise TypeError(f"unexpected expression {e!r}")

    def aggregate(self, agg: Aggregate, rows: list[Solution]):
        if agg.expr is None:
            if agg.distinct:
                return format_number(Fraction(len({frozenset(r.items()) for r in rows})), 0)
            return format_number(Fraction(len(rows)), 0)
        values = []
        for r in rows:
            try:
                values.append(self.expr(agg.expr, r))
            except ExpressionError:
                if agg.func == "AVG":
                    raise
        if agg.distinct:
            values = list(dict.fromkeys(values))
        if agg.func == "COUNT":
            return format_number(Fraction(len(values)), 0)
        if not values:
            return format_number(Fraction(0), 0)
        total: Fraction | float = Fraction(0)
        rank = 0
        for v in values:
            n = as_number(v)
            rank = max(rank, numeric_rank(v))
            total = float(total) + n if isinstance(n, float) or isinstance(total, float) else total + n
        return format_number(total / len(values), max(rank, 1))

    # -- queries ----------------------------------------------------------------------------
    def select(self, q: SelectQuery) -> tuple[list[str], list[Solution]]:
        solutions = self.group(q.where)
        if q.has_aggregates():
            if not solutions and any(_has_avg(item.expr) for item in q.items):
                rows: list[Solution] = []
            else:
                row: Solution = {}
                for item in q.items:
                    try:
                        row[item.var.name] = self.aggregate_value(item.expr, solutions)
                    except ExpressionError:
                        pass
                rows = [row]
        else:
            rows = []
            for sol in solutions:
                row = dict(sol)
                for item in q.items or ():
                    if item.expr is not None:
                        try:
                            row[item.var.name] = self.expr(item.expr, row)
                        except ExpressionError:
                            pass
                rows.append(row)
        for key in reversed(q.order_by):
            rows.sort(key=lambda r: term_order_key(self._try(key.expr, r)), reverse=key.descending)
        variables = q.projected()
        rows = [{v: r[v] for v in variables if v in r} for r in rows]
        if q.distinct:
            seen = set()
            unique = []
            for r in rows:
                k = tuple(r.get(v) for v in variables)
                if k not in seen:
                    seen.add(k)
                    unique.append(r)
            rows = unique
        if q.limit is not None:
            rows = rows[: q.limit]
        return variables, rows

    def _try(self, e: Expr, row: Solution):
        try:
            return self.expr(e, row)
        except ExpressionError:
            return None


def _has_avg(e) -> bool:
    if isinstance(e, Aggregate):
        return e.func == "AVG"
    if isinstance(e, Call):
        return any(_has_avg(a) for a in e.args)
    if isinstance(e, BinaryOp):
        return _has_avg(e.left) or _has_avg(e.right)
    if isinstance(e, UnaryOp):
        return _has_avg(e.operand)
    return False

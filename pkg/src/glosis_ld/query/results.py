"""Solution tables and their SPARQL-results JSON and CSV renderings."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from ..rdf import IRI, BNode, Literal
from ..rdf.terms import RDF_LANGSTRING, XSD_STRING

Term = IRI | Literal | BNode


@dataclass
class SolutionTable:
    vars: tuple[str, ...]
    rows: list[tuple[Term | None, ...]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.vars = tuple(self.vars)
        width = len(self.vars)
        for row in self.rows:
            if len(row) != width:
                raise ValueError(f"row width {len(row)} does not match header width {width}")

    @classmethod
    def from_solutions(cls, variables: Iterable[str], solutions: Iterable[dict[str, Term]]) -> SolutionTable:
        variables = tuple(variables)
        return cls(variables, [tuple(s.get(v) for v in variables) for s in solutions])

    def solutions(self) -> list[dict[str, Term]]:
        return [{v: t for v, t in zip(self.vars, row) if t is not None} for row in self.rows]

    def column(self, var: str) -> list[Term | None]:
        i = self.vars.index(var)
        return [row[i] for row in self.rows]

    def multiset(self) -> Counter:
        """Rows as a bag of (var, term) sets, insensitive to row and column order."""
        return Counter(frozenset((v, t) for v, t in zip(self.vars, row) if t is not None) for row in self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    # -- SPARQL 1.1 results JSON ------------------------------------------------------
    def to_json(self) -> dict:
        bindings = []
        for row in self.rows:
            bindings.append({v: term_to_json(t) for v, t in zip(self.vars, row) if t is not None})
        return {"head": {"vars": list(self.vars)}, "results": {"bindings": bindings}}

    @classmethod
    def from_json(cls, doc: dict) -> SolutionTable:
        try:
            variables = tuple(doc["head"]["vars"])
            rows = [
                tuple(term_from_json(b[v]) if v in b else None for v in variables)
                for b in doc["results"]["bindings"]
            ]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"not a SPARQL results document: {exc}") from None
        return cls(variables, rows)

    # -- SPARQL 1.1 results CSV ---------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.vars)
        for row in self.rows:
            writer.writerow(["" if t is None else csv_value(t) for t in row])
        return buf.getvalue()


def term_to_json(term: Term) -> dict:
    if isinstance(term, IRI):
        return {"type": "uri", "value": term.value}
    if isinstance(term, BNode):
        return {"type": "bnode", "value": term.label}
    out = {"type": "literal", "value": term.lexical}
    if term.lang:
        out["xml:lang"] = term.lang
    elif term.datatype.value != XSD_STRING:
        out["datatype"] = term.datatype.value
    return out


def term_from_json(doc: dict) -> Term:
    kind = doc.get("type")
    value = doc.get("value")
    if not isinstance(value, str):
        raise ValueError(f"binding without a string value: {doc!r}")
    if kind == "uri":
        return IRI(value)
    if kind == "bnode":
        return BNode(value)
    if kind in ("literal", "typed-literal"):
        if doc.get("xml:lang"):
            return Literal(value, lang=doc["xml:lang"])
        datatype = doc.get("datatype", XSD_STRING)
        if datatype == RDF_LANGSTRING:
            raise ValueError("rdf:langString binding without xml:lang")
        return Literal(value, IRI(datatype))
    raise ValueError(f"unknown binding type {kind!r}")


def csv_value(term: Term) -> str:
    if isinstance(term, IRI):
        return term.value
    if isinstance(term, BNode):
        return f"_:{term.label}"
    return term.lexical

"""Codelists as spreadsheets: one CSV row per concept, converted to and from
the paired SKOS scheme / OWL enumeration class pattern."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import astuple, dataclass
from pathlib import Path
from typing import Iterable

from ..rdf import (
    GLOSIS_PREFIXES, OWL, RDF, RDFS, SKOS, IRI, BNodeFactory, Graph, Literal, Term, read_list, write_list,
)
from ..schema import extract_codelists, load_catalog

CSV_COLUMNS = ("scheme", "class", "notation", "prefLabel", "definition", "source", "broader")


class CodelistError(ValueError):
    pass


class CodelistWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CodelistRow:
    scheme: str
    cls: str
    notation: str
    pref_label: str
    definition: str = ""
    source: str = ""
    broader: str = ""

    def as_csv(self) -> dict[str, str]:
        return dict(zip(CSV_COLUMNS, astuple(self)))


def _local_name(iri: str) -> str:
    return iri.rstrip("/#").rsplit("/", 1)[-1].rsplit("#", 1)[-1]


def _subject_name(cls_iri: str) -> str:
    """``RootsAbundanceValueCode`` -> ``RootsAbundanceValue``."""
    name = _local_name(cls_iri)
    return name[: -len("Code")] if name.endswith("Code") and len(name) > 4 else name


def _expand(name: str, prefixes: dict[str, str]) -> str:
    if "://" in name or name.startswith("urn:"):
        return name
    prefix, sep, local = name.partition(":")
    if sep and prefix in prefixes:
        return prefixes[prefix] + local
    raise CodelistError(f"cannot expand {name!r} to an absolute IRI")


def codelist_csv_to_rdf(rows: Iterable[CodelistRow]) -> Graph:
    """Build the scheme, the enumeration class and one concept per row.

    Rows are grouped by scheme in order of first appearance; within a scheme
    the row order becomes the ``owl:oneOf`` order.
    """
    groups: dict[str, list[CodelistRow]] = {}
    for row in rows:
        groups.setdefault(row.scheme, []).append(row)
    graph = Graph(prefixes={k: GLOSIS_PREFIXES[k] for k in ("rdf", "rdfs", "owl", "skos", "glosis_cl", "glosis_proc")})
    make_node = BNodeFactory("c")
    for scheme_iri, group in groups.items():
        classes = {r.cls for r in group}
        if len(classes) != 1:
            raise CodelistError(f"scheme {scheme_iri} is paired with several classes: {sorted(classes)}")
        scheme, cls = IRI(scheme_iri), IRI(group[0].cls)
        notations = [r.notation for r in group]
        dupes = sorted({n for n in notations if notations.count(n) > 1})
        if dupes:
            raise CodelistError(f"duplicate notation(s) {dupes} in scheme {scheme_iri}")
        concept = {r.notation: IRI(f"{scheme_iri}-{r.notation}") for r in group}
        subject = _subject_name(cls.value)
        source = next((r.source for r in group if r.source), "")

        graph.add(scheme, RDF.type, SKOS.ConceptScheme)
        scheme_label = Literal(f"Code list for {subject} - codelist scheme", lang="en")
        graph.add(scheme, SKOS.prefLabel, scheme_label)
        graph.add(scheme, RDFS.label, scheme_label)
        graph.add(scheme, SKOS.note, Literal(f"This code list provides the {subject}.", lang="en"))
        if source:
            graph.add(scheme, SKOS.definition, Literal(source))
        graph.add(scheme, RDFS.seeAlso, cls)

        graph.add(cls, RDF.type, OWL.Class)
        graph.add(cls, RDFS.subClassOf, SKOS.Concept)
        graph.add(cls, RDFS.label, Literal(f"Code list for {subject} - codelist class", lang="en"))
        graph.add(cls, RDFS.comment, Literal(f"This code list provides the {subject}.", lang="en"))
        if source:
            graph.add(cls, SKOS.definition, Literal(source))
        graph.add(cls, RDFS.seeAlso, scheme)
        graph.add(cls, OWL.oneOf, write_list(graph, [concept[n] for n in notations], make_node))

        for r in group:
            c = concept[r.notation]
            graph.add(c, RDF.type, SKOS.Concept)
            graph.add(c, RDF.type, cls)
            if r.broader:
                if r.broader not in concept:
                    raise CodelistError(f"row {r.notation}: broader {r.broader!r} is not a notation in {scheme_iri}")
                graph.add(c, SKOS.broader, concept[r.broader])
            else:
                graph.add(c, SKOS.topConceptOf, scheme)
            graph.add(c, SKOS.prefLabel, Literal(r.pref_label, lang="en"))
            graph.add(c, SKOS.notation, Literal(r.notation))
            if r.definition:
                graph.add(c, SKOS.definition, Literal(r.definition))
            graph.add(c, SKOS.inScheme, scheme)
    return graph


def codelist_rdf_to_csv(graph: Graph) -> list[CodelistRow]:
    """Rows for every scheme/class pair in ``graph``, concepts in enumeration order.

    Codelists without ``owl:oneOf`` are exported in IRI order with a
    :class:`CodelistWarning`; pairs missing their scheme or class are skipped
    with a warning.
    """
    catalog = load_catalog([(IRI("urn:glosis:codelist-export"), graph)])
    rows: list[CodelistRow] = []
    for cl in extract_codelists(catalog):
        if cl.scheme is None or cl.cls is None:
            missing = "scheme" if cl.scheme is None else "class"
            warnings.warn(f"codelist {cl.cls or cl.scheme} has no {missing}; skipped", CodelistWarning, stacklevel=2)
            continue
        if not cl.closed:
            warnings.warn(f"codelist {cl.cls} has no owl:oneOf (closed=false); rows in IRI order",
                          CodelistWarning, stacklevel=2)
        notation_of = {c.iri: c.notation for c in cl.concepts}
        source = next((o.lexical for o in graph.objects(cl.scheme, SKOS.definition) if isinstance(o, Literal)), "")
        for c in cl.concepts:
            if not c.notation:
                warnings.warn(f"concept {c.iri} of {cl.cls} has no skos:notation; its row is incomplete",
                              CodelistWarning, stacklevel=2)
            rows.append(CodelistRow(
                scheme=cl.scheme.value,
                cls=cl.cls.value,
                notation=c.notation,
                pref_label=c.pref_label,
                definition=c.definition,
                source=source,
                broader=notation_of.get(c.broader, "") if c.broader else "",
            ))
    return rows


def codelist_subgraph(graph: Graph, scheme: IRI) -> Graph:
    """The triples describing one codelist: scheme, class, enumeration list and concepts."""
    out = Graph(prefixes=graph.prefixes)
    classes = [c for c in graph.objects(scheme, RDFS.seeAlso) if (c, RDFS.subClassOf, SKOS.Concept) in graph]
    concepts: list[Term] = list(graph.subjects(SKOS.inScheme, scheme))
    subjects: list[Term] = [scheme, *classes]
    for cls in classes:
        head = graph.value(cls, OWL.oneOf)
        node = head
        while node is not None and node != RDF.nil:
            subjects.append(node)
            node = graph.value(node, RDF.rest)
        if head is not None:
            concepts.extend(m for m in read_list(graph, head) if m not in concepts)
    for s in [*subjects, *concepts]:
        out.update(graph.match(s, None, None))
    return out


def read_codelist_csv(source: str | Path | io.TextIOBase, prefixes: dict[str, str] | None = None) -> list[CodelistRow]:
    """Read codelist rows; scheme/class cells may use prefixed names such as ``glosis_cl:X``."""
    prefixes = {**GLOSIS_PREFIXES, **(prefixes or {})}
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_codelist_csv(io.StringIO(fh.read()), prefixes)
    reader = csv.DictReader(source)
    missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise CodelistError(f"codelist CSV lacks column(s): {', '.join(missing)}")
    rows = []
    for rec in reader:
        values = [(rec.get(c) or "").strip() if c in ("scheme", "class", "notation", "broader") else rec.get(c) or ""
                  for c in CSV_COLUMNS]
        values[0], values[1] = _expand(values[0], prefixes), _expand(values[1], prefixes)
        rows.append(CodelistRow(*values))
    return rows


def write_codelist_csv(rows: Iterable[CodelistRow], target: str | Path | io.TextIOBase) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            write_codelist_csv(rows, fh)
        return
    writer = csv.DictWriter(target, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_csv())


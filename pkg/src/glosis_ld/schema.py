"""Compile GloSIS ontology modules into restriction profiles, codelists,
procedure schemes and documentation metadata."""

from __future__ import annotations

import logging
import urllib.request
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .rdf import (
    DC, DCTERMS, FOAF, GSP, OWL, QUDT, RDF, RDFS, SCHEMA, SKOS, SOSA, XSD,
    IRI, BNode, BNodeFactory, Graph, Literal, MalformedListError, Term, merge, parse_turtle, read_list, write_list,
)

log = logging.getLogger(__name__)

OBSERVATION = "Observation"
QUANTITY_VALUE = "QuantityValue"
SPATIAL_OBJECT = "SpatialObject"
CODELIST = "Codelist"
OTHER = "Other"

SOME, ALL, HAS, CARD = "some", "all", "has", "card"
_KIND_PREDICATES = {
    SOME: OWL.someValuesFrom,
    ALL: OWL.allValuesFrom,
    HAS: OWL.hasValue,
}


class SchemaError(ValueError):
    pass


class DuplicateModuleError(SchemaError):
    pass


class UnknownClassError(SchemaError):
    pass


class UnknownModuleError(SchemaError):
    pass


class RestrictionError(SchemaError):
    def __init__(self, node: Term, reason: str) -> None:
        super().__init__(f"cannot decode restriction {node}: {reason}")
        self.node = node


@dataclass(frozen=True)
class RestrictionSpec:
    """One decoded ``owl:Restriction``.

    ``values`` holds the filler: one class or datatype IRI, several IRIs for an
    ``owl:unionOf`` filler, or the single required term for ``has``.
    ``count`` is only set for ``card``.
    """

    on_property: IRI
    kind: str
    values: tuple[Term, ...] = ()
    count: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in (SOME, ALL, HAS, CARD):
            raise ValueError(f"unknown restriction kind {self.kind!r}")
        if self.kind == CARD:
            if self.count is None or self.count < 0 or self.values:
                raise ValueError("cardinality restriction needs a non-negative count and no filler")
        elif not self.values or self.count is not None:
            raise ValueError(f"{self.kind} restriction needs a non-empty filler")


@dataclass(frozen=True)
class ClassProfile:
    iri: IRI
    superclasses: tuple[IRI, ...]
    restrictions: tuple[RestrictionSpec, ...]
    category: str

    def on(self, prop: IRI, kind: str | None = None) -> list[RestrictionSpec]:
        return [r for r in self.restrictions if r.on_property == prop and (kind is None or r.kind == kind)]


@dataclass(frozen=True)
class Concept:
    iri: IRI
    notation: str = ""
    pref_label: str = ""
    definition: str = ""
    broader: IRI | None = None


@dataclass(frozen=True)
class CodeList:
    scheme: IRI | None
    cls: IRI | None
    label: str
    concepts: tuple[Concept, ...]
    closed: bool
    observable_property: bool = False
    procedure: bool = False

    @property
    def notations(self) -> list[str]:
        return [c.notation for c in self.concepts]

    def members(self) -> set[IRI]:
        return {c.iri for c in self.concepts}


@dataclass(frozen=True)
class ProcedureConcept:
    iri: IRI
    notation: str
    pref_label: str
    definition: str
    broader: tuple[IRI, ...]
    narrower: tuple[IRI, ...]
    scope_notes: tuple[Term, ...]


@dataclass(frozen=True)
class ProcedureScheme:
    scheme: IRI
    cls: IRI | None
    concepts: tuple[ProcedureConcept, ...]

    def concept(self, iri: IRI) -> ProcedureConcept | None:
        return next((c for c in self.concepts if c.iri == iri), None)

    def is_acyclic(self) -> bool:
        edges = {c.iri: c.broader for c in self.concepts}
        state: dict[IRI, int] = {}

        def visit(node: IRI) -> bool:
            if state.get(node) == 1:
                return False
            if state.get(node) == 2:
                return True
            state[node] = 1
            ok = all(visit(n) for n in edges.get(node, ()))
            state[node] = 2
            return ok

        return all(visit(n) for n in edges)


@dataclass(frozen=True)
class MetadataRecord:
    title: str = ""
    version: str = ""
    creators: tuple[str, ...] = ()
    creator_affiliations: tuple[str, ...] = ()
    contributors: tuple[str, ...] = ()
    contributor_affiliations: tuple[str, ...] = ()
    license: str = ""


@dataclass
class OntologyCatalog:
    """Loaded modules plus lazily computed, cached extractions.

    Treat an instance as read-only once :func:`load_catalog` returns it.
    """

    modules: dict[IRI, Graph] = field(default_factory=dict)
    imports: dict[IRI, tuple[IRI, ...]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    graph: Graph = field(default_factory=Graph)

    def __post_init__(self) -> None:
        self._closure: dict[IRI, tuple[IRI, ...]] = {}
        self._profiles: dict[IRI, ClassProfile] = {}
        self._codelists: list[CodeList] | None = None
        self._procedures: list[ProcedureScheme] | None = None

    # -- class hierarchy -----------------------------------------------------
    def equivalents(self, cls: Term) -> set[Term]:
        g = self.graph
        return set(g.objects(cls, OWL.equivalentClass)) | set(g.subjects(OWL.equivalentClass, cls))

    def superclass_closure(self, cls: IRI) -> tuple[IRI, ...]:
        """``cls`` and every class reachable by subClassOf or equivalentClass, BFS order."""
        if cls in self._closure:
            return self._closure[cls]
        seen: dict[Term, None] = {cls: None}
        queue = deque([cls])
        while queue:
            c = queue.popleft()
            nxt = [o for o in self.graph.objects(c, RDFS.subClassOf) if isinstance(o, IRI)]
            nxt += [e for e in self.equivalents(c) if isinstance(e, IRI)]
            for n in nxt:
                if n not in seen:
                    seen[n] = None
                    queue.append(n)
        result = tuple(seen)
        self._closure[cls] = result
        return result

    def is_subclass(self, sub: IRI, sup: IRI) -> bool:
        return sup in self.superclass_closure(sub)

    def is_class(self, cls: Term) -> bool:
        g = self.graph
        return isinstance(cls, IRI) and (
            (cls, RDF.type, OWL.Class) in g or (cls, RDF.type, RDFS.Class) in g or g.count(cls, RDFS.subClassOf) > 0
        )

    def type_closure(self, types: Iterable[IRI]) -> set[IRI]:
        out: set[IRI] = set()
        for t in types:
            if isinstance(t, IRI):
                out.update(self.superclass_closure(t))
        return out

    def category(self, cls: IRI) -> str:
        closure = self.superclass_closure(cls)
        if SKOS.Concept in closure:
            return CODELIST
        if SOSA.Observation in closure:
            return OBSERVATION
        if QUDT.QuantityValue in closure:
            return QUANTITY_VALUE
        if GSP.Feature in closure:
            return SPATIAL_OBJECT
        return OTHER

    def restrictions(self, cls: IRI) -> list[tuple[IRI, RestrictionSpec]]:
        """Restrictions declared on ``cls`` and inherited from its superclasses."""
        out = []
        for c in self.superclass_closure(cls):
            if not self.is_class(c):
                continue
            try:
                profile = extract_class_profile(self, c)
            except RestrictionError as exc:
                log.warning("skipping %s: %s", c, exc)
                continue
            out.extend((c, r) for r in profile.restrictions)
        return out

    # -- vocabulary lookups --------------------------------------------------
    def codelists(self) -> list[CodeList]:
        if self._codelists is None:
            self._codelists = extract_codelists(self)
        return self._codelists

    def procedures(self) -> list[ProcedureScheme]:
        if self._procedures is None:
            self._procedures = extract_procedures(self)
        return self._procedures

    def codelist_for_class(self, cls: IRI) -> CodeList | None:
        return next((c for c in self.codelists() if c.cls == cls), None)

    def codelist_for_scheme(self, scheme: IRI) -> CodeList | None:
        return next((c for c in self.codelists() if c.scheme == scheme), None)

    def codelist_of_concept(self, concept: Term) -> CodeList | None:
        for cl in self.codelists():
            if concept in cl.members():
                return cl
        schemes = self.graph.objects(concept, SKOS.inScheme)
        return next((cl for cl in self.codelists() if cl.scheme in schemes), None)

    def procedure_concepts(self) -> set[IRI]:
        return {c.iri for p in self.procedures() for c in p.concepts}

    def module_of(self, term: IRI) -> IRI | None:
        """The module whose graph describes ``term`` as a subject."""
        for iri, g in self.modules.items():
            if iri == term or g.has_subject(term):
                return iri
        return None


# -- loading -------------------------------------------------------------------

def _module_iris(graph: Graph) -> list[IRI]:
    return [s for s in graph.subjects(RDF.type, OWL.Ontology) if isinstance(s, IRI)]


def load_catalog(
    documents: Iterable[tuple[IRI, Graph]],
    resolver: Callable[[IRI], Graph | None] | None = None,
) -> OntologyCatalog:
    """Build a catalog from ``(module IRI, graph)`` pairs.

    Imports missing from the input are reported in ``catalog.warnings``. When a
    ``resolver`` is given it is asked for each missing import first; none is
    used by default, so no network access happens unless a caller opts in.
    """
    modules: dict[IRI, Graph] = {}
    for iri, graph in documents:
        if iri in modules:
            raise DuplicateModuleError(f"duplicate module IRI {iri}")
        modules[iri] = graph

    catalog = OntologyCatalog()
    pending = deque(modules)
    while pending:
        iri = pending.popleft()
        imported = tuple(
            o for s in (_module_iris(modules[iri]) or [iri])
            for o in modules[iri].objects(s, OWL.imports) if isinstance(o, IRI)
        )
        catalog.imports[iri] = imported
        for target in imported:
            if target in modules:
                continue
            fetched = resolver(target) if resolver is not None else None
            if fetched is not None:
                modules[target] = fetched
                pending.append(target)
            else:
                msg = f"unresolved import {target} (from {iri})"
                if msg not in catalog.warnings:
                    catalog.warnings.append(msg)

    catalog.modules = modules
    catalog.graph = merge(modules.values())
    return catalog


def read_manifest(path: str | Path) -> list[tuple[IRI, Path]]:
    """Parse ``IRI<TAB>path`` lines; blank lines and ``#`` comments are skipped."""
    path = Path(path)
    entries = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = raw.split("\t")
        if len(parts) != 2:
            raise SchemaError(f"{path}:{lineno}: expected 'IRI<TAB>path'")
        entries.append((IRI(parts[0].strip()), (path.parent / parts[1].strip()).resolve()))
    return entries


def load_manifest(path: str | Path, fetch_remote: bool = False) -> OntologyCatalog:
    """Load every module listed in a manifest.

    A module IRI may appear on several lines; its files are merged into one
    module graph. With ``fetch_remote`` imports missing locally are retrieved
    over HTTP as Turtle.
    """
    from .rdf import parse_file

    parts: dict[IRI, list[Graph]] = {}
    for iri, file in read_manifest(path):
        parts.setdefault(iri, []).append(parse_file(file))
    modules = [(iri, merge(graphs)) for iri, graphs in parts.items()]
    return load_catalog(modules, resolver=fetch_turtle if fetch_remote else None)


def fetch_turtle(iri: IRI, timeout: float = 10.0) -> Graph | None:
    req = urllib.request.Request(iri.value, headers={"Accept": "text/turtle"})
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            text = resp.read().decode("utf-8")
        return parse_turtle(text, base=iri.value)[0]
    except Exception as exc:  # network and parse failures both mean "unresolved"
        log.warning("could not fetch %s: %s", iri, exc)
        return None


# -- restriction profiles --------------------------------------------------------

def _filler(graph: Graph, node: Term) -> tuple[Term, ...]:
    union = graph.value(node, OWL.unionOf) if isinstance(node, BNode) else None
    if union is None:
        return (node,)
    try:
        members = tuple(read_list(graph, union))
    except MalformedListError as exc:
        raise RestrictionError(node, str(exc)) from exc
    if not members:
        raise RestrictionError(node, "empty owl:unionOf")
    return members


def decode_restriction(graph: Graph, node: Term) -> RestrictionSpec:
    prop = graph.value(node, OWL.onProperty)
    if not isinstance(prop, IRI):
        raise RestrictionError(node, "missing owl:onProperty")
    for kind, pred in _KIND_PREDICATES.items():
        filler = graph.value(node, pred)
        if filler is not None:
            values = (filler,) if kind == HAS else _filler(graph, filler)
            return RestrictionSpec(prop, kind, values)
    count = graph.value(node, OWL.cardinality)
    if isinstance(count, Literal):
        try:
            return RestrictionSpec(prop, CARD, count=int(count.lexical))
        except ValueError as exc:
            raise RestrictionError(node, f"bad cardinality {count.lexical!r}") from exc
    raise RestrictionError(node, "no supported constraint (some/all/has/cardinality)")


def extract_class_profile(catalog: OntologyCatalog, cls: IRI) -> ClassProfile:
    if cls in catalog._profiles:
        return catalog._profiles[cls]
    if not catalog.is_class(cls):
        raise UnknownClassError(f"class {cls} is not declared in the catalog")
    g = catalog.graph
    supers: list[IRI] = []
    restrictions: list[RestrictionSpec] = []
    for o in g.objects(cls, RDFS.subClassOf):
        if isinstance(o, IRI):
            supers.append(o)
        elif g.value(o, OWL.onProperty) is not None or (o, RDF.type, OWL.Restriction) in g:
            restrictions.append(decode_restriction(g, o))
    profile = ClassProfile(cls, tuple(supers), tuple(restrictions), catalog.category(cls))
    catalog._profiles[cls] = profile
    return profile


def profile_triples(profile: ClassProfile, graph: Graph, make_node: Callable[[], BNode] | None = None) -> None:
    """Write a profile's subclass axioms back as OWL triples into ``graph``."""
    make_node = make_node or BNodeFactory("r")
    for sup in profile.superclasses:
        graph.add(profile.iri, RDFS.subClassOf, sup)
    for r in profile.restrictions:
        node = make_node()
        graph.add(profile.iri, RDFS.subClassOf, node)
        graph.add(node, RDF.type, OWL.Restriction)
        graph.add(node, OWL.onProperty, r.on_property)
        if r.kind == CARD:
            graph.add(node, OWL.cardinality, Literal(str(r.count), XSD.nonNegativeInteger))
        elif r.kind == HAS or len(r.values) == 1:
            graph.add(node, _KIND_PREDICATES[r.kind], r.values[0])
        else:
            union = make_node()
            graph.add(node, _KIND_PREDICATES[r.kind], union)
            graph.add(union, OWL.unionOf, write_list(graph, r.values, make_node))


# -- codelists and procedures ------------------------------------------------------

def _text(graph: Graph, s: Term, p: IRI) -> str:
    values = [o for o in graph.objects(s, p) if isinstance(o, Literal)]
    if not values:
        return ""
    preferred = [v for v in values if v.lang in (None, "en")]
    return sorted(preferred or values, key=lambda v: (v.lang is not None, v.lexical))[0].lexical


def _concept(graph: Graph, iri: IRI) -> Concept:
    broader = graph.value(iri, SKOS.broader)
    return Concept(
        iri,
        notation=_text(graph, iri, SKOS.notation),
        pref_label=_text(graph, iri, SKOS.prefLabel),
        definition=_text(graph, iri, SKOS.definition),
        broader=broader if isinstance(broader, IRI) else None,
    )


def _pairs(catalog: OntologyCatalog) -> list[tuple[IRI | None, IRI | None]]:
    g = catalog.graph
    schemes = [s for s in g.subjects(RDF.type, SKOS.ConceptScheme) if isinstance(s, IRI)]
    classes = [
        c for c in dict.fromkeys(g.subjects(RDFS.subClassOf, SKOS.Concept))
        if isinstance(c, IRI)
    ]
    class_set = set(classes)
    pairs: list[tuple[IRI | None, IRI | None]] = []
    used: set[IRI] = set()
    for s in schemes:
        linked = [c for c in g.objects(s, RDFS.seeAlso) if c in class_set]
        linked += [c for c in g.subjects(RDFS.seeAlso, s) if c in class_set and c not in linked]
        cls = linked[0] if linked else None
        pairs.append((s, cls))
        if cls is not None:
            used.add(cls)
    pairs.extend((None, c) for c in classes if c not in used)
    return pairs


def extract_codelists(catalog: OntologyCatalog) -> list[CodeList]:
    """One entry per concept scheme / codelist class pair, sorted by scheme then class."""
    g = catalog.graph
    out = []
    for scheme, cls in _pairs(catalog):
        enumeration = g.value(cls, OWL.oneOf) if cls is not None else None
        closed = enumeration is not None
        if closed:
            try:
                members = [m for m in read_list(g, enumeration) if isinstance(m, IRI)]
            except MalformedListError as exc:
                log.warning("codelist %s has a malformed oneOf: %s", cls, exc)
                members = []
        else:
            found: set[IRI] = set()
            if scheme is not None:
                found.update(s for s in g.subjects(SKOS.inScheme, scheme) if isinstance(s, IRI))
                found.update(s for s in g.subjects(SKOS.topConceptOf, scheme) if isinstance(s, IRI))
            if cls is not None:
                found.update(s for s in g.subjects(RDF.type, cls) if isinstance(s, IRI))
            members = sorted(found, key=lambda i: i.value)
        label = _text(g, cls, RDFS.label) if cls is not None else ""
        if not label and scheme is not None:
            label = _text(g, scheme, SKOS.prefLabel) or _text(g, scheme, RDFS.label)
        supers = catalog.superclass_closure(cls) if cls is not None else ()
        out.append(CodeList(
            scheme=scheme,
            cls=cls,
            label=label,
            concepts=tuple(_concept(g, m) for m in members),
            closed=closed,
            observable_property=SOSA.ObservableProperty in supers,
            procedure=SOSA.Procedure in supers,
        ))
    out.sort(key=lambda c: ((c.scheme or c.cls).value, c.cls.value if c.cls else ""))
    return out


def extract_procedures(catalog: OntologyCatalog) -> list[ProcedureScheme]:
    g = catalog.graph
    out = []
    for cl in extract_codelists(catalog):
        if cl.scheme is None:
            continue
        members = [c.iri for c in cl.concepts]
        if not cl.procedure and not any(SOSA.Procedure in catalog.type_closure(g.objects(m, RDF.type)) for m in members):
            continue
        concepts = []
        for m in members:
            broader = tuple(o for o in g.objects(m, SKOS.broader) if isinstance(o, IRI))
            narrower = set(o for o in g.objects(m, SKOS.narrower) if isinstance(o, IRI))
            narrower.update(s for s in g.subjects(SKOS.broader, m) if isinstance(s, IRI))
            concepts.append(ProcedureConcept(
                m,
                notation=_text(g, m, SKOS.notation),
                pref_label=_text(g, m, SKOS.prefLabel),
                definition=_text(g, m, SKOS.definition),
                broader=broader,
                narrower=tuple(sorted(narrower, key=lambda i: i.value)),
                scope_notes=tuple(g.objects(m, SKOS.scopeNote)),
            ))
        out.append(ProcedureScheme(cl.scheme, cl.cls, tuple(concepts)))
    return out


# -- metadata ----------------------------------------------------------------------

def _name(graph: Graph, node: Term) -> str:
    if isinstance(node, Literal):
        return node.lexical
    for p in (FOAF.name, SCHEMA.name, RDFS.label):
        text = _text(graph, node, p)
        if text:
            return text
    return node.value if isinstance(node, IRI) else ""


def _people(graph: Graph, subject: IRI, preds: tuple[IRI, ...]) -> tuple[tuple[str, ...], tuple[str, ...]]:
    names, affiliations = [], []
    nodes = [o for p in preds for o in graph.objects(subject, p)]
    for node in sorted(nodes, key=lambda n: _name(graph, n)):
        names.append(_name(graph, node))
        aff = graph.value(node, SCHEMA.affiliation) if not isinstance(node, Literal) else None
        affiliations.append(_name(graph, aff) if aff is not None else "")
    return tuple(names), tuple(affiliations)


def extract_metadata(catalog: OntologyCatalog, module: IRI) -> MetadataRecord:
    if module not in catalog.modules:
        raise UnknownModuleError(f"module {module} is not loaded")
    g = catalog.modules[module]
    subject = next(iter(_module_iris(g)), module)
    creators, creator_aff = _people(g, subject, (DCTERMS.creator, DC.creator))
    contributors, contributor_aff = _people(g, subject, (DCTERMS.contributor, DC.contributor))
    license_node = g.value(subject, DCTERMS.license)
    return MetadataRecord(
        title=_text(g, subject, DCTERMS.title) or _text(g, subject, DC.title),
        version=_text(g, subject, OWL.versionInfo),
        creators=creators,
        creator_affiliations=creator_aff,
        contributors=contributors,
        contributor_affiliations=contributor_aff,
        license=(license_node.value if isinstance(license_node, IRI)
                 else license_node.lexical if isinstance(license_node, Literal) else ""),
    )


METADATA_CONFIG_KEYS = (
    "title", "version", "authors", "authorsInstitution", "contributors", "contributorsInstitution", "license",
)


def metadata_config(record: MetadataRecord) -> str:
    """Flat ``key=value`` lines for a documentation generator.

    Lists are joined with ``;`` and line breaks inside values are escaped, so
    each key occupies exactly one line.
    """
    values = {
        "title": record.title,
        "version": record.version,
        "authors": ";".join(record.creators),
        "authorsInstitution": ";".join(record.creator_affiliations),
        "contributors": ";".join(record.contributors),
        "contributorsInstitution": ";".join(record.contributor_affiliations),
        "license": record.license,
    }

    def clean(text: str) -> str:
        return text.replace("\\", "\\\\").replace("\r", "\\r").replace("\n", "\\n")

    return "".join(f"{k}={clean(values[k])}\n" for k in METADATA_CONFIG_KEYS)

def is_datatype(term: Term, catalog: OntologyCatalog | None = None) -> bool:
    if not isinstance(term, IRI):
        return False
    if term.value.startswith(XSD.base) or term == RDF.langString:
        return True
    return catalog is not None and (term, RDF.type, RDFS.Datatype) in catalog.graph


__all__ = [
    "ALL", "CARD", "CODELIST", "HAS", "METADATA_CONFIG_KEYS", "OBSERVATION", "OTHER", "QUANTITY_VALUE", "SOME", "SPATIAL_OBJECT",
    "ClassProfile", "CodeList", "Concept", "DuplicateModuleError", "MetadataRecord", "OntologyCatalog",
    "ProcedureConcept", "ProcedureScheme", "RestrictionError", "RestrictionSpec", "SchemaError",
    "UnknownClassError", "UnknownModuleError", "decode_restriction", "extract_class_profile",
    "extract_codelists", "extract_metadata", "extract_procedures", "fetch_turtle", "is_datatype",
    "load_catalog", "load_manifest", "metadata_config", "profile_triples", "read_manifest",
]

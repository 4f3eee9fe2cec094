"""Parameterised query templates behind the REST methods.

A template is a ``.rq`` file whose leading ``#+`` comment lines hold a YAML
block describing the method and its parameters. Placeholders in the query
body are variables named ``?_name``; instantiation swaps them for RDF terms in
the parsed tree, so a parameter value can never be spliced into query text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields, is_dataclass, replace
from pathlib import Path

import yaml

from ..geo import WKTError, parse_wkt
from ..rdf import GSP, IRI, RDF, RDFS, XSD, Graph, Literal
from ..query import SelectQuery, Var, parse_query
from ..query.federation import ENDPOINT_URN
from ..rdf.xsd import valid_lexical
from ..schema import OntologyCatalog

TEMPLATE_DIR = Path(__file__).with_name("templates")
PHYSIO_CHEMICAL_CLASS = IRI("http://w3id.org/glosis/model/codelists/PhysioChemicalPropertyCode")
RAMON_NUTS_REGION = IRI("http://rdfdata.eionet.europa.eu/ramon/ontology/NUTSRegion")
KINDS = ("wkt", "nuts", "property", "procedure", "number", "label", "endpoint")

_NUTS_CODE = re.compile(r"[A-Z]{2}[0-9A-Z]{0,3}")
_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
_ENDPOINT_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_.-]{0,63}")


class TemplateError(ValueError):
    """A template file is malformed or inconsistent with its declared parameters."""


class ParameterError(ValueError):
    """A request parameter is missing, unknown, or has an unusable value.

    ``status`` is the HTTP status the service answers with: 400 for malformed
    WKT, 422 for everything else.
    """

    def __init__(self, name: str, message: str, status: int = 422) -> None:
        super().__init__(f"parameter {name!r}: {message}")
        self.name = name
        self.status = status


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str
    description: str = ""
    default: str | None = None
    example: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise TemplateError(f"parameter {self.name!r} has unknown kind {self.kind!r}")

    @property
    def required(self) -> bool:
        return self.default is None


@dataclass(frozen=True)
class ParamContext:
    """What enumerated parameter kinds are resolved against."""

    catalog: OntologyCatalog
    graph: Graph
    endpoints: frozenset[str] = frozenset()

    def property_options(self) -> dict[str, IRI]:
        out: dict[str, IRI] = {}
        for cl in self.catalog.codelists():
            if cl.cls == PHYSIO_CHEMICAL_CLASS:
                for c in cl.concepts:
                    out[c.notation or c.iri.value] = c.iri
        return out

    def procedure_options(self) -> dict[str, IRI]:
        out: dict[str, IRI] = {}
        for scheme in self.catalog.procedures():
            for c in scheme.concepts:
                out[c.notation or c.iri.value] = c.iri
        return out

    def nuts_labels(self) -> set[str]:
        return {
            lab.lexical
            for region in self.graph.subjects(RDF.type, RAMON_NUTS_REGION)
            for lab in self.graph.objects(region, RDFS.label)
            if isinstance(lab, Literal)
        }

    def options(self, kind: str) -> list[str] | None:
        if kind == "property":
            return sorted(self.property_options())
        if kind == "procedure":
            return sorted(self.procedure_options())
        if kind == "endpoint":
            return sorted(self.endpoints)
        return None


def _by_notation_or_iri(value: str, options: dict[str, IRI]) -> IRI | None:
    if value in options:
        return options[value]
    for iri in options.values():
        if value == iri.value or value == iri.value.rsplit("/", 1)[-1]:
            return iri
    return None


def convert(spec: ParamSpec, value: str, ctx: ParamContext) -> IRI | Literal:
    """The RDF term a raw request value stands for, or ParameterError."""
    if spec.kind == "wkt":
        try:
            parse_wkt(value)
        except WKTError as exc:
            raise ParameterError(spec.name, f"malformed WKT: {exc}", status=400) from None
        return Literal(value.strip(), GSP.wktLiteral)
    if spec.kind == "nuts":
        if not _NUTS_CODE.fullmatch(value):
            raise ParameterError(spec.name, "not a NUTS code")
        if value not in ctx.nuts_labels():
            raise ParameterError(spec.name, f"unknown NUTS region {value}")
        return Literal(value)
    if spec.kind == "property":
        iri = _by_notation_or_iri(value, ctx.property_options())
        if iri is None:
            raise ParameterError(spec.name, "not in the physio-chemical property code list")
        return iri
    if spec.kind == "procedure":
        iri = _by_notation_or_iri(value, ctx.procedure_options())
        if iri is None:
            raise ParameterError(spec.name, "not a procedure known to the ontology")
        return iri
    if spec.kind == "number":
        if not _NUMBER.fullmatch(value):
            raise ParameterError(spec.name, "not a number")
        if "e" in value.lower():
            datatype = XSD.double
        elif "." in value:
            datatype = XSD.decimal
        else:
            datatype = XSD.integer
        if not valid_lexical(value, datatype.value):
            raise ParameterError(spec.name, "not a number")
        return Literal(value, datatype)
    if spec.kind == "label":
        if not value:
            raise ParameterError(spec.name, "must not be empty")
        return Literal(value)
    if spec.kind == "endpoint":
        if not _ENDPOINT_NAME.fullmatch(value) or value not in ctx.endpoints:
            raise ParameterError(spec.name, "not a registered endpoint")
        return IRI(ENDPOINT_URN + value)
    raise TemplateError(f"unknown parameter kind {spec.kind!r}")


# -- placeholder substitution -----------------------------------------------------------

def substitute(node, values: dict[str, object]):
    """``node`` with every ``Var`` named in ``values`` replaced by its term."""
    if isinstance(node, Var):
        return values.get(node.name, node)
    if isinstance(node, tuple):
        return tuple(substitute(n, values) for n in node)
    if is_dataclass(node) and not isinstance(node, type):
        changes = {}
        for f in fields(node):
            old = getattr(node, f.name)
            new = substitute(old, values)
            if new is not old:
                changes[f.name] = new
        return replace(node, **changes) if changes else node
    return node


def placeholders(node) -> set[str]:
    found: set[str] = set()

    def walk(n) -> None:
        if isinstance(n, Var):
            if n.name.startswith("_") and not n.name.startswith("_:"):
                found.add(n.name[1:])
        elif isinstance(n, tuple):
            for item in n:
                walk(item)
        elif is_dataclass(n) and not isinstance(n, type):
            for f in fields(n):
                walk(getattr(n, f.name))

    walk(node)
    return found


# -- templates ------------------------------------------------------------------------------

@dataclass(frozen=True)
class QueryTemplate:
    method: str
    text: str
    query: SelectQuery
    params: tuple[ParamSpec, ...]
    summary: str = ""
    columns: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        declared = {p.name for p in self.params}
        used = placeholders(self.query)
        if used != declared:
            missing = sorted(used - declared)
            unused = sorted(declared - used)
            raise TemplateError(
                f"template {self.method}: placeholders without a parameter {missing}, parameters never used {unused}"
            )
        if self.columns and tuple(self.query.projected()) != self.columns:
            raise TemplateError(f"template {self.method}: columns {self.columns} do not match the SELECT clause")

    def param(self, name: str) -> ParamSpec | None:
        return next((p for p in self.params if p.name == name), None)

    def bind(self, raw: dict[str, str], ctx: ParamContext) -> dict[str, IRI | Literal]:
        unknown = sorted(set(raw) - {p.name for p in self.params})
        if unknown:
            raise ParameterError(unknown[0], "unknown parameter")
        bound = {}
        for spec in self.params:
            value = raw.get(spec.name, spec.default)
            if value is None:
                raise ParameterError(spec.name, "required parameter is missing")
            bound[spec.name] = convert(spec, value, ctx)
        return bound

    def instantiate(self, terms: dict[str, IRI | Literal]) -> SelectQuery:
        return substitute(self.query, {"_" + k: v for k, v in terms.items()})

    def dummy_terms(self) -> dict[str, IRI | Literal]:
        """One fixed constant per parameter, of the kind its real values take."""
        return {p.name: _DUMMIES[p.kind] for p in self.params}

    def describe(self, ctx: ParamContext | None = None) -> dict:
        params = []
        for p in self.params:
            entry = {"name": p.name, "kind": p.kind, "required": p.required, "description": p.description}
            if p.default is not None:
                entry["default"] = p.default
            if p.example is not None:
                entry["example"] = p.example
            if ctx is not None and (opts := ctx.options(p.kind)) is not None:
                entry["options"] = opts
            params.append(entry)
        return {"method": self.method, "path": f"/api/{self.method}", "summary": self.summary,
                "columns": list(self.columns), "params": params}


_DUMMIES: dict[str, IRI | Literal] = {
    "wkt": Literal("POINT(0 0)", GSP.wktLiteral),
    "nuts": Literal("XX"),
    "property": IRI("urn:glosis:dummy:property"),
    "procedure": IRI("urn:glosis:dummy:procedure"),
    "number": Literal("0", XSD.integer),
    "label": Literal("x"),
    "endpoint": IRI(ENDPOINT_URN + "dummy"),
}


def split_front_matter(text: str) -> tuple[dict, str]:
    header: list[str] = []
    lines = text.splitlines(keepends=True)
    i = 0
    while i < len(lines) and lines[i].startswith("#+"):
        header.append(lines[i][2:].removeprefix(" "))
        i += 1
    try:
        meta = yaml.safe_load("".join(header)) or {}
    except yaml.YAMLError as exc:
        raise TemplateError(f"bad front matter: {exc}") from None
    if not isinstance(meta, dict):
        raise TemplateError("front matter must be a mapping")
    return meta, "".join(lines[i:])


def parse_template(method: str, text: str, prefixes: dict[str, str] | None = None) -> QueryTemplate:
    meta, body = split_front_matter(text)
    params = []
    for entry in meta.get("params") or []:
        if not isinstance(entry, dict) or "name" not in entry or "kind" not in entry:
            raise TemplateError(f"template {method}: each parameter needs a name and a kind")
        default = entry.get("default")
        example = entry.get("example")
        params.append(ParamSpec(
            name=str(entry["name"]),
            kind=str(entry["kind"]),
            description=str(entry.get("description", "")),
            default=None if default is None else str(default),
            example=None if example is None else str(example),
        ))
    query = parse_query(body, prefixes)
    return QueryTemplate(
        method=method,
        text=body,
        query=query,
        params=tuple(params),
        summary=str(meta.get("summary", "")),
        columns=tuple(meta.get("columns") or ()),
    )


def load_templates(directory: str | Path = TEMPLATE_DIR,
                   prefixes: dict[str, str] | None = None) -> dict[str, QueryTemplate]:
    """Every ``*.rq`` file in ``directory``, keyed by file stem."""
    out = {}
    for path in sorted(Path(directory).glob("*.rq")):
        out[path.stem] = parse_template(path.stem, path.read_text(encoding="utf-8"), prefixes)
    return out


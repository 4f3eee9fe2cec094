"""Request handling for the SPARQL endpoint, the REST methods and the
ontology documents, independent of any HTTP server.

``App.handle`` maps a method, path, parameters and headers to a ``Response``.
Everything a request reads lives in one immutable ``Snapshot``; ``reload``
builds a fresh snapshot and swaps it in with a single assignment, so a request
that already picked up the old snapshot finishes against it.
"""

from __future__ import annotations

import html
import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import parse_qs

import yaml

from .. import MINI_GLOSIS_MANIFEST, NUTS_FIXTURE
from ..rdf import IRI, RDF, RDFS, SKOS, Graph, Literal, TurtleError, merge, parse_file, serialize_turtle
from ..query import (
    FederationClient, FederationError, QuerySyntaxError, SelectQuery, SolutionTable, UnsupportedFeatureError,
    evaluate, parse_query, to_sparql,
)
from ..query.federation import RESULTS_JSON
from ..schema import OntologyCatalog, extract_metadata, load_manifest
from ..validate import validate_dataset
from .templates import TEMPLATE_DIR, ParamContext, ParameterError, QueryTemplate, load_templates

log = logging.getLogger(__name__)

ONTOLOGY_BASE = "http://w3id.org/glosis/model/"
JSON = "application/json"
TURTLE = "text/turtle"
HTML = "text/html"


class ConfigError(ValueError):
    """The service configuration is unusable."""


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    data: list[Path] = field(default_factory=list)
    manifest: Path = MINI_GLOSIS_MANIFEST
    nuts: Path | None = NUTS_FIXTURE
    templates: Path = TEMPLATE_DIR
    endpoints: dict[str, str] = field(default_factory=dict)
    strict: bool = False  # refuse to load data that fails validation
    lenient_services: bool = False  # a failing SERVICE contributes no rows instead of a 502

    @classmethod
    def from_dict(cls, doc: dict, base: Path | None = None) -> ServiceConfig:
        base = base or Path.cwd()
        known = {"host", "port", "data", "manifest", "nuts", "templates", "endpoints", "strict", "lenient_services"}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")

        def path(value) -> Path:
            p = Path(str(value))
            return p if p.is_absolute() else (base / p).resolve()

        cfg = cls()
        cfg.host = str(doc.get("host", cfg.host))
        try:
            cfg.port = int(doc.get("port", cfg.port))
        except (TypeError, ValueError):
            raise ConfigError("port must be an integer") from None
        data = doc.get("data") or []
        if isinstance(data, str):
            data = [data]
        cfg.data = [path(p) for p in data]
        if doc.get("manifest"):
            cfg.manifest = path(doc["manifest"])
        if "nuts" in doc:
            cfg.nuts = path(doc["nuts"]) if doc["nuts"] else None
        if doc.get("templates"):
            cfg.templates = path(doc["templates"])
        endpoints = doc.get("endpoints") or {}
        if not isinstance(endpoints, dict):
            raise ConfigError("endpoints must map names to URLs")
        cfg.endpoints = {str(k): str(v) for k, v in endpoints.items()}
        cfg.strict = bool(doc.get("strict", False))
        cfg.lenient_services = bool(doc.get("lenient_services", False))
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> ServiceConfig:
        """Read a YAML (or JSON) configuration; relative paths are taken from its directory."""
        path = Path(path)
        try:
            doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: expected a mapping at the top level")
        return cls.from_dict(doc, path.parent.resolve())


@dataclass(frozen=True)
class Snapshot:
    catalog: OntologyCatalog
    data: Graph
    graph: Graph  # data + ontology + NUTS regions, the graph every query runs on
    templates: dict[str, QueryTemplate]


def build_snapshot(catalog: OntologyCatalog, data: list[Graph], nuts: Graph | None,
                   templates: dict[str, QueryTemplate]) -> Snapshot:
    data_graph = merge(data)
    parts = [data_graph, catalog.graph] + ([nuts] if nuts is not None else [])
    graph = merge(parts)
    return Snapshot(catalog, data_graph, graph, templates)


@dataclass(frozen=True)
class Response:
    status: int
    content_type: str
    body: bytes

    @property
    def text(self) -> str:
        return self.body.decode("utf-8")

    def json(self):
        return json.loads(self.body)


def _json(status: int, doc, content_type: str = JSON) -> Response:
    return Response(status, content_type, json.dumps(doc, indent=2).encode("utf-8"))


def _error(status: int, kind: str, message: str, **extra) -> Response:
    return _json(status, {"error": kind, "message": message, **extra})


def row_objects(table: SolutionTable) -> list[dict]:
    """Rows as JSON objects keyed by column; literals always carry their datatype."""
    rows = []
    for row in table.rows:
        obj = {}
        for var, term in zip(table.vars, row):
            if term is None:
                obj[var] = None
            elif isinstance(term, IRI):
                obj[var] = {"type": "uri", "value": term.value}
            elif isinstance(term, Literal):
                cell = {"type": "literal", "value": term.lexical, "datatype": term.datatype.value}
                if term.lang:
                    cell["xml:lang"] = term.lang
                obj[var] = cell
            else:
                obj[var] = {"type": "bnode", "value": term.label}
        rows.append(obj)
    return rows


def _accepts(headers: dict[str, str], media: str) -> bool:
    accept = next((v for k, v in headers.items() if k.lower() == "accept"), "")
    return any(part.split(";")[0].strip() == media for part in accept.split(","))


class App:
    """One service instance. It also acts as an in-process federation endpoint."""

    def __init__(self, config: ServiceConfig | None = None, *, catalog: OntologyCatalog | None = None,
                 data: list[Graph] | None = None, federation: FederationClient | None = None) -> None:
        self.config = config or ServiceConfig()
        self.federation = federation or FederationClient(
            dict(self.config.endpoints), lenient=self.config.lenient_services
        )
        self._reload_lock = threading.Lock()
        self._snapshot = self._build(catalog, data)

    # -- snapshots ------------------------------------------------------------------------
    def _build(self, catalog: OntologyCatalog | None, data: list[Graph] | None) -> Snapshot:
        cfg = self.config
        catalog = catalog or load_manifest(cfg.manifest)
        graphs = data if data is not None else [parse_file(p) for p in cfg.data]
        if cfg.strict:
            for i, g in enumerate(graphs):
                report = validate_dataset(g, catalog)
                if not report.conforms:
                    source = cfg.data[i] if data is None else f"graph {i}"
                    raise ConfigError(f"{source} does not conform: {report.errors} error(s)")
        nuts = parse_file(cfg.nuts) if cfg.nuts is not None else None
        templates = load_templates(cfg.templates)
        return build_snapshot(catalog, graphs, nuts, templates)

    def param_context(self, snap: Snapshot) -> ParamContext:
        names = frozenset(name for name in self.federation.registry if ":" not in name)
        return ParamContext(snap.catalog, snap.graph, names)

    @property
    def snapshot(self) -> Snapshot:
        return self._snapshot

    def reload(self, catalog: OntologyCatalog | None = None, data: list[Graph] | None = None) -> Snapshot:
        """Rebuild from the configuration (or the given inputs) and swap atomically."""
        with self._reload_lock:
            fresh = self._build(catalog, data)
            self._snapshot = fresh
        return fresh

    # -- in-process endpoint protocol ---------------------------------------------------
    def select(self, query_text: str) -> SolutionTable:
        return evaluate(self._snapshot.graph, parse_query(query_text), self.federation)

    # -- dispatch ------------------------------------------------------------------------------
    def handle(self, method: str, path: str, params: dict[str, list[str]] | None = None,
               headers: dict[str, str] | None = None, body: bytes = b"") -> Response:
        params = params or {}
        headers = headers or {}
        snap = self._snapshot
        try:
            route = path.split("?", 1)[0]
            if route in ("", "/"):
                return self.index(snap)
            if route == "/sparql":
                if method not in ("GET", "POST"):
                    return _error(405, "method-not-allowed", f"{method} is not supported on /sparql")
                return self.sparql(snap, method, params, headers, body)
            if method != "GET":
                return _error(405, "method-not-allowed", f"{method} is not supported on {route}")
            if route in ("/api", "/api/"):
                return _json(200, [t.describe(self.param_context(snap)) for t in snap.templates.values()])
            if route.startswith("/api/"):
                return self.rest(snap, route[len("/api/"):], params)
            if route.startswith("/ontology/"):
                return self.ontology(snap, route[len("/ontology/"):], params, headers)
            return _error(404, "not-found", f"no resource at {route}")
        except Exception as exc:  # a request must never take the service down
            log.exception("unhandled error for %s %s", method, path)
            return _error(500, "internal", f"{type(exc).__name__}: {exc}")

    def index(self, snap: Snapshot) -> Response:
        return _json(200, {
            "sparql": "/sparql",
            "api": [f"/api/{name}" for name in snap.templates],
            "ontology": [f"/ontology/{iri.value.removeprefix(ONTOLOGY_BASE)}" for iri in snap.catalog.modules],
        })

    # -- SPARQL protocol --------------------------------------------------------------------
    def sparql(self, snap: Snapshot, method: str, params: dict[str, list[str]],
               headers: dict[str, str], body: bytes) -> Response:
        query_text = None
        if method == "GET":
            query_text = (params.get("query") or [None])[-1]
        else:
            ctype = next((v for k, v in headers.items() if k.lower() == "content-type"), "")
            text = body.decode("utf-8", errors="replace")
            if ctype.split(";")[0].strip() == "application/sparql-query":
                query_text = text
            else:
                query_text = (parse_qs(text).get("query") or params.get("query") or [None])[-1]
        if not query_text:
            return _error(400, "missing-query", "supply the query in the 'query' parameter or the request body")
        try:
            query = parse_query(query_text)
        except QuerySyntaxError as exc:
            return _error(400, "syntax", str(exc), line=exc.line, column=exc.column)
        except UnsupportedFeatureError as exc:
            return _error(400, "unsupported", str(exc), feature=exc.feature)
        return self._run(snap, query, lambda table: _json(200, table.to_json(), RESULTS_JSON))

    def _run(self, snap: Snapshot, query: SelectQuery, render) -> Response:
        try:
            table = evaluate(snap.graph, query, self.federation)
        except FederationError as exc:
            return _error(502, "service-unreachable", str(exc), endpoint=exc.endpoint)
        return render(table)

    # -- REST methods -------------------------------------------------------------------------
    def rest(self, snap: Snapshot, name: str, params: dict[str, list[str]]) -> Response:
        template = snap.templates.get(name)
        if template is None:
            return _error(404, "unknown-method", f"no API method named {name!r}")
        raw = {k: v[-1] for k, v in params.items() if v}
        try:
            terms = template.bind(raw, self.param_context(snap))
        except ParameterError as exc:
            return _error(exc.status, "invalid-parameter", str(exc), parameter=exc.name)
        query = self.instantiate(template, terms)
        return self._run(snap, query, lambda table: _json(200, row_objects(table)))

    @staticmethod
    def instantiate(template: QueryTemplate, terms: dict) -> SelectQuery:
        """The instantiated tree, written out and parsed again.

        Going through query text means the serializer's escaping is what keeps
        parameter values in their place, and the result is exactly what a
        remote store would receive.
        """
        return parse_query(to_sparql(template.instantiate(terms)))

    # -- ontology documents -------------------------------------------------------------------
    def resolve_resource(self, snap: Snapshot, path: str, params: dict[str, list[str]]) -> tuple[IRI, IRI] | None:
        """(module IRI, requested IRI) for an ontology path, or None when unknown."""
        if params.get("iri"):
            target = params["iri"][-1]
        elif path.startswith(("http:/", "https:/")):
            scheme, rest = path.split(":/", 1)
            target = f"{scheme}://{rest.lstrip('/')}"
        else:
            target = ONTOLOGY_BASE + path
        catalog = snap.catalog
        term = IRI(target)
        if term not in catalog.modules and IRI(target.rstrip("/")) in catalog.modules:
            term = IRI(target.rstrip("/"))
        if term in catalog.modules:
            return term, term
        module = catalog.module_of(term)
        if module is not None:
            return module, term
        codelist = catalog.codelist_of_concept(term)
        if codelist is not None and codelist.scheme is not None:
            module = catalog.module_of(codelist.scheme)
            if module is not None:
                return module, term
        return None

    def ontology(self, snap: Snapshot, path: str, params: dict[str, list[str]], headers: dict[str, str]) -> Response:
        found = self.resolve_resource(snap, path, params)
        if found is None:
            return _error(404, "not-found", f"no ontology module or term for {path!r}")
        module, term = found
        graph = snap.catalog.modules[module]
        if _accepts(headers, HTML):
            return Response(200, f"{HTML}; charset=utf-8", self.landing_page(snap, module, term).encode("utf-8"))
        return Response(200, f"{TURTLE}; charset=utf-8", serialize_turtle(graph).encode("utf-8"))

    def landing_page(self, snap: Snapshot, module: IRI, term: IRI) -> str:
        meta = extract_metadata(snap.catalog, module)
        graph = snap.catalog.modules[module]
        esc = html.escape
        title = meta.title or module.value
        lines = [
            "<!DOCTYPE html>",
            f"<html><head><meta charset=\"utf-8\"><title>{esc(title)}</title></head><body>",
            f"<h1>{esc(title)}</h1>",
            f"<p>Module <code>{esc(module.value)}</code></p>",
        ]
        if meta.version:
            lines.append(f"<p>Version {esc(meta.version)}</p>")
        if meta.creators:
            lines.append("<p>Creators: " + ", ".join(esc(c) for c in meta.creators) + "</p>")
        if meta.license:
            lines.append(f"<p>License: {esc(meta.license)}</p>")
        if term != module:
            anchor = term.value.rsplit("/", 1)[-1].rsplit("#", 1)[-1]
            label = next((o.lexical for p in (SKOS.prefLabel, RDFS.label)
                          for o in graph.objects(term, p) if isinstance(o, Literal)), "")
            types = sorted(t.value for t in graph.objects(term, RDF.type) if isinstance(t, IRI))
            lines.append(f"<section id=\"{esc(anchor, quote=True)}\">")
            lines.append(f"<h2>{esc(label or anchor)}</h2>")
            lines.append(f"<p><code>{esc(term.value)}</code></p>")
            if types:
                lines.append("<p>Type: " + ", ".join(f"<code>{esc(t)}</code>" for t in types) + "</p>")
            lines.append("</section>")
        lines.append("</body></html>")
        return "\n".join(lines) + "\n"


def load_app(config_path: str | Path) -> App:
    try:
        return App(ServiceConfig.from_file(config_path))
    except (OSError, TurtleError) as exc:
        raise ConfigError(str(exc)) from None

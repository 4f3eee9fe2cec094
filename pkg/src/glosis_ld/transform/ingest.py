"""Mapping-driven conversion of soil survey tables into GloSIS observation graphs.

Every row yields a site with a geometry, a profile and a layer; each mapped
observation column with a non-empty cell adds one SOSA observation and its
result. Cell text is copied into literals verbatim, so ``"4.30"`` stays
``"4.30"^^xsd:float``.

A mapping is a JSON document, for example::

    {
      "base": "http://example.org/survey/",
      "prefixes": {"g_lh": "http://w3id.org/glosis/model/layerhorizon/"},
      "id": "POINT_ID",
      "geometry": {"lon": "LON", "lat": "LAT", "template": "POINT({lon} {lat})"},
      "site": {"iri": "#site_{id}", "class": "g_sp:GL_Site", "geometry_iri": "#geo_{id}"},
      "profile": {"iri": "#profile_{id}", "class": "g_pr:GL_Profile"},
      "layer": {"iri": "#layer_{id}", "class": "g_lh:GL_Layer"},
      "observations": [
        {"column": "pH", "iri": "#ph_{id}", "class": "g_lh:PH", "target": "layer",
         "property": "g_cl:physioChemicalPropertyCode-pH",
         "result": {"kind": "quantity", "iri": "#ph_value_{id}", "class": "g_lh:PHValue",
                    "unit": "unit:PH", "datatype": "xsd:float"}}
      ]
    }

The geometry literal is a plain string unless the geometry section sets
``"typed": true``, which gives it the ``gsp:wktLiteral`` datatype. A single
``"wkt"`` column may replace ``lon`` and ``lat``.

Templates substitute ``{id}``, ``{value}`` (the observation cell) and
``{COLUMN}`` for any header column. IRI templates may be relative to
``base``, prefixed names, or absolute IRIs.
"""

from __future__ import annotations

import csv
import json
import re
import urllib.parse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from ..rdf import GLOSIS_PREFIXES, GSP, ISO28258, QUDT, RDF, RDFS, SOSA, XSD, IRI, Graph, Literal
from ..rdf.xsd import valid_lexical

_PLACEHOLDER = re.compile(r"\{([^{}]+)\}")
RESULT_KINDS = ("quantity", "concept", "simple")
TARGETS = ("site", "profile", "layer")

DEFAULT_PREFIXES = {
    **GLOSIS_PREFIXES,
    "g_sp": GLOSIS_PREFIXES["glosis_sp"],
    "g_pr": GLOSIS_PREFIXES["glosis_pr"],
    "g_lh": GLOSIS_PREFIXES["glosis_lh"],
    "g_cl": GLOSIS_PREFIXES["glosis_cl"],
    "g_pd": GLOSIS_PREFIXES["glosis_proc"],
}


class MappingError(ValueError):
    pass


@dataclass(frozen=True)
class RowFinding:
    row: int
    column: str
    message: str


@dataclass
class MappingConfig:
    base: str
    id: tuple[str, ...]
    geometry: dict[str, Any]
    site: dict[str, Any]
    profile: dict[str, Any] | None
    layer: dict[str, Any] | None
    observations: list[dict[str, Any]]
    prefixes: dict[str, str] = field(default_factory=dict)
    id_separator: str = "_"
    skip_invalid_rows: bool = False

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> MappingConfig:
        try:
            ident = doc["id"]
            config = cls(
                base=doc["base"],
                id=tuple(ident) if isinstance(ident, list) else (ident,),
                geometry=doc.get("geometry", {}),
                site=doc["site"],
                profile=doc.get("profile"),
                layer=doc.get("layer"),
                observations=list(doc.get("observations", [])),
                prefixes={**DEFAULT_PREFIXES, **doc.get("prefixes", {})},
                id_separator=doc.get("id_separator", "_"),
                skip_invalid_rows=doc.get("on_invalid", "skip-cell") == "skip-row",
            )
        except KeyError as exc:
            raise MappingError(f"mapping lacks required key {exc.args[0]!r}") from None
        config.check_structure()
        return config

    # -- checks -------------------------------------------------------------------
    def check_structure(self) -> None:
        for name, block in (("site", self.site), ("profile", self.profile), ("layer", self.layer)):
            if block is not None:
                self._require_id(block.get("iri", ""), f"{name}.iri")
        if self.geometry and "geometry_iri" in self.site:
            self._require_id(self.site["geometry_iri"], "site.geometry_iri")
        for i, obs in enumerate(self.observations):
            where = f"observations[{i}]"
            for key in ("column", "iri", "class", "property", "result"):
                if key not in obs:
                    raise MappingError(f"{where} lacks {key!r}")
            self._require_id(obs["iri"], f"{where}.iri")
            target = obs.get("target", "layer")
            if target not in TARGETS or getattr(self, target) is None:
                raise MappingError(f"{where}.target {target!r} is not an emitted feature")
            result = obs["result"]
            kind = result.get("kind")
            if kind not in RESULT_KINDS:
                raise MappingError(f"{where}.result.kind must be one of {RESULT_KINDS}")
            if kind == "quantity":
                self._require_id(result.get("iri", ""), f"{where}.result.iri")
                if "unit" not in result:
                    raise MappingError(f"{where}.result lacks 'unit'")
            if kind == "concept" and "iri" not in result:
                raise MappingError(f"{where}.result lacks 'iri'")

    def _require_id(self, template: str, where: str) -> None:
        if "{id}" not in template:
            raise MappingError(f"{where} template {template!r} must contain the {{id}} placeholder")

    def columns(self) -> set[str]:
        """Every header column the mapping reads."""
        cols = set(self.id)
        cols.update(v for k, v in self.geometry.items() if k in ("lon", "lat", "wkt"))
        templates: list[str] = []
        for block in (self.site, self.profile or {}, self.layer or {}):
            templates += [v for k, v in block.items() if isinstance(v, str)]
            for prop in block.get("properties", []):
                if "column" in prop:
                    cols.add(prop["column"])
                templates += [v for v in prop.values() if isinstance(v, str)]
        for obs in self.observations:
            cols.add(obs["column"])
            templates += [v for v in obs.values() if isinstance(v, str)]
            templates += [v for v in obs["result"].values() if isinstance(v, str)]
        for t in templates:
            cols.update(n for n in _PLACEHOLDER.findall(t) if n not in ("id", "value", "lon", "lat"))
        return cols

    def check_header(self, header: Iterable[str]) -> None:
        missing = sorted(self.columns() - set(header))
        if missing:
            raise MappingError(f"mapping references column(s) absent from the table: {', '.join(missing)}")

    # -- term construction ------------------------------------------------------------
    def expand(self, name: str) -> IRI:
        if re.match(r"^[A-Za-z][A-Za-z0-9+.-]*://", name) or name.startswith("urn:"):
            return IRI(name)
        prefix, sep, local = name.partition(":")
        if sep and prefix in self.prefixes:
            return IRI(self.prefixes[prefix] + local)
        return IRI(urllib.parse.urljoin(self.base, name))


def load_mapping(path: str | Path) -> MappingConfig:
    return MappingConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def read_table(path: str | Path) -> list[dict[str, str]]:
    """RFC 4180 CSV with a header row, UTF-8."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        return [{k: v if v is not None else "" for k, v in r.items() if k is not None} for r in reader]


def _fill(template: str, values: dict[str, str], quote: bool) -> str:
    def sub(m: re.Match) -> str:
        text = values[m.group(1)]
        return urllib.parse.quote(text, safe="-._~") if quote else text

    return _PLACEHOLDER.sub(sub, template)


class _RowWriter:
    def __init__(self, mapping: MappingConfig, graph: Graph, row: dict[str, str], index: int) -> None:
        self.m = mapping
        self.g = graph
        self.row = row
        self.index = index
        ident = mapping.id_separator.join(row[c].strip() for c in mapping.id)
        self.values = {**row, "id": ident}

    def iri(self, template: str, extra: dict[str, str] | None = None) -> IRI:
        values = {**self.values, **(extra or {})}
        return self.m.expand(_fill(template, values, quote=True))

    def text(self, template: str, extra: dict[str, str] | None = None) -> str:
        return _fill(template, {**self.values, **(extra or {})}, quote=False)

    def feature(self, block: dict[str, Any]) -> IRI:
        node = self.iri(block["iri"])
        for cls in _as_list(block.get("class")):
            self.g.add(node, RDF.type, self.m.expand(cls))
        if "label" in block:
            self.g.add(node, RDFS.label, Literal(self.text(block["label"])))
        for prop in block.get("properties", []):
            self.property(node, prop)
        return node

    def property(self, node: IRI, prop: dict[str, Any]) -> None:
        if "column" in prop and not self.row.get(prop["column"], "").strip():
            return
        cell = self.row.get(prop.get("column", ""), "")
        pred = self.m.expand(prop["predicate"])
        if prop.get("kind", "literal") == "iri":
            self.g.add(node, pred, self.iri(prop.get("object", "{value}"), {"value": cell.strip()}))
        else:
            lexical = self.text(prop.get("object", "{value}"), {"value": cell})
            dt = prop.get("datatype")
            self.g.add(node, pred, Literal(lexical, self.m.expand(dt)) if dt else Literal(lexical))

    def geometry(self, site: IRI) -> None:
        geo = self.m.geometry
        if not geo:
            return
        if "wkt" in geo:
            wkt = self.row[geo["wkt"]].strip()
        else:
            lon, lat = self.row[geo["lon"]].strip(), self.row[geo["lat"]].strip()
            if not lon or not lat:
                return
            wkt = geo.get("template", "POINT({lon} {lat})").replace("{lon}", lon).replace("{lat}", lat)
        literal = Literal(wkt, GSP.wktLiteral) if geo.get("typed") else Literal(wkt)
        geom_node = self.iri(self.m.site.get("geometry_iri", "#geometry_{id}"))
        self.g.add(site, GSP.hasGeometry, geom_node)
        self.g.add(geom_node, RDF.type, GSP.Geometry)
        self.g.add(geom_node, GSP.asWKT, literal)

    def observation(self, obs: dict[str, Any], features: dict[str, IRI], findings: list[RowFinding]) -> bool:
        cell = self.row.get(obs["column"], "")
        if not cell.strip():
            return True
        cell = cell.strip()
        result = obs["result"]
        kind = result["kind"]
        datatype = self.m.expand(result.get("datatype", "xsd:float" if kind == "quantity" else "xsd:string"))
        if kind in ("quantity", "simple") and not valid_lexical(cell, datatype.value):
            findings.append(RowFinding(self.index, obs["column"], f"{cell!r} is not a valid {datatype.value}"))
            return False
        extra = {"value": cell}
        node = self.iri(obs["iri"], extra)
        g = self.g
        g.add(node, RDF.type, self.m.expand(obs["class"]))
        if "label" in obs:
            g.add(node, RDFS.label, Literal(self.text(obs["label"], extra)))
        g.add(node, SOSA.hasFeatureOfInterest, features[obs.get("target", "layer")])
        if kind == "simple":
            g.add(node, SOSA.hasSimpleResult, Literal(cell, datatype) if datatype != XSD.string else Literal(cell))
        else:
            res = self.iri(result["iri"], extra)
            g.add(node, SOSA.hasResult, res)
            for cls in _as_list(result.get("class")):
                g.add(res, RDF.type, self.m.expand(cls))
            if "label" in result:
                g.add(res, RDFS.label, Literal(self.text(result["label"], extra)))
            if kind == "quantity":
                g.add(res, QUDT.numericValue, Literal(cell, datatype))
                g.add(res, QUDT.unit, self.m.expand(result["unit"]))
        g.add(node, SOSA.observedProperty, self.m.expand(obs["property"]))
        if obs.get("procedure"):
            g.add(node, SOSA.usedProcedure, self.m.expand(obs["procedure"]))
        return True


def _as_list(value: Any) -> list[str]:
    if value is None:
        return []
    return list(value) if isinstance(value, list) else [value]


def ingest_csv(
    rows: Iterable[dict[str, str]],
    mapping: MappingConfig,
    findings: list[RowFinding] | None = None,
    header: Iterable[str] | None = None,
) -> Graph:
    """Convert table rows to a GloSIS graph.

    Cells that fail their datatype's lexical check are reported in ``findings``
    and skipped; with ``"on_invalid": "skip-row"`` in the mapping the whole
    row is dropped instead.
    """
    rows = list(rows)
    if header is None:
        header = list(rows[0]) if rows else []
    mapping.check_header(header)
    findings = findings if findings is not None else []
    graph = Graph(prefixes=dict(mapping.prefixes))
    for i, row in enumerate(rows):
        row_graph = Graph()
        row_findings: list[RowFinding] = []
        writer = _RowWriter(mapping, row_graph, row, i)
        site = writer.feature(mapping.site)
        writer.geometry(site)
        features = {"site": site}
        if mapping.profile is not None:
            features["profile"] = writer.feature(mapping.profile)
            row_graph.add(site, ISO28258["Site.typicalProfile"], features["profile"])
        if mapping.layer is not None:
            features["layer"] = writer.feature(mapping.layer)
            if mapping.profile is not None:
                row_graph.add(features["profile"], ISO28258["Profile.element"], features["layer"])
        ok = True
        for obs in mapping.observations:
            ok = writer.observation(obs, features, row_findings) and ok
        findings.extend(row_findings)
        if ok or not mapping.skip_invalid_rows:
            graph.update(row_graph)
    return graph


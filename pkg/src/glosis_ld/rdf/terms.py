"""RDF term types and namespace helpers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

RDF_LANGSTRING = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString"
XSD_STRING = "http://www.w3.org/2001/XMLSchema#string"


@dataclass(frozen=True, slots=True)
class IRI:
    value: str

    def __str__(self) -> str:
        return self.value

    def n3(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True, slots=True)
class BNode:
    label: str

    def __str__(self) -> str:
        return f"_:{self.label}"

    def n3(self) -> str:
        return f"_:{self.label}"


@dataclass(frozen=True, slots=True)
class Literal:
    """An RDF literal. ``datatype`` is an IRI; language-tagged literals get rdf:langString."""

    lexical: str
    datatype: IRI = IRI(XSD_STRING)
    lang: str | None = None

    def __post_init__(self) -> None:
        if isinstance(self.datatype, str):
            object.__setattr__(self, "datatype", IRI(self.datatype))
        if self.lang:
            object.__setattr__(self, "datatype", IRI(RDF_LANGSTRING))
        elif self.datatype.value == RDF_LANGSTRING:
            raise ValueError("rdf:langString literal requires a language tag")

    def __str__(self) -> str:
        return self.lexical

    def n3(self) -> str:
        text = '"' + escape_string(self.lexical) + '"'
        if self.lang:
            return f"{text}@{self.lang}"
        if self.datatype.value == XSD_STRING:
            return text
        return f"{text}^^<{self.datatype.value}>"


Term = Union[IRI, BNode, Literal]


class Triple(NamedTuple):
    s: Term
    p: IRI
    o: Term


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t", "\b": "\\b", "\f": "\\f"}


def escape_string(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


class Namespace:
    """IRI prefix whose attribute/item access mints IRIs.

    >>> SKOS = Namespace("http://www.w3.org/2004/02/skos/core#")
    >>> SKOS.prefLabel
    IRI(value='http://www.w3.org/2004/02/skos/core#prefLabel')
    """

    __slots__ = ("base",)

    def __init__(self, base: str) -> None:
        self.base = base

    def __getattr__(self, name: str) -> IRI:
        if name.startswith("__"):
            raise AttributeError(name)
        return IRI(self.base + name)

    def __getitem__(self, name: str) -> IRI:
        return IRI(self.base + name)

    def __str__(self) -> str:
        return self.base

    def __repr__(self) -> str:
        return f"Namespace({self.base!r})"


RDF = Namespace("http://www.w3.org/1999/02/22-rdf-syntax-ns#")
RDFS = Namespace("http://www.w3.org/2000/01/rdf-schema#")
OWL = Namespace("http://www.w3.org/2002/07/owl#")
XSD = Namespace("http://www.w3.org/2001/XMLSchema#")
SKOS = Namespace("http://www.w3.org/2004/02/skos/core#")
SOSA = Namespace("http://www.w3.org/ns/sosa/")
SSN = Namespace("http://www.w3.org/ns/ssn/")
QUDT = Namespace("http://qudt.org/schema/qudt/")
UNIT = Namespace("http://qudt.org/vocab/unit/")
GSP = Namespace("http://www.opengis.net/ont/geosparql#")
GEOF = Namespace("http://www.opengis.net/def/function/geosparql/")
DCTERMS = Namespace("http://purl.org/dc/terms/")
DC = Namespace("http://purl.org/dc/elements/1.1/")
FOAF = Namespace("http://xmlns.com/foaf/0.1/")
SCHEMA = Namespace("http://schema.org/")
ISO28258 = Namespace("http://w3id.org/glosis/model/iso28258/2013#")
GLOSIS_SP = Namespace("http://w3id.org/glosis/model/siteplot/")
GLOSIS_PR = Namespace("http://w3id.org/glosis/model/profile/")
GLOSIS_LH = Namespace("http://w3id.org/glosis/model/layerhorizon/")
GLOSIS_CL = Namespace("http://w3id.org/glosis/model/codelists/")
GLOSIS_PROC = Namespace("http://w3id.org/glosis/model/procedure/")
GLOSIS_CM = Namespace("http://w3id.org/glosis/model/common/")

RDF_NIL = RDF.nil
RDF_FIRST = RDF.first
RDF_REST = RDF.rest
RDF_TYPE = RDF.type

# Prefix table used when serializing GloSIS content.
GLOSIS_PREFIXES: dict[str, str] = {
    "rdf": str(RDF),
    "rdfs": str(RDFS),
    "owl": str(OWL),
    "xsd": str(XSD),
    "skos": str(SKOS),
    "sosa": str(SOSA),
    "ssn": str(SSN),
    "qudt": str(QUDT),
    "unit": str(UNIT),
    "gsp": str(GSP),
    "geof": str(GEOF),
    "dcterms": str(DCTERMS),
    "foaf": str(FOAF),
    "schema": str(SCHEMA),
    "iso28258": str(ISO28258),
    "glosis_sp": str(GLOSIS_SP),
    "glosis_pr": str(GLOSIS_PR),
    "glosis_lh": str(GLOSIS_LH),
    "glosis_cl": str(GLOSIS_CL),
    "glosis_proc": str(GLOSIS_PROC),
    "glosis_cm": str(GLOSIS_CM),
    "gn": "http://www.geonames.org/ontology#",
    "nuts": "http://nuts.geovocab.org/id/",
}

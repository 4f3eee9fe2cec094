"""RDF data model, Turtle I/O and graph comparison."""

from .compare import find_bijection, graph_diff, isomorphic
from .graph import BNodeFactory, Dataset, Graph, MalformedListError, match, merge, read_list, write_list
from .serializer import serialize_turtle
from .terms import (
    DC, DCTERMS, FOAF, GEOF, GLOSIS_CL, GLOSIS_CM, GLOSIS_LH, GLOSIS_PR, GLOSIS_PREFIXES, GLOSIS_PROC,
    GLOSIS_SP, GSP, IRI, ISO28258, OWL, QUDT, RDF, RDFS, SCHEMA, SKOS, SOSA, UNIT, XSD,
    BNode, Literal, Namespace, Term, Triple,
)
from .turtle import RelativeIRIError, TurtleError, UndefinedPrefixError, parse_file, parse_turtle

__all__ = [
    "BNode", "BNodeFactory", "DC", "DCTERMS", "Dataset", "FOAF", "GEOF", "GLOSIS_CL", "GLOSIS_CM",
    "GLOSIS_LH", "GLOSIS_PR", "GLOSIS_PREFIXES", "GLOSIS_PROC", "GLOSIS_SP", "GSP", "Graph", "IRI",
    "ISO28258", "Literal", "MalformedListError", "Namespace", "OWL", "QUDT", "RDF", "RDFS",
    "RelativeIRIError", "SCHEMA", "SKOS", "SOSA", "Term", "Triple", "TurtleError", "UNIT",
    "UndefinedPrefixError", "XSD", "find_bijection", "graph_diff", "isomorphic", "match", "merge",
    "parse_file", "parse_turtle", "read_list", "serialize_turtle", "write_list",
]

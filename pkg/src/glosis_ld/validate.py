"""Closed-world conformance checks of data graphs against a GloSIS catalog.

OWL restrictions are read as a data contract rather than as inference
premises:

* ``allValuesFrom``: every present value conforms,
* ``hasValue``: the value is present and equal,
* ``someValuesFrom``: at least one conforming value is present,
* ``cardinality``: the exact number of values.

Each finding carries one of the rule ids below.

==== ===================================================================
R1   feature of interest typed within the allowed classes
R2   observed property equals the required value, or is a concept of an
     observable-property codelist
R3   at least one result in the required class (results typed in other
     known codelists or quantity classes only warn)
R4   numeric value lexically valid for its datatype, unit as required
R5   literal values conform to the declared datatype
R6   exact cardinality (warning unless strict)
R7   codelist integrity
R8   procedure is a concept of a known procedure scheme (warning)
==== ===================================================================

Nodes without an ``rdf:type`` in the data are never checked.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from .rdf import OWL, QUDT, RDF, RDFS, SKOS, SOSA, IRI, BNode, Graph, Literal, MalformedListError, Term, read_list
from .rdf.terms import XSD_STRING
from .rdf.xsd import derives_from, valid_lexical
from .schema import (
    ALL, CARD, CODELIST, HAS, QUANTITY_VALUE, SOME, CodeList, OntologyCatalog, RestrictionSpec, is_datatype,
)

ERROR = "Error"
WARNING = "Warning"
RULES = {
    "R1": "feature of interest",
    "R2": "observed property",
    "R3": "result membership",
    "R4": "quantity value",
    "R5": "simple result",
    "R6": "cardinality",
    "R7": "codelist integrity",
    "R8": "procedure",
}


@dataclass(frozen=True)
class Finding:
    rule: str
    severity: str
    focus: Term
    path: IRI | None
    message: str

    def __post_init__(self) -> None:
        if self.rule not in RULES:
            raise ValueError(f"unknown rule id {self.rule}")
        if self.severity not in (ERROR, WARNING):
            raise ValueError(f"unknown severity {self.severity}")

    def sort_key(self) -> tuple:
        return (int(self.rule[1:]), _term_key(self.focus), self.path.value if self.path else "", self.message)

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "severity": self.severity,
            "focus": _show(self.focus),
            "path": self.path.value if self.path else None,
            "message": self.message,
        }


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def errors(self) -> int:
        return sum(f.severity == ERROR for f in self.findings)

    @property
    def warnings(self) -> int:
        return sum(f.severity == WARNING for f in self.findings)

    @property
    def conforms(self) -> bool:
        return self.errors == 0

    def by_rule(self, rule: str) -> list[Finding]:
        return [f for f in self.findings if f.rule == rule]

    def to_json(self) -> str:
        return json.dumps({
            "conforms": self.conforms,
            "counts": {ERROR: self.errors, WARNING: self.warnings},
            "findings": [f.to_dict() for f in self.findings],
        }, indent=2)

    def to_text(self) -> str:
        rows = [("RULE", "SEVERITY", "FOCUS", "PATH", "MESSAGE")]
        rows += [(f.rule, f.severity, _show(f.focus), f.path.value if f.path else "-", f.message) for f in self.findings]
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = ["  ".join(r[i].ljust(widths[i]) for i in range(4)) + "  " + r[4] for r in rows]
        verdict = "conforms" if self.conforms else "does not conform"
        lines.append(f"{self.errors} error(s), {self.warnings} warning(s): {verdict}")
        return "\n".join(lines) + "\n"


@dataclass
class ValidationConfig:
    """``severity_overrides`` maps a rule id to a severity; ``strict`` turns R6 into an error."""

    severity_overrides: dict[str, str] = field(default_factory=dict)
    strict: bool = False


def _term_key(t: Term) -> tuple:
    if isinstance(t, IRI):
        return (0, t.value)
    if isinstance(t, BNode):
        return (1, t.label)
    return (2, t.lexical)


def _show(t: Term) -> str:
    return t.value if isinstance(t, IRI) else t.n3()


def _finish(findings: Iterable[Finding], config: ValidationConfig | None) -> ValidationReport:
    config = config or ValidationConfig()
    out = []
    for f in findings:
        severity = f.severity
        if f.rule == "R6" and config.strict:
            severity = ERROR
        severity = config.severity_overrides.get(f.rule, severity)
        out.append(Finding(f.rule, severity, f.focus, f.path, f.message))
    unique = list(dict.fromkeys(out))
    return ValidationReport(tuple(sorted(unique, key=Finding.sort_key)))


class _Checker:
    def __init__(self, data: Graph, catalog: OntologyCatalog) -> None:
        self.data = data
        self.catalog = catalog
        self.findings: list[Finding] = []

    def add(self, rule: str, severity: str, focus: Term, path: IRI | None, message: str) -> None:
        self.findings.append(Finding(rule, severity, focus, path, message))

    def asserted_types(self, node: Term) -> list[IRI]:
        types = self.data.objects(node, RDF.type) + self.catalog.graph.objects(node, RDF.type)
        return [t for t in dict.fromkeys(types) if isinstance(t, IRI)]

    def types(self, node: Term) -> set[IRI]:
        return self.catalog.type_closure(self.asserted_types(node))

    def values(self, node: Term, prop: IRI) -> list[Term]:
        return self.data.objects(node, prop)

    # -- per-instance rules ---------------------------------------------------------
    def check_instance(self, node: Term) -> None:
        specs: dict[RestrictionSpec, None] = {}
        for t in self.asserted_types(node):
            if self.data.count(node, RDF.type, t) == 0:
                continue
            for _owner, spec in self.catalog.restrictions(t):
                specs[spec] = None
        observed_codelists = self.designated_property_codelists(specs)
        for spec in specs:
            self.check_restriction(node, spec, observed_codelists)
        self.check_closed_types(node)
        for proc in self.values(node, SOSA.usedProcedure):
            self.check_procedure(node, proc, None)

    def designated_property_codelists(self, specs: Iterable[RestrictionSpec]) -> list[CodeList]:
        designated = []
        for spec in specs:
            if spec.on_property == SOSA.observedProperty and spec.kind in (SOME, ALL):
                for cls in spec.values:
                    cl = self.catalog.codelist_for_class(cls) if isinstance(cls, IRI) else None
                    if cl is not None:
                        designated.append(cl)
        if designated:
            return designated
        return [cl for cl in self.catalog.codelists() if cl.observable_property]

    def check_restriction(self, node: Term, spec: RestrictionSpec, observed: list[CodeList]) -> None:
        prop = spec.on_property
        values = self.values(node, prop)
        if spec.kind == CARD:
            if len(values) != spec.count:
                self.add("R6", WARNING, node, prop, f"expected exactly {spec.count} value(s), found {len(values)}")
        elif spec.kind == HAS:
            self.check_has_value(node, spec, values, observed)
        elif spec.kind == ALL:
            self.check_all_values(node, spec, values)
        elif spec.kind == SOME:
            self.check_some_values(node, spec, values)

    def check_has_value(self, node: Term, spec: RestrictionSpec, values: list[Term], observed: list[CodeList]) -> None:
        prop, required = spec.on_property, spec.values[0]
        rule = "R4" if prop == QUDT.unit else "R2"
        if required in values:
            return
        if prop == SOSA.observedProperty:
            for v in values:
                vtypes = self.types(v)
                if any(cl.cls in vtypes or v in cl.members() for cl in observed):
                    return
        if not values:
            self.add(rule, ERROR, node, prop, f"missing required value {_show(required)}")
        else:
            found = ", ".join(_show(v) for v in values)
            self.add(rule, ERROR, node, prop, f"expected {_show(required)}, found {found}")

    def check_all_values(self, node: Term, spec: RestrictionSpec, values: list[Term]) -> None:
        prop = spec.on_property
        datatypes = [d for d in spec.values if is_datatype(d, self.catalog)]
        if datatypes:
            rule = "R4" if prop == QUDT.numericValue else "R5"
            for v in values:
                if not self.literal_conforms(v, datatypes):
                    wanted = " or ".join(_show(d) for d in datatypes)
                    self.add(rule, ERROR, node, prop, f"value {_show(v)} does not conform to {wanted}")
            return
        for v in values:
            if not self.types(v) & set(spec.values):
                wanted = " or ".join(_show(c) for c in spec.values)
                rule = "R1" if prop == SOSA.hasFeatureOfInterest else "R3"
                self.add(rule, ERROR, node, prop, f"value {_show(v)} is not typed as {wanted}")

    def literal_conforms(self, value: Term, datatypes: list[Term]) -> bool:
        if not isinstance(value, Literal):
            return False
        for dt in datatypes:
            if dt.value == XSD_STRING and (value.lang or value.datatype.value == XSD_STRING):
                return True
            if derives_from(value.datatype.value, dt.value) and valid_lexical(value.lexical, value.datatype.value):
                return True
        return False

    def check_some_values(self, node: Term, spec: RestrictionSpec, values: list[Term]) -> None:
        prop = spec.on_property
        wanted = set(spec.values)
        if prop == SOSA.usedProcedure:
            if not values:
                self.add("R8", WARNING, node, prop, "no procedure given")
            for v in values:
                self.check_procedure(node, v, wanted)
            return
        if any(self.types(v) & wanted or self.literal_conforms(v, list(wanted)) for v in values):
            return
        names = " or ".join(_show(c) for c in spec.values)
        if prop == SOSA.hasResult and any(self.typed_in_other_vocabulary(v) for v in values):
            self.add("R3", WARNING, node, prop, f"result is typed outside {names} (another codelist or quantity class)")
        elif not values:
            self.add("R3", ERROR, node, prop, f"missing value of type {names}")
        else:
            self.add("R3", ERROR, node, prop, f"no value typed as {names}")

    def typed_in_other_vocabulary(self, value: Term) -> bool:
        for t in self.asserted_types(value):
            if self.catalog.is_class(t) and self.catalog.category(t) in (CODELIST, QUANTITY_VALUE):
                return True
        return False

    def check_procedure(self, node: Term, proc: Term, wanted: set[Term] | None) -> None:
        if proc not in self.catalog.procedure_concepts():
            self.add("R8", WARNING, node, SOSA.usedProcedure, f"procedure {_show(proc)} is not in a known procedure scheme")
        elif wanted is not None and not self.types(proc) & wanted:
            names = " or ".join(_show(c) for c in wanted)
            self.add("R8", WARNING, node, SOSA.usedProcedure, f"procedure {_show(proc)} is not a {names}")

    def check_closed_types(self, node: Term) -> None:
        for t in self.data.objects(node, RDF.type):
            cl = self.catalog.codelist_for_class(t) if isinstance(t, IRI) else None
            if cl is not None and cl.closed and node not in cl.members():
                self.add("R7", ERROR, node, RDF.type, f"individual is typed {_show(t)} but is not in its owl:oneOf enumeration")


def validate_dataset(data: Graph, catalog: OntologyCatalog, config: ValidationConfig | None = None) -> ValidationReport:
    checker = _Checker(data, catalog)
    for node in dict.fromkeys(t.s for t in data.match(None, RDF.type, None)):
        checker.check_instance(node)
    return _finish(checker.findings, config)


def validate_codelists(catalog: OntologyCatalog, config: ValidationConfig | None = None) -> ValidationReport:
    g = catalog.graph
    findings: list[Finding] = []

    def add(severity: str, focus: Term, path: IRI | None, message: str) -> None:
        findings.append(Finding("R7", severity, focus, path, message))

    for cl in catalog.codelists():
        scheme, cls = cl.scheme, cl.cls
        if scheme is not None and cls is not None:
            if (scheme, RDFS.seeAlso, cls) not in g:
                add(WARNING, scheme, RDFS.seeAlso, f"scheme does not point to its class {_show(cls)}")
            if (cls, RDFS.seeAlso, scheme) not in g:
                add(WARNING, cls, RDFS.seeAlso, f"class does not point to its scheme {_show(scheme)}")
        elif cls is not None:
            targets = ", ".join(_show(t) for t in g.objects(cls, RDFS.seeAlso)) or "nothing"
            add(WARNING, cls, RDFS.seeAlso, f"no concept scheme pairs with this class (rdfs:seeAlso points to {targets})")
        elif scheme is not None:
            add(WARNING, scheme, RDFS.seeAlso, "no codelist class pairs with this scheme")
        if cls is None or not cl.closed:
            continue
        try:
            members = read_list(g, g.value(cls, OWL.oneOf))
        except MalformedListError as exc:
            add(ERROR, cls, OWL.oneOf, str(exc))
            continue
        for m in members:
            if (m, RDF.type, cls) not in g:
                add(ERROR, m, RDF.type, f"enumerated concept is not typed {_show(cls)}")
            if scheme is not None and (m, SKOS.inScheme, scheme) not in g:
                add(ERROR, m, SKOS.inScheme, f"enumerated concept is not skos:inScheme {_show(scheme)}")
        member_set = set(members)
        for s in g.subjects(RDF.type, cls):
            if s not in member_set:
                add(ERROR, s, RDF.type, f"individual is typed {_show(cls)} but is not in its owl:oneOf enumeration")
    return _finish(findings, config)


__all__ = [
    "ERROR", "RULES", "WARNING", "Finding", "ValidationConfig", "ValidationReport",
    "validate_codelists", "validate_dataset",
]

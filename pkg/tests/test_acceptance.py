"""The eight acceptance criteria, one test each. Every test prints a single
PASS or FAIL line (shown even when output capture is on) and then asserts."""

from __future__ import annotations

import random
import shutil
from collections import Counter

import pytest

from conftest import EXAMPLE_PARAMS, MINI_DIR, all_turtle_fixtures, federated_apps, fixture_path, hostile_strings, \
    rest_params
from test_query import bfs, nested_loop, node, random_bgp, random_graph
from glosis_ld.rdf import (
    GLOSIS_CL, GLOSIS_PROC, OWL, QUDT, RDF, SKOS, UNIT, XSD, Graph, IRI, Literal, graph_diff, isomorphic,
    parse_file, parse_turtle, serialize_turtle,
)
from glosis_ld.query import (
    SolutionTable, ast_shape, eval_path, evaluate, run_query,
)
from glosis_ld.query.ast import BGP, Group, PathPredicate, PathZeroOrMore, SelectQuery
from glosis_ld.service import App
from glosis_ld.transform import (
    codelist_csv_to_rdf, codelist_rdf_to_csv, codelist_subgraph, ingest_csv, load_mapping, read_codelist_csv,
    read_table,
)
from glosis_ld.transform.version import bump_directory
from glosis_ld.validate import ERROR, validate_dataset


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, failures: list[str]) -> None:
        status = "PASS" if not failures else "FAIL"
        detail = "" if not failures else ": " + "; ".join(failures)
        with capsys.disabled():
            print(f"\nacceptance criterion {number} ({title}): {status}{detail}")
        assert not failures, failures
    return emit


def check(failures: list[str], ok: bool, message: str) -> None:
    if not ok:
        failures.append(message)


# -- 1 ---------------------------------------------------------------------------------------

def test_criterion_1_turtle_round_trip(report):
    failures = []
    for path in all_turtle_fixtures():
        original = parse_file(path)
        again, _ = parse_turtle(serialize_turtle(original, original.prefixes))
        check(failures, isomorphic(original, again), f"{path.name} is not isomorphic after a round trip")
    report(1, "Turtle round trip", failures)


# -- 2 ---------------------------------------------------------------------------------------

def _errors(graph, catalog):
    return [(f.rule, f.focus) for f in validate_dataset(graph, catalog).findings if f.severity == ERROR]


def test_criterion_2_validator(report, catalog, lucas, srdb, wosis):
    failures = []
    for name, g in (("LUCAS", lucas), ("SRDB", srdb), ("WoSIS", wosis)):
        errors = _errors(g, catalog)
        check(failures, errors == [], f"{name} has errors {errors}")

    (unit,) = lucas.match(None, QUDT.unit, UNIT.PH)
    g = lucas.copy()
    g.remove(*unit)
    g.add(unit.s, unit.p, UNIT.PERCENT)
    check(failures, _errors(g, catalog) == [("R4", unit.s)], "unit:PH to unit:PERCENT is not one R4 error")

    (value,) = [t for t in lucas.match(None, QUDT.numericValue, None) if t.o.lexical == "4.30"]
    g = lucas.copy()
    g.remove(*value)
    g.add(value.s, value.p, Literal("abc", XSD.float))
    check(failures, _errors(g, catalog) == [("R4", value.s)], '"4.30" to "abc" is not one R4 error')

    foreign = IRI("http://example.org/data/foreign")
    g = lucas.copy()
    g.add(foreign, RDF.type, GLOSIS_CL.RootsAbundanceValueCode)
    check(failures, _errors(g, catalog) == [("R7", foreign)], "foreign RootsAbundanceValueCode is not one R7 error")
    report(2, "validator", failures)


# -- 3 ---------------------------------------------------------------------------------------

def test_criterion_3_codelist_round_trips(report, catalog):
    failures = []
    rows = read_codelist_csv(fixture_path("roots_abundance_codelist.csv"))
    check(failures, len(rows) == 5, f"expected 5 roots rows, found {len(rows)}")
    codelist = codelist_subgraph(catalog.graph, GLOSIS_CL.rootsAbundanceValueCode)
    check(failures, isomorphic(codelist_csv_to_rdf(rows), codelist), "CSV to RDF is not isomorphic to the codelist")
    exported = codelist_rdf_to_csv(codelist)
    check(failures, [r.notation for r in exported] == ["N", "V", "F", "C", "M"],
          f"export order {[r.notation for r in exported]}")
    check(failures, isomorphic(codelist_csv_to_rdf(exported), codelist), "RDF to CSV to RDF is not isomorphic")
    report(3, "codelist round trips", failures)


# -- 4 ---------------------------------------------------------------------------------------

def test_criterion_4_ingest(report):
    failures = []
    for table, mapping, listing in (("lucas_topsoil.csv", "lucas_mapping.json", "lucas_26761786.ttl"),
                                    ("srdb_sites.csv", "srdb_mapping.json", "srdb_12211.ttl")):
        graph = ingest_csv(read_table(fixture_path(table)), load_mapping(fixture_path(mapping)))
        missing = [t for t in parse_file(fixture_path(listing)) if t not in graph]
        check(failures, not missing, f"{table}: {len(missing)} listing triples missing")
    report(4, "ingest", failures)


# -- 5 ---------------------------------------------------------------------------------------

AVG_PH = """
SELECT (AVG(?value) AS ?avg) WHERE {
  ?obs sosa:observedProperty g_cl:physioChemicalPropertyCode-pH ;
       sosa:usedProcedure g_pd:pHProcedure-%s ;
       sosa:hasResult/qudt:numericValue ?value .
}"""

BOX = """
SELECT ?p WHERE {
  ?p gsp:hasGeometry%s ?g .
  FILTER (geof:sfIntersects(?g, "POLYGON((-85 19, -79 19, -79 25, -85 25, -85 19))"^^gsp:wktLiteral))
}"""


def test_criterion_5_query_engine(report, lucas, srdb, wosis, survey):
    failures = []
    (avg,) = run_query(lucas, AVG_PH % "pHCaCl2").column("avg")
    check(failures, abs(float(avg.lexical) - 4.30) <= 1e-6, f"(a) AVG pH CaCl2 is {avg.lexical}")
    check(failures, run_query(lucas, AVG_PH % "pHH2O").rows == [], "(a) AVG pH H2O is not empty")

    inside = run_query(wosis, BOX % "").column("p")
    check(failures, len(inside) == 3, f"(b) {len(inside)} WoSIS profiles in the box")
    check(failures, run_query(srdb, BOX % "/gsp:asWKT").rows == [], "(b) the SRDB site falls in the box")

    tree = {(t.s, t.o) for t in survey.match(None, SKOS.broader, None)}
    check(failures, len({c for edge in tree for c in edge}) > 3, "(c) the land-use tree is missing")
    for concept in sorted({c for edge in tree for c in edge}, key=str):
        q = f"SELECT ?up WHERE {{ <{concept.value}> skos:broader* ?up }}"
        if set(run_query(survey, q).column("up")) != bfs(tree, concept):
            failures.append(f"(c) broader* from {concept.value} differs from BFS")

    rng = random.Random(11)
    star = PathZeroOrMore(PathPredicate(SKOS.broader))
    for _ in range(100):
        edges = {(rng.randrange(50), rng.randrange(50)) for _ in range(rng.randint(0, 120))}
        edges = {(a, b) for a, b in edges if a < b}
        g = Graph((node(a), SKOS.broader, node(b)) for a, b in edges)
        start = rng.randrange(50)
        if eval_path(g, star, node(start)) != {node(i) for i in bfs(edges, start)}:
            failures.append("(c) broader* differs from BFS")
            break

    rng = random.Random(7)
    for _ in range(200):
        g = random_graph(rng)
        patterns = random_bgp(rng, g)
        got = evaluate(g, SelectQuery(items=None, where=Group((BGP(tuple(patterns)),)))).multiset()
        if got != nested_loop(g, patterns):
            failures.append(f"(d) BGP differs from the nested loop for {patterns}")
            break
    report(5, "query engine", failures)


# -- 6 ---------------------------------------------------------------------------------------

NITROGEN_ABOVE_2 = """
SELECT ?obs ?lay ?value WHERE {
  ?obs sosa:observedProperty g_cl:physioChemicalPropertyCode-Nittot ;
       sosa:hasResult ?res ;
       sosa:hasFeatureOfInterest ?lay .
  ?res qudt:numericValue ?value .
  FILTER (?value > 2)
}"""


def test_criterion_6_federation(report, catalog, survey, isric):
    failures = []
    local, _ = federated_apps(catalog, [survey], [isric])
    response = local.handle("GET", "/api/federated_soil_observations_for_property",
                            rest_params(EXAMPLE_PARAMS["federated_soil_observations_for_property"]))
    check(failures, response.status == 200, f"status {response.status}")
    if response.status == 200:
        rows = response.json()
        got = Counter(frozenset((k, v["value"]) for k, v in r.items()) for r in rows)

        def bag(table: SolutionTable) -> Counter:
            return Counter(frozenset((v, t.value if isinstance(t, IRI) else t.lexical)
                                     for v, t in zip(table.vars, row)) for row in table.rows)

        expected = bag(run_query(survey, NITROGEN_ABOVE_2)) + bag(run_query(isric, NITROGEN_ABOVE_2))
        check(failures, got == expected, "result is not the multiset union of both stores")
        values = [float(r["value"]["value"]) for r in rows]
        check(failures, values == sorted(values, reverse=True), f"not in descending order: {values}")
    report(6, "federation", failures)


# -- 7 ---------------------------------------------------------------------------------------

def test_criterion_7_rest(report, catalog, survey, lucas, isric):
    failures = []
    app, _ = federated_apps(catalog, [survey, lucas], [isric])
    for method, params in EXAMPLE_PARAMS.items():
        response = app.handle("GET", f"/api/{method}", rest_params(params))
        check(failures, response.status == 200 and response.json(), f"{method} answered {response.status}")

    rows = app.handle("GET", "/api/physioChemical_procedures", rest_params({"property": "pH"})).json()
    procedures = {r["procedure"]["value"] for r in rows}
    check(failures, procedures == {GLOSIS_PROC["pHProcedure-pHCaCl2"].value, GLOSIS_PROC["pHProcedure-pHH2O"].value},
          f"procedures for pH: {sorted(procedures)}")

    templates = app.snapshot.templates
    slots = [(m, p.name) for m in sorted(templates) for p in templates[m].params]
    ctx = app.param_context(app.snapshot)
    reference = {m: ast_shape(App.instantiate(t, t.dummy_terms())) for m, t in templates.items()}
    for i, value in enumerate(hostile_strings(1000, seed=2024)):
        method, name = slots[i % len(slots)]
        raw = dict(EXAMPLE_PARAMS[method], **{name: value})
        response = app.handle("GET", f"/api/{method}", rest_params(raw))
        if response.status == 500:
            failures.append(f"HTTP 500 for {method} {name}={value!r}")
            break
        try:
            terms = templates[method].bind(raw, ctx)
        except ValueError:
            continue
        if ast_shape(App.instantiate(templates[method], terms)) != reference[method]:
            failures.append(f"query shape changed for {method} {name}={value!r}")
            break
    report(7, "REST", failures)


# -- 8 ---------------------------------------------------------------------------------------

def test_criterion_8_version_bump(report, tmp_path):
    failures = []
    names = ("codelists.ttl", "common.ttl", "procedure.ttl")
    for name in names:
        shutil.copy(MINI_DIR / name, tmp_path / name)
    bumped = bump_directory(tmp_path, "micro")
    check(failures, sorted(str(v) for v in bumped.values()) == ["1.0.2"] * 3, f"bumped to {bumped}")
    for name in names:
        before, after = parse_file(MINI_DIR / name), parse_file(tmp_path / name)
        removed, added = graph_diff(before, after)
        (ontology,) = before.subjects(RDF.type, OWL.Ontology)
        expected_removed = {(ontology, OWL.versionInfo, Literal("1.0.1")),
                            (ontology, OWL.versionIRI, IRI(ontology.value + "/1.0.1"))}
        expected_added = {(ontology, OWL.versionInfo, Literal("1.0.2")),
                          (ontology, OWL.versionIRI, IRI(ontology.value + "/1.0.2"))}
        check(failures, set(map(tuple, removed)) == expected_removed and set(map(tuple, added)) == expected_added,
              f"{name}: removed {removed}, added {added}")
    report(8, "version bump", failures)

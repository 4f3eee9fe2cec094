from __future__ import annotations

import json
import random
from collections import Counter, deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glosis_ld.rdf import GLOSIS_CL, SKOS, XSD, BNode, Graph, IRI, Literal
from glosis_ld.query import (
    FederationClient, FederationError, LocalEndpoint, QuerySyntaxError, SolutionTable, UnsupportedFeatureError,
    Var, ast_shape, eval_path, eval_path_inverse, evaluate, parse_query, path_pairs, run_query, to_sparql,
)
from glosis_ld.query.ast import (
    BGP, Aggregate, Group, PathAlternative, PathPredicate, PathSequence, PathZeroOrMore, SelectQuery,
    TriplePattern,
)

LANDUSE = "http://w3id.org/glosis/open/landuse/"
CUBA_BOX = "POLYGON((-85 19, -79 19, -79 25, -85 25, -85 19))"

AVG_PH = """
SELECT (AVG(?value) AS ?avg)
WHERE {
  ?obs sosa:observedProperty g_cl:physioChemicalPropertyCode-pH ;
       sosa:usedProcedure g_pd:pHProcedure-%s ;
       sosa:hasResult ?res .
  ?res qudt:numericValue ?value .
}
"""


# -- parser ------------------------------------------------------------------------------

def test_aggregate_over_one_bgp():
    q = parse_query(AVG_PH % "pHCaCl2")
    (item,) = q.items
    assert item.var == Var("avg")
    assert item.expr == Aggregate("AVG", False, Var("value"))
    (bgp,) = q.where.elements
    assert isinstance(bgp, BGP) and len(bgp.triples) == 4


def test_alternative_with_zero_or_more():
    q = parse_query("SELECT ?c WHERE { ?r rdf:type|skos:broader* ?c }")
    (pattern,) = q.where.elements[0].triples
    assert pattern.predicate == PathAlternative((
        PathPredicate(IRI("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")),
        PathZeroOrMore(PathPredicate(SKOS.broader)),
    ))


def test_sequence_path():
    q = parse_query("SELECT ?g WHERE { ?s gsp:hasGeometry/gsp:asWKT ?g }")
    assert isinstance(q.where.elements[0].triples[0].predicate, PathSequence)


@pytest.mark.parametrize("text,feature", [
    ("CONSTRUCT { ?s ?p ?o } WHERE { ?s ?p ?o }", "CONSTRUCT"),
    ("SELECT ?s WHERE { ?s ?p ?o OPTIONAL { ?s ?q ?r } }", "OPTIONAL"),
    ("SELECT ?s WHERE { ?s ?p ?o } GROUP BY ?s", "GROUP"),
    ("SELECT (SUM(?o) AS ?t) WHERE { ?s ?p ?o }", "SUM"),
])
def test_unsupported_features_are_named(text, feature):
    with pytest.raises(UnsupportedFeatureError) as info:
        parse_query(text)
    assert feature in info.value.feature


def test_syntax_error_has_line_and_column():
    with pytest.raises(QuerySyntaxError) as info:
        parse_query("SELECT ?s\nWHERE { ?s ?p }")
    assert info.value.line == 2
    assert info.value.column > 1


def test_undeclared_prefix_is_a_syntax_error():
    with pytest.raises(QuerySyntaxError):
        parse_query("SELECT ?s WHERE { ?s nope:p ?o }", prefixes={})


@pytest.mark.parametrize("text", [
    AVG_PH % "pHCaCl2",
    "SELECT DISTINCT ?c WHERE { ?r rdf:type|skos:broader* ?c . FILTER (STR(?c) != \"x\\\"y\") } ORDER BY DESC(?c) LIMIT 3",
    "SELECT ?o WHERE { { ?o a sosa:Observation } UNION { SERVICE SILENT <urn:glosis:endpoint:a> { ?o ?p 1.5 } } }",
    "SELECT (COUNT(DISTINCT ?s) AS ?n) WHERE { { SELECT ?s WHERE { ?s ?p ?o } } FILTER (!BOUND(?x) && -?o < 2) }",
])
def test_serialized_query_parses_to_the_same_tree(text):
    q = parse_query(text)
    again = parse_query(to_sparql(q))
    assert again.items == q.items and again.where == q.where
    assert (again.distinct, again.order_by, again.limit) == (q.distinct, q.order_by, q.limit)


# -- evaluation on the fixtures ----------------------------------------------------------

def test_average_ph_with_calcium_chloride(lucas):
    (avg,) = run_query(lucas, AVG_PH % "pHCaCl2").column("avg")
    assert float(avg.lexical) == pytest.approx(4.30, abs=1e-6)


def test_average_ph_with_water_is_empty(lucas):
    assert run_query(lucas, AVG_PH % "pHH2O").rows == []


def test_average_of_a_singleton_is_the_value(lucas):
    (avg,) = run_query(lucas, "SELECT (AVG(?v) AS ?a) WHERE { ?r qudt:unit unit:PH ; qudt:numericValue ?v }").column("a")
    assert float(avg.lexical) == pytest.approx(4.30)


def test_bounding_box_selects_the_three_profiles(wosis, srdb):
    query = f"""
    SELECT ?p WHERE {{
      ?p gsp:hasGeometry ?g .
      FILTER (geof:sfIntersects(?g, "{CUBA_BOX}"^^gsp:wktLiteral))
    }}"""
    found = run_query(wosis, query).column("p")
    assert sorted(p.value.rsplit("#", 1)[1] for p in found) == ["65321", "71979", "71983"]
    far = run_query(srdb, query.replace("gsp:hasGeometry ?g", "gsp:hasGeometry/gsp:asWKT ?g"))
    assert far.rows == []
    near = run_query(srdb, """
    SELECT ?p WHERE {
      ?p gsp:hasGeometry/gsp:asWKT ?g .
      FILTER (geof:sfIntersects(?g, "POLYGON((100 30, 110 30, 110 40, 100 40, 100 30))"^^gsp:wktLiteral))
    }""")
    assert len(near) == 1


def test_integer_cast_in_filter(survey):
    table = run_query(survey, """
    SELECT ?lay WHERE { ?lay iso28258:ProfileElement.lowerDepth ?d . FILTER (xsd:integer(?d) <= 30) }""")
    expected = {t.s for t in survey.match(None, IRI("http://w3id.org/glosis/model/iso28258/2013#"
                                                    "ProfileElement.lowerDepth"), None) if int(t.o.lexical) <= 30}
    assert set(table.column("lay")) == expected and expected


def test_failed_cast_drops_the_row():
    g = Graph([(IRI("urn:a"), IRI("urn:v"), Literal("abc")), (IRI("urn:b"), IRI("urn:v"), Literal("1.5"))])
    table = run_query(g, "SELECT ?s WHERE { ?s <urn:v> ?v . FILTER (xsd:float(?v) > 0) }")
    assert table.column("s") == [IRI("urn:b")]


def test_text_contains():
    g = Graph([(IRI("urn:a"), IRI("urn:l"), Literal("Land use for #1")), (IRI("urn:b"), IRI("urn:l"), Literal("x"))])
    table = run_query(g, 'SELECT ?s WHERE { ?s <urn:l> ?l . FILTER (textContains(?l, "use")) }')
    assert table.column("s") == [IRI("urn:a")]


def test_order_by_desc_and_limit(survey):
    table = run_query(survey, """
    SELECT ?v WHERE { ?o sosa:observedProperty g_cl:physioChemicalPropertyCode-Nittot ;
                         sosa:hasResult/qudt:numericValue ?v }
    ORDER BY DESC(?v) LIMIT 3""")
    got = [float(v.lexical) for v in table.column("v")]
    assert len(got) == 3 and got == sorted(got, reverse=True)
    every = [float(t.o.lexical) for t in survey.match(None, IRI("http://qudt.org/schema/qudt/numericValue"), None)
             if survey.match(None, IRI("http://www.w3.org/ns/sosa/hasResult"), t.s)
             and any(survey.match(o.s, IRI("http://www.w3.org/ns/sosa/observedProperty"),
                                  GLOSIS_CL["physioChemicalPropertyCode-Nittot"])
                     for o in survey.match(None, IRI("http://www.w3.org/ns/sosa/hasResult"), t.s))]
    assert got == sorted(every, reverse=True)[:3]


COUNT_SITES = """
SELECT (COUNT(DISTINCT ?site) AS ?n)
WHERE {
  ?obs sosa:observedProperty g_cl:physioChemicalPropertyCode-Nittot ;
       sosa:hasResult ?res ;
       sosa:hasFeatureOfInterest ?lay .
  ?res qudt:numericValue ?value .
  FILTER (?value > %s)
  ?site iso28258:Site.typicalProfile/iso28258:Profile.element ?lay .
  ?lu sosa:hasFeatureOfInterest ?site ;
      sosa:observedProperty g_sp:landUseClassProperty ;
      sosa:hasResult ?lu_res .
  ?lu_res rdf:type|skos:broader* ?lu_code .
  ?lu_code skos:prefLabel "%s" .
}
"""


def count_sites_oracle(g: Graph, threshold: float, label: str) -> int:
    """Direct graph walk, without the query engine."""
    sosa, iso = "http://www.w3.org/ns/sosa/", "http://w3id.org/glosis/model/iso28258/2013#"
    ancestors = {}

    def up(code):
        if code not in ancestors:
            seen, todo = set(), [code]
            while todo:
                c = todo.pop()
                if c in seen:
                    continue
                seen.add(c)
                todo.extend(g.objects(c, SKOS.broader))
            ancestors[code] = seen
        return ancestors[code]

    sites = set()
    for obs in g.subjects(IRI(sosa + "observedProperty"), GLOSIS_CL["physioChemicalPropertyCode-Nittot"]):
        for res in g.objects(obs, IRI(sosa + "hasResult")):
            if not any(float(v.lexical) > threshold for v in g.objects(res, IRI("http://qudt.org/schema/qudt/numericValue"))):
                continue
            for lay in g.objects(obs, IRI(sosa + "hasFeatureOfInterest")):
                for profile in g.subjects(IRI(iso + "Profile.element"), lay):
                    for site in g.subjects(IRI(iso + "Site.typicalProfile"), profile):
                        for lu in g.subjects(IRI(sosa + "hasFeatureOfInterest"), site):
                            if (lu, IRI(sosa + "observedProperty"),
                                    IRI("http://w3id.org/glosis/model/siteplot/landUseClassProperty")) not in g:
                                continue
                            for code in g.objects(lu, IRI(sosa + "hasResult")):
                                reach = set(g.objects(code, IRI("http://www.w3.org/1999/02/22-rdf-syntax-ns#type"))) | up(code)
                                if any(Literal(label) in g.objects(c, SKOS.prefLabel) for c in reach):
                                    sites.add(site)
    return len(sites)


@pytest.mark.parametrize("threshold", ["0", "2", "2.4", "10"])
@pytest.mark.parametrize("label", ["PRIMARY SECTOR", "AGRICULTURE", "FALLOW LAND", "SECONDARY SECTOR"])
def test_count_distinct_sites_matches_graph_walk(survey, threshold, label):
    (n,) = run_query(survey, COUNT_SITES % (threshold, label)).column("n")
    assert int(n.lexical) == count_sites_oracle(survey, float(threshold), label)


def test_count_distinct_known_answer(survey):
    (n,) = run_query(survey, COUNT_SITES % ("2", "PRIMARY SECTOR")).column("n")
    assert n == Literal("4", XSD.integer)


def test_count_distinct_ignores_duplicated_solutions(survey):
    single = run_query(survey, "SELECT (COUNT(DISTINCT ?o) AS ?n) WHERE { ?o sosa:hasResult ?r }")
    doubled = run_query(survey, "SELECT (COUNT(DISTINCT ?o) AS ?n) WHERE { { ?o sosa:hasResult ?r } UNION "
                                "{ ?o sosa:hasResult ?r } }")
    plain = run_query(survey, "SELECT (COUNT(?o) AS ?n) WHERE { { ?o sosa:hasResult ?r } UNION "
                              "{ ?o sosa:hasResult ?r } }")
    assert single.rows == doubled.rows
    assert int(plain.rows[0][0].lexical) == 2 * int(single.rows[0][0].lexical)


# -- property paths ----------------------------------------------------------------------

def test_broader_star_climbs_the_land_use_tree(survey):
    reach = eval_path(survey, PathZeroOrMore(PathPredicate(SKOS.broader)), IRI(LANDUSE + "U111"))
    assert reach == {IRI(LANDUSE + c) for c in ("U111", "U110", "U100")}
    below = eval_path_inverse(survey, PathZeroOrMore(PathPredicate(SKOS.broader)), IRI(LANDUSE + "U100"))
    assert below == {IRI(LANDUSE + c) for c in ("U100", "U110", "U111", "U112", "U120")}


def bfs(edges: set[tuple[int, int]], start: int) -> set[int]:
    adjacent: dict[int, list[int]] = {}
    for a, b in edges:
        adjacent.setdefault(a, []).append(b)
    seen, queue = {start}, deque([start])
    while queue:
        for b in adjacent.get(queue.popleft(), []):
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return seen


def node(i: int) -> IRI:
    return IRI(f"urn:c{i}")


_edges = st.lists(st.tuples(st.integers(0, 49), st.integers(0, 49)), max_size=150)


@settings(max_examples=150, deadline=None)
@given(_edges, st.integers(0, 49), st.booleans())
def test_zero_or_more_matches_bfs(edges, start, acyclic):
    if acyclic:
        edges = [(a, b) for a, b in edges if a < b]
    g = Graph((node(a), SKOS.broader, node(b)) for a, b in edges)
    expected = {node(i) for i in bfs(set(edges), start)}
    star = PathZeroOrMore(PathPredicate(SKOS.broader))
    assert eval_path(g, star, node(start)) == expected
    table = run_query(g, f"SELECT ?c WHERE {{ <urn:c{start}> skos:broader* ?c }}")
    assert Counter(table.column("c")) == Counter(expected)
    for target in expected:
        assert node(start) in eval_path_inverse(g, star, target)


@settings(max_examples=60, deadline=None)
@given(_edges)
def test_sequence_equals_composed_relation(edges):
    g = Graph((node(a), SKOS.broader, node(b)) for a, b in edges)
    step = {(node(a), node(b)) for a, b in edges}
    composed = {(a, c) for a, b in step for b2, c in step if b == b2}
    assert path_pairs(g, PathSequence((PathPredicate(SKOS.broader), PathPredicate(SKOS.broader)))) == composed


# -- BGP evaluation against a nested-loop oracle ----------------------------------------

VARS = [Var(n) for n in "abcd"]


def random_graph(rng: random.Random) -> Graph:
    nodes = [IRI(f"urn:n{i}") for i in range(30)] + [BNode(f"x{i}") for i in range(3)]
    preds = [IRI(f"urn:p{i}") for i in range(4)]
    objects = nodes + [Literal(str(i), XSD.integer) for i in range(5)] + [Literal("a"), Literal("a", lang="en")]
    return Graph((rng.choice(nodes), rng.choice(preds), rng.choice(objects)) for _ in range(rng.randint(0, 500)))


def random_bgp(rng: random.Random, g: Graph) -> list[TriplePattern]:
    triples = list(g) or [(IRI("urn:n0"), IRI("urn:p0"), IRI("urn:n1"))]
    patterns = []
    for _ in range(rng.randint(1, 3)):
        s, p, o = rng.choice(triples)
        patterns.append(TriplePattern(
            rng.choice(VARS) if rng.random() < 0.8 or isinstance(s, BNode) else s,
            rng.choice(VARS) if rng.random() < 0.2 else p,
            rng.choice(VARS) if rng.random() < 0.7 or isinstance(o, BNode) else o,
        ))
    return patterns


def nested_loop(g: Graph, patterns: list[TriplePattern]) -> Counter:
    triples = list(g)
    solutions = [{}]
    for pattern in patterns:
        extended = []
        for sol in solutions:
            for triple in triples:
                new = dict(sol)
                for slot, term in zip((pattern.subject, pattern.predicate, pattern.object), triple):
                    if isinstance(slot, Var):
                        if new.setdefault(slot.name, term) != term:
                            break
                    elif slot != term:
                        break
                else:
                    extended.append(new)
        solutions = extended
    return Counter(frozenset(s.items()) for s in solutions)


def test_bgp_matches_nested_loop_on_random_graphs():
    rng = random.Random(7)
    for _ in range(200):
        g = random_graph(rng)
        patterns = random_bgp(rng, g)
        query = SelectQuery(items=None, where=Group((BGP(tuple(patterns)),)))
        assert evaluate(g, query).multiset() == nested_loop(g, patterns), patterns


# -- algebraic invariants ----------------------------------------------------------------

def test_union_is_commutative_as_a_multiset(survey):
    a = "{ ?x sosa:observedProperty g_cl:physioChemicalPropertyCode-pH }"
    b = "{ ?x sosa:hasFeatureOfInterest ?y }"
    left = run_query(survey, f"SELECT * WHERE {{ {a} UNION {b} }}")
    right = run_query(survey, f"SELECT * WHERE {{ {b} UNION {a} }}")
    assert left.multiset() == right.multiset()
    assert len(left) == len(run_query(survey, f"SELECT * WHERE {a}")) + len(run_query(survey, f"SELECT * WHERE {b}"))


def test_service_matches_inlined_pattern(survey, isric):
    federation = FederationClient({"isric": LocalEndpoint(isric)})
    body = "?o sosa:hasResult/qudt:numericValue ?v . FILTER (?v > 1)"
    remote = run_query(survey, f"SELECT ?o ?v WHERE {{ SERVICE <urn:glosis:endpoint:isric> {{ {body} }} }}", federation)
    local = run_query(isric, f"SELECT ?o ?v WHERE {{ {body} }}")
    assert remote.multiset() == local.multiset() and len(local) > 0


def test_unknown_service_fails_unless_lenient(survey):
    text = "SELECT ?o WHERE { SERVICE <urn:glosis:endpoint:nowhere> { ?o ?p ?v } }"
    with pytest.raises(FederationError):
        run_query(survey, text, FederationClient())
    assert run_query(survey, text, FederationClient(lenient=True)).rows == []
    # a silenced failure contributes the single empty solution
    assert run_query(survey, text.replace("SERVICE", "SERVICE SILENT"), FederationClient()).rows == [(None,)]


# -- result tables -----------------------------------------------------------------------

def test_solution_table_json_round_trip(survey):
    table = run_query(survey, "SELECT ?s ?p ?o WHERE { ?s ?p ?o } LIMIT 40")
    table.rows.append((BNode("z"), None, Literal("grass", lang="en")))
    doc = json.loads(json.dumps(table.to_json()))
    assert SolutionTable.from_json(doc) == table


def test_solution_table_csv():
    table = SolutionTable(("s", "v"), [(IRI("urn:a"), Literal("1,5")), (BNode("b"), None)])
    assert table.to_csv() == 's,v\r\nurn:a,"1,5"\r\n_:b,\r\n'


def test_solution_table_rejects_ragged_rows():
    with pytest.raises(ValueError):
        SolutionTable(("a",), [(IRI("urn:a"), IRI("urn:b"))])


def test_shape_ignores_constants_only():
    a = parse_query('SELECT ?s WHERE { ?s <urn:p> "x" }')
    b = parse_query("SELECT ?s WHERE { ?s <urn:q> 1 }")
    c = parse_query("SELECT ?s WHERE { ?s ?p 1 }")
    assert ast_shape(a) == ast_shape(b)
    assert ast_shape(a) != ast_shape(c)

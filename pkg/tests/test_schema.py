from __future__ import annotations

import pytest

from glosis_ld.rdf import (
    DCTERMS, FOAF, GLOSIS_CL, GLOSIS_CM, GLOSIS_LH, GLOSIS_PROC, GLOSIS_SP, OWL, RDF, RDFS, SCHEMA, SKOS,
    SOSA, UNIT, XSD, BNode, BNodeFactory, Graph, IRI, Literal, parse_turtle,
)
from glosis_ld.schema import (
    ALL, CARD, CODELIST, HAS, OBSERVATION, QUANTITY_VALUE, SOME, SPATIAL_OBJECT, DuplicateModuleError,
    RestrictionError, RestrictionSpec, UnknownClassError, UnknownModuleError, extract_class_profile,
    extract_codelists, extract_metadata, extract_procedures, load_catalog, metadata_config, profile_triples,
    read_manifest,
)

MAIN = IRI("http://w3id.org/glosis/model/main")


def module(iri: str, body: str = "", imports: tuple[str, ...] = ()) -> tuple[IRI, Graph]:
    imp = "".join(f" ; owl:imports <{i}>" for i in imports)
    text = f"""
    @prefix owl: <http://www.w3.org/2002/07/owl#> .
    @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
    @prefix dcterms: <http://purl.org/dc/terms/> .
    @prefix foaf: <http://xmlns.com/foaf/0.1/> .
    <{iri}> a owl:Ontology{imp} .
    {body}
    """
    return IRI(iri), parse_turtle(text)[0]


# -- load_catalog ------------------------------------------------------------------------

def test_mini_glosis_catalog_contents(catalog):
    assert MAIN in catalog.modules
    assert catalog.warnings == []
    assert len(catalog.codelists()) >= 1
    observation_classes = [
        c for c in catalog.graph.subjects(RDF.type, OWL.Class)
        if isinstance(c, IRI) and catalog.category(c) == OBSERVATION
    ]
    assert len(observation_classes) >= 2


def test_empty_input_gives_empty_catalog():
    cat = load_catalog([])
    assert cat.modules == {} and len(cat.graph) == 0 and cat.warnings == []
    assert extract_codelists(cat) == [] and extract_procedures(cat) == []


def test_unresolved_import_is_a_warning():
    cat = load_catalog([module("urn:m:a", imports=("urn:m:absent",))])
    assert len(cat.warnings) == 1
    assert "urn:m:absent" in cat.warnings[0]


def test_resolver_supplies_missing_imports():
    fetched = []

    def resolver(iri):
        fetched.append(iri)
        return module(iri.value)[1]

    cat = load_catalog([module("urn:m:a", imports=("urn:m:b",))], resolver=resolver)
    assert fetched == [IRI("urn:m:b")]
    assert set(cat.modules) == {IRI("urn:m:a"), IRI("urn:m:b")}
    assert cat.warnings == []


def test_duplicate_module_iri_is_rejected():
    with pytest.raises(DuplicateModuleError):
        load_catalog([module("urn:m:a"), module("urn:m:a")])


def test_manifest_lines(tmp_path):
    (tmp_path / "a.ttl").write_text("")
    manifest = tmp_path / "m.manifest"
    manifest.write_text("# comment\n\nurn:m:a\ta.ttl\n")
    assert read_manifest(manifest) == [(IRI("urn:m:a"), (tmp_path / "a.ttl").resolve())]


# -- class profiles ----------------------------------------------------------------------

def test_fragment_cover_profile(catalog):
    profile = extract_class_profile(catalog, GLOSIS_CM.FragmentCover)
    assert profile.category == OBSERVATION
    assert profile.on(SOSA.observedProperty, HAS) == [
        RestrictionSpec(SOSA.observedProperty, HAS, (GLOSIS_CM.fragmentCoverProperty,))
    ]
    assert profile.on(SOSA.hasResult, SOME) == [
        RestrictionSpec(SOSA.hasResult, SOME, (GLOSIS_CL.FragmentCoverValueCode,))
    ]


def test_bulk_density_profile(catalog):
    profile = extract_class_profile(catalog, GLOSIS_LH.BulkDensityWholeSoilValue)
    assert profile.category == QUANTITY_VALUE
    qudt = "http://qudt.org/schema/qudt/"
    assert profile.on(IRI(qudt + "unit"), HAS)[0].values == (UNIT["KiloGM-PER-DeciM3"],)
    assert profile.on(IRI(qudt + "numericValue"), ALL)[0].values == (XSD.float,)


def test_plot_profile_has_eight_cardinalities(catalog):
    profile = extract_class_profile(catalog, GLOSIS_SP.GL_Plot)
    assert profile.category == SPATIAL_OBJECT
    cards = [r for r in profile.restrictions if r.kind == CARD]
    assert all(r.count == 1 for r in cards)
    names = {r.on_property.value.rsplit("/", 1)[1] for r in cards}
    assert names == {"location", "remarks", "responsibleOrganization", "positionalAccuracy",
                     "altitude", "timestamp", "mapSheetID", "country"}


def test_feature_of_interest_union_is_flattened(catalog):
    profile = extract_class_profile(catalog, GLOSIS_LH.RootsAbundance)
    assert profile.on(SOSA.hasFeatureOfInterest, ALL) == [
        RestrictionSpec(SOSA.hasFeatureOfInterest, ALL, (GLOSIS_LH.GL_Layer, GLOSIS_LH.GL_Horizon))
    ]


def test_unknown_class():
    with pytest.raises(UnknownClassError):
        extract_class_profile(load_catalog([]), IRI("urn:nothing"))


def test_restriction_without_property_names_its_node():
    cat = load_catalog([module("urn:m:a", """
        <urn:C> a owl:Class ; rdfs:subClassOf [ a owl:Restriction ; owl:someValuesFrom <urn:D> ] .
    """)])
    with pytest.raises(RestrictionError) as info:
        extract_class_profile(cat, IRI("urn:C"))
    assert isinstance(info.value.node, BNode)


def test_restriction_spec_invariants():
    with pytest.raises(ValueError):
        RestrictionSpec(SOSA.hasResult, CARD, count=-1)
    with pytest.raises(ValueError):
        RestrictionSpec(SOSA.hasResult, SOME, ())
    with pytest.raises(ValueError):
        RestrictionSpec(SOSA.hasResult, "maybe", (OWL.Thing,))


def _declared_classes(catalog):
    return [c for c in dict.fromkeys(catalog.graph.subjects(RDF.type, OWL.Class)) if isinstance(c, IRI)]


def test_profile_extraction_is_idempotent(catalog):
    fresh = load_catalog(list(catalog.modules.items()))
    for cls in _declared_classes(catalog):
        assert extract_class_profile(catalog, cls) == extract_class_profile(fresh, cls)


def test_profile_round_trips_through_triples(catalog):
    for cls in _declared_classes(catalog):
        original = extract_class_profile(catalog, cls)
        g = Graph()
        g.add(cls, RDF.type, OWL.Class)
        profile_triples(original, g, BNodeFactory("p"))
        rebuilt = extract_class_profile(load_catalog([(IRI("urn:m:rebuilt"), g)]), cls)
        assert set(rebuilt.restrictions) == set(original.restrictions)
        assert set(rebuilt.superclasses) == set(original.superclasses)


def test_equivalent_class_alias_counts_for_category(catalog):
    om = IRI("http://def.isotc211.org/iso19156/2011/Observation#OM_Observation")
    g = Graph([(IRI("urn:X"), RDF.type, OWL.Class), (IRI("urn:X"), RDFS.subClassOf, om)])
    cat = load_catalog([*catalog.modules.items(), (IRI("urn:m:x"), g)])
    assert cat.category(IRI("urn:X")) == OBSERVATION


# -- codelists and procedures ------------------------------------------------------------

def test_roots_abundance_codelist(catalog):
    cl = catalog.codelist_for_class(GLOSIS_CL.RootsAbundanceValueCode)
    assert cl.closed
    assert cl.scheme == GLOSIS_CL.rootsAbundanceValueCode
    assert cl.notations == ["N", "V", "F", "C", "M"]


def test_sand_codelist_is_an_observable_property(catalog):
    cl = catalog.codelist_for_class(GLOSIS_CL.SandPropertyCode)
    assert cl.observable_property
    assert catalog.category(GLOSIS_CL.SandPropertyCode) == CODELIST


def test_closed_codelists_members_are_typed_and_in_scheme(catalog):
    g = catalog.graph
    for cl in catalog.codelists():
        if cl.closed and cl.scheme is not None:
            for c in cl.concepts:
                assert (c.iri, RDF.type, cl.cls) in g
                assert (c.iri, SKOS.inScheme, cl.scheme) in g


def test_codelist_without_skos_content():
    assert extract_codelists(load_catalog([module("urn:m:a")])) == []


def test_kjeldahl_procedure(catalog):
    scheme = next(p for p in catalog.procedures() if p.scheme == GLOSIS_PROC.nitrogenTotalProcedure)
    concept = scheme.concept(GLOSIS_PROC["nitrogenTotalProcedure-TotalN_kjeldahl"])
    assert concept.pref_label == "TotalN_kjeldahl"
    assert IRI("https://en.wikipedia.org/wiki/Kjeldahl_method") in concept.scope_notes
    assert scheme.is_acyclic()


def test_ph_procedures(catalog):
    scheme = next(p for p in catalog.procedures() if p.scheme == GLOSIS_PROC.pHProcedure)
    assert {c.iri for c in scheme.concepts} == {
        GLOSIS_PROC["pHProcedure-pHCaCl2"], GLOSIS_PROC["pHProcedure-pHH2O"],
    }


def test_procedure_cycle_is_detected():
    cat = load_catalog([module("urn:m:p", """
        @prefix skos: <http://www.w3.org/2004/02/skos/core#> .
        @prefix sosa: <http://www.w3.org/ns/sosa/> .
        <urn:s> a skos:ConceptScheme .
        <urn:a> a skos:Concept, sosa:Procedure ; skos:inScheme <urn:s> ; skos:broader <urn:b> .
        <urn:b> a skos:Concept, sosa:Procedure ; skos:inScheme <urn:s> ; skos:broader <urn:a> .
    """)])
    (scheme,) = cat.procedures()
    assert not scheme.is_acyclic()


# -- metadata ----------------------------------------------------------------------------

def test_title_only_module():
    iri, g = module("urn:m:t", '<urn:m:t> dcterms:title "X" .')
    assert extract_metadata(load_catalog([(iri, g)]), iri).title == "X"


def test_creator_blank_node_name():
    iri, g = module("urn:m:t", '<urn:m:t> dcterms:creator [ foaf:name "Someone" ] .')
    assert extract_metadata(load_catalog([(iri, g)]), iri).creators == ("Someone",)


def test_unknown_module():
    with pytest.raises(UnknownModuleError):
        extract_metadata(load_catalog([]), MAIN)


def test_fixture_metadata_matches_triples(catalog):
    g = catalog.modules[MAIN]
    record = extract_metadata(catalog, MAIN)
    (title,) = g.objects(MAIN, DCTERMS.title)
    assert record.title == title.lexical
    assert record.version == g.value(MAIN, OWL.versionInfo).lexical
    assert record.license == g.value(MAIN, DCTERMS.license).value
    creators = g.objects(MAIN, DCTERMS.creator)
    expected = {g.value(c, FOAF.name).lexical: g.value(g.value(c, SCHEMA.affiliation), FOAF.name).lexical
                for c in creators}
    assert dict(zip(record.creators, record.creator_affiliations)) == expected
    assert len(record.contributors) == len(g.objects(MAIN, DCTERMS.contributor))


def test_metadata_config_lines(catalog):
    record = extract_metadata(catalog, MAIN)
    lines = metadata_config(record).splitlines()
    keys = [line.split("=", 1)[0] for line in lines]
    assert keys == ["title", "version", "authors", "authorsInstitution", "contributors",
                    "contributorsInstitution", "license"]
    assert f"authors={';'.join(record.creators)}" in lines


def test_metadata_config_escapes_line_breaks():
    iri, g = module("urn:m:t")
    g.add(iri, DCTERMS.title, Literal("two\nlines"))
    text = metadata_config(extract_metadata(load_catalog([(iri, g)]), iri))
    assert "title=two\\nlines\n" in text
    assert len(text.splitlines()) == 7

from __future__ import annotations

from pathlib import Path

import pytest

from glosis_ld import FIXTURES_DIR, MINI_GLOSIS_MANIFEST, SNIPPETS_DIR
from glosis_ld.rdf import parse_file
from glosis_ld.schema import load_manifest

MINI_DIR = MINI_GLOSIS_MANIFEST.parent


def fixture_path(name: str) -> Path:
    return FIXTURES_DIR / name


@pytest.fixture(scope="session")
def catalog():
    return load_manifest(MINI_GLOSIS_MANIFEST)


@pytest.fixture(scope="session")
def lucas():
    return parse_file(FIXTURES_DIR / "lucas_26761786.ttl")


@pytest.fixture(scope="session")
def srdb():
    return parse_file(FIXTURES_DIR / "srdb_12211.ttl")


@pytest.fixture(scope="session")
def wosis():
    return parse_file(FIXTURES_DIR / "wosis_profiles.ttl")


@pytest.fixture(scope="session")
def survey():
    return parse_file(FIXTURES_DIR / "nitrogen_survey.ttl")


@pytest.fixture(scope="session")
def isric():
    return parse_file(FIXTURES_DIR / "nitrogen_isric.ttl")


@pytest.fixture(scope="session")
def nuts():
    return parse_file(FIXTURES_DIR / "nuts.ttl")


def all_turtle_fixtures() -> list[Path]:
    return sorted(SNIPPETS_DIR.glob("*.ttl")) + sorted(MINI_DIR.glob("*.ttl")) + sorted(FIXTURES_DIR.glob("*.ttl"))


# -- service helpers shared by the service and acceptance tests ------------------------------

EXAMPLE_PARAMS = {
    "avg_nitro_for_geo": {"geometry": "POLYGON((14 49, 25 49, 25 55, 14 55, 14 49))"},
    "avg_physioChemical_property_for_NUTS": {"property": "pH", "nuts": "PT"},
    "avg_physioChemical_property_for_geo": {
        "property": "pH", "geometry": "POLYGON((-9 37, -8 37, -8 38, -9 38, -9 37))"},
    "avg_physioChemical_property_procedure_for_NUTS": {"property": "pH", "procedure": "pHCaCl2", "nuts": "PT"},
    "federated_soil_observations_for_property": {"property": "Nittot", "threshold": "2"},
    "physioChemical_procedures": {"property": "pH"},
    "total_survey_points_lu_prop_value": {"property": "Nittot", "threshold": "2", "landuse": "PRIMARY SECTOR"},
}

INJECTIONS = [
    '" } ; DROP ALL ; #', "> . ?s ?p ?o . <", '""" } UNION { ?s ?p ?o } #', "\\", "\\\"", "}", "{", "?x",
    "\n} UNION { ?a ?b ?c }\n", "' OR '1'='1", "<urn:evil>", "urn:x> } SELECT * WHERE { ?s ?p ?o", "#",
    "POINT(0 0)) } #", 'PL" || true || "', "pH . ?s ?p ?o", "2 || true", "1e999", "-0", "NaN", "\x00",
    "ÅÄÖ☃", "‮", "%22%7D", "SERVICE <http://127.0.0.1:1/> { ?s ?p ?o }", "isric> { ?s ?p ?o } #",
    "", " ", "PRIMARY SECTOR\" . ?x ?y ?z . \"",
]


def hostile_strings(n: int, seed: int = 0) -> list[str]:
    """``n`` strings mixing injection payloads, valid-looking prefixes and random text."""
    import random

    rng = random.Random(seed)
    plain = ["pH", "Nittot", "PT", "2", "pHCaCl2", "isric", "PRIMARY SECTOR", "POINT(1 2)"]
    alphabet = "\"'<>{}()?;.#\\ \n\t|&!=*+-/:%@^_$0123456789abcXYZé☃"
    out = []
    for i in range(n):
        kind = i % 4
        if kind == 0:
            out.append(rng.choice(INJECTIONS))
        elif kind == 1:
            out.append(rng.choice(plain) + rng.choice(INJECTIONS))
        elif kind == 2:
            out.append(rng.choice(INJECTIONS) + rng.choice(plain))
        else:
            out.append("".join(rng.choice(alphabet) for _ in range(rng.randint(0, 30))))
    return out


def federated_apps(catalog, local_data, remote_data):
    """A local service whose 'isric' endpoint is a second, in-process service."""
    from glosis_ld.query import FederationClient
    from glosis_ld.service import App

    remote = App(catalog=catalog, data=list(remote_data))
    local = App(catalog=catalog, data=list(local_data), federation=FederationClient({"isric": remote}))
    return local, remote


def rest_params(values: dict[str, str]) -> dict[str, list[str]]:
    return {k: [v] for k, v in values.items()}

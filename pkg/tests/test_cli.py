from __future__ import annotations

import csv
import io
import json
import shutil

import pytest

from conftest import MINI_DIR, fixture_path
from glosis_ld import SNIPPETS_DIR
from glosis_ld.cli import build_parser, main
from glosis_ld.rdf import QUDT, UNIT, isomorphic, parse_file, serialize_turtle
from glosis_ld.transform import codelist_csv_to_rdf, read_codelist_csv


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# -- parse ---------------------------------------------------------------------------------

def test_parse_counts_triples(capsys):
    path = fixture_path("lucas_26761786.ttl")
    code, out, _ = run(capsys, "parse", path)
    assert code == 0
    assert out.strip().endswith(f": {len(parse_file(path))} triples")


def test_parse_error_is_a_tool_failure(capsys, tmp_path):
    bad = tmp_path / "bad.ttl"
    bad.write_text("<urn:s> <urn:p> .\n")
    code, out, err = run(capsys, "parse", bad)
    assert code == 2 and out == ""
    assert "line 1" in err


def test_missing_file_is_a_tool_failure(capsys, tmp_path):
    code, _, err = run(capsys, "parse", tmp_path / "absent.ttl")
    assert code == 2 and "parse" in err


# -- validate ------------------------------------------------------------------------------

def test_validate_conforming_data(capsys):
    code, out, _ = run(capsys, "validate", fixture_path("lucas_26761786.ttl"), fixture_path("srdb_12211.ttl"))
    assert code == 0
    assert out.endswith("conforms\n") and not out.endswith("does not conform\n")


def test_validate_reports_errors_as_json(capsys, tmp_path):
    g = parse_file(fixture_path("lucas_26761786.ttl"))
    (t,) = g.match(None, QUDT.unit, UNIT.PH)
    g.remove(*t)
    g.add(t.s, t.p, UNIT.PERCENT)
    mutated = tmp_path / "mutated.ttl"
    mutated.write_text(serialize_turtle(g, g.prefixes))
    report_path = tmp_path / "report.json"
    code, out, _ = run(capsys, "validate", mutated, "--format", "json", "-o", report_path)
    assert code == 1 and out == ""
    doc = json.loads(report_path.read_text())
    assert doc["conforms"] is False
    assert [f["rule"] for f in doc["findings"] if f["severity"] == "Error"] == ["R4"]


def test_validate_strict_turns_warnings_into_errors(capsys, tmp_path):
    plot = tmp_path / "plot.ttl"
    plot.write_text("<http://example.org/p> a <http://w3id.org/glosis/model/siteplot/GL_Plot> .\n")
    assert run(capsys, "validate", plot)[0] == 0
    assert run(capsys, "validate", plot, "--strict")[0] == 1


# -- codelists -----------------------------------------------------------------------------

def test_codelist_import_then_export(capsys, tmp_path):
    ttl, back = tmp_path / "roots.ttl", tmp_path / "roots.csv"
    assert run(capsys, "codelist", "import", fixture_path("roots_abundance_codelist.csv"), "-o", ttl)[0] == 0
    rows = read_codelist_csv(fixture_path("roots_abundance_codelist.csv"))
    assert isomorphic(parse_file(ttl), codelist_csv_to_rdf(rows))
    assert run(capsys, "codelist", "export", ttl, "-o", back)[0] == 0
    assert read_codelist_csv(back) == rows


def test_codelist_export_to_stdout(capsys):
    code, out, _ = run(capsys, "codelist", "export", MINI_DIR / "codelists.ttl")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    notations = {r["notation"] for r in rows if r["scheme"].endswith("/physioChemicalPropertyCode")}
    assert {"pH", "Nittot"} <= notations


def test_codelist_export_of_the_listing_snippet(capsys):
    code, out, err = run(capsys, "codelist", "export", SNIPPETS_DIR / "roots_abundance_codelist.ttl")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 5
    assert rows[0]["notation"] == "N"
    # only N is described in the snippet; the other four members are flagged
    assert err.count("has no skos:notation") == 4


def test_codelist_export_without_codelists_fails(capsys):
    code, out, _ = run(capsys, "codelist", "export", fixture_path("wosis_profiles.ttl"))
    assert code == 1


# -- ingest --------------------------------------------------------------------------------

def test_ingest_writes_the_listing_triples(capsys, tmp_path):
    out_path = tmp_path / "lucas.ttl"
    code, _, err = run(capsys, "ingest", fixture_path("lucas_topsoil.csv"),
                       "--mapping", fixture_path("lucas_mapping.json"), "-o", out_path)
    assert code == 0 and err == ""
    graph = parse_file(out_path)
    assert all(t in graph for t in parse_file(fixture_path("lucas_26761786.ttl")))


def test_ingest_strict_fails_on_rejected_cells(capsys, tmp_path):
    table = fixture_path("lucas_topsoil.csv").read_text().replace("4.30", "abc")
    bad = tmp_path / "bad.csv"
    bad.write_text(table)
    args = ("ingest", bad, "--mapping", fixture_path("lucas_mapping.json"), "-o", tmp_path / "x.ttl")
    code, _, err = run(capsys, *args)
    assert code == 0 and "pH_CaCl2" in err
    assert run(capsys, *args, "--strict")[0] == 1


# -- query ---------------------------------------------------------------------------------

AVG = ("SELECT (AVG(?v) AS ?avg) WHERE { ?o sosa:usedProcedure g_pd:pHProcedure-pHCaCl2 ; "
       "sosa:hasResult/qudt:numericValue ?v }")


def test_query_inline_json(capsys):
    code, out, _ = run(capsys, "query", "--inline", AVG, "--data", fixture_path("lucas_26761786.ttl"))
    assert code == 0
    (binding,) = json.loads(out)["results"]["bindings"]
    assert float(binding["avg"]["value"]) == pytest.approx(4.30)


def test_query_file_csv(capsys, tmp_path):
    qfile = tmp_path / "q.rq"
    qfile.write_text(AVG)
    code, out, _ = run(capsys, "query", qfile, "--format", "csv", "--data", fixture_path("lucas_26761786.ttl"))
    assert code == 0
    assert out.splitlines()[0] == "avg"


def test_query_require_results(capsys):
    code, out, _ = run(capsys, "query", "--inline", "SELECT ?o WHERE { ?o sosa:usedProcedure g_pd:pHProcedure-pHH2O }",
                       "--data", fixture_path("lucas_26761786.ttl"), "--require-results")
    assert code == 1
    assert json.loads(out)["results"]["bindings"] == []


@pytest.mark.parametrize("extra", [
    (),  # neither a file nor --inline
    ("--inline", "SELECT ?s WHERE { ?s"),
    ("--inline", "CONSTRUCT { ?s ?p ?o } WHERE { ?s ?p ?o }"),
    ("--inline", "SELECT ?s WHERE { SERVICE <urn:glosis:endpoint:none> { ?s ?p ?o } }"),
    ("--inline", "SELECT ?s WHERE { ?s ?p ?o }", "--endpoint", "broken"),
])
def test_query_failures_exit_2(capsys, extra):
    code, out, err = run(capsys, "query", *extra)
    assert code == 2 and out == ""
    assert err.startswith("glosis-ld query:")


def test_query_lenient_service(capsys):
    code, out, _ = run(capsys, "query", "--inline",
                       "SELECT ?s WHERE { SERVICE <urn:glosis:endpoint:none> { ?s ?p ?o } }", "--lenient")
    assert code == 0 and json.loads(out)["results"]["bindings"] == []


def test_query_with_ontology(capsys):
    code, out, _ = run(capsys, "query", "--inline", "SELECT ?c WHERE { ?c a skos:ConceptScheme }",
                       "--ontology", MINI_DIR / "mini_glosis.manifest")
    assert code == 0 and json.loads(out)["results"]["bindings"]


# -- version and docgen --------------------------------------------------------------------

def test_version_bump(capsys, tmp_path):
    for name in ("codelists.ttl", "common.ttl", "procedure.ttl"):
        shutil.copy(MINI_DIR / name, tmp_path / name)
    code, out, _ = run(capsys, "version", "bump", "micro", "--modules", tmp_path)
    assert code == 0
    lines = sorted(out.splitlines())
    assert len(lines) == 3 and all(line.endswith("\t1.0.2") for line in lines)
    assert "1.0.2" in (tmp_path / "common.ttl").read_text()


def test_version_bump_rejects_unknown_part(capsys, tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["version", "bump", "nano", "--modules", str(tmp_path)])
    assert info.value.code == 2


def test_docgen_config(capsys, tmp_path):
    out_path = tmp_path / "config"
    assert run(capsys, "docgen-config", MINI_DIR / "codelists.ttl", "-o", out_path)[0] == 0
    keys = [line.split("=", 1)[0].strip() for line in out_path.read_text().splitlines()]
    assert keys == ["title", "version", "authors", "authorsInstitution", "contributors",
                    "contributorsInstitution", "license"]


def test_docgen_config_needs_an_ontology(capsys):
    code, _, err = run(capsys, "docgen-config", SNIPPETS_DIR / "gl_plot.ttl")
    assert code == 2 and "owl:Ontology" in err


# -- serve ---------------------------------------------------------------------------------

def test_serve_builds_the_app_from_config(capsys, tmp_path, monkeypatch):
    import glosis_ld.service as service

    seen = {}
    monkeypatch.setattr(service, "serve", lambda app: seen.setdefault("app", app))
    config = tmp_path / "service.yaml"
    config.write_text(f"data: [{fixture_path('lucas_26761786.ttl')}]\nport: 9001\n")
    assert run(capsys, "serve", "--config", config, "--port", "9100")[0] == 0
    app = seen["app"]
    assert app.config.port == 9100
    assert len(app.snapshot.data) == len(parse_file(fixture_path("lucas_26761786.ttl")))


def test_serve_bad_config(capsys, tmp_path):
    config = tmp_path / "service.yaml"
    config.write_text("colour: blue\n")
    assert run(capsys, "serve", "--config", config)[0] == 2


# -- help ----------------------------------------------------------------------------------

def _subcommand_parsers():
    parser = build_parser()
    out = {}
    stack = [((), parser)]
    while stack:
        prefix, p = stack.pop()
        for action in p._actions:
            if action.__class__.__name__ == "_SubParsersAction":
                for name, child in action.choices.items():
                    stack.append((prefix + (name,), child))
        if prefix:
            out[prefix] = p
    return out


@pytest.mark.parametrize("path", sorted(_subcommand_parsers()), ids=" ".join)
def test_help_lists_every_flag(capsys, path):
    parser = _subcommand_parsers()[path]
    with pytest.raises(SystemExit) as info:
        main([*path, "--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    for action in parser._actions:
        for flag in action.option_strings:
            assert flag in out

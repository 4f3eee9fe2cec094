"""Command-line entry point.

Exit codes: 0 on success (or a conforming dataset), 1 when validation finds
errors or a required result is empty, 2 on usage errors and tool failures.
Machine-readable output goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import MINI_GLOSIS_MANIFEST, __version__
from .query import FederationClient, FederationError, run_query
from .rdf import Graph, merge, parse_file, serialize_turtle
from .schema import extract_metadata, load_catalog, load_manifest, metadata_config
from .transform import (
    codelist_csv_to_rdf, codelist_rdf_to_csv, ingest_csv,
    load_mapping, read_codelist_csv, read_table, write_codelist_csv,
)
from .transform.version import PARTS, bump_directory, ontology_iri
from .validate import ValidationConfig, validate_dataset

OK, FAILED, USAGE = 0, 1, 2
log = logging.getLogger("glosis_ld")


class ToolError(Exception):
    """A failure reported to the user as a one-line message with exit code 2."""


def _write(text: str, output: str | None) -> None:
    if output and output != "-":
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_graphs(paths: list[str]) -> Graph:
    return merge(parse_file(p) for p in paths)


# -- subcommands --------------------------------------------------------------------------

def cmd_parse(args: argparse.Namespace) -> int:
    graph = parse_file(args.file)
    print(f"{args.file}: {len(graph)} triples")
    return OK


def cmd_validate(args: argparse.Namespace) -> int:
    catalog = load_manifest(args.ontology)
    for warning in catalog.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    data = _load_graphs(args.data)
    report = validate_dataset(data, catalog, ValidationConfig(strict=args.strict))
    _write(report.to_json() + "\n" if args.format == "json" else report.to_text(), args.output)
    return OK if report.conforms else FAILED


def cmd_codelist_import(args: argparse.Namespace) -> int:
    graph = codelist_csv_to_rdf(read_codelist_csv(args.csv))
    _write(serialize_turtle(graph), args.output)
    return OK


def cmd_codelist_export(args: argparse.Namespace) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rows = codelist_rdf_to_csv(parse_file(args.ttl))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if args.output and args.output != "-":
        write_codelist_csv(rows, args.output)
    else:
        write_codelist_csv(rows, sys.stdout)
    return OK if rows else FAILED


def cmd_ingest(args: argparse.Namespace) -> int:
    mapping = load_mapping(args.mapping)
    findings = []
    graph = ingest_csv(read_table(args.csv), mapping, findings)
    for f in findings:
        print(f"{args.csv}: row {f.row}, column {f.column}: {f.message}", file=sys.stderr)
    _write(serialize_turtle(graph), args.output)
    return FAILED if findings and args.strict else OK


def _endpoint_registry(specs: list[str]) -> dict[str, str]:
    registry = {}
    for spec in specs:
        name, sep, url = spec.partition("=")
        if not sep or not name or not url:
            raise ToolError(f"--endpoint expects NAME=URL, got {spec!r}")
        registry[name] = url
    return registry


def cmd_query(args: argparse.Namespace) -> int:
    if (args.file is None) == (args.inline is None):
        raise ToolError("give either a query file or --inline QUERY")
    text = args.inline if args.inline is not None else Path(args.file).read_text(encoding="utf-8")
    graphs = [parse_file(p) for p in args.data]
    if args.ontology:
        graphs.append(load_manifest(args.ontology).graph)
    federation = FederationClient(_endpoint_registry(args.endpoint), lenient=args.lenient, timeout=args.timeout)
    table = run_query(merge(graphs), text, federation)
    if args.format == "csv":
        _write(table.to_csv(), args.output)
    else:
        _write(json.dumps(table.to_json(), indent=2) + "\n", args.output)
    return FAILED if args.require_results and not table.rows else OK


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import App, ServiceConfig, serve

    config = ServiceConfig.from_file(args.config) if args.config else ServiceConfig()
    if args.host:
        config.host = args.host
    if args.port is not None:
        config.port = args.port
    serve(App(config))
    return OK


def cmd_version_bump(args: argparse.Namespace) -> int:
    for path, version in bump_directory(args.modules, args.part).items():
        print(f"{path}\t{version}")
    return OK


def cmd_docgen_config(args: argparse.Namespace) -> int:
    graph = parse_file(args.module)
    iri = ontology_iri(graph)
    if iri is None:
        raise ToolError(f"{args.module} does not declare an owl:Ontology")
    record = extract_metadata(load_catalog([(iri, graph)]), iri)
    _write(metadata_config(record), args.output)
    return OK


# -- argument parsing -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glosis-ld", description="GloSIS soil linked-data toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("parse", help="check Turtle syntax and count triples")
    p.add_argument("file")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("validate", help="check a dataset against the ontology restrictions")
    p.add_argument("data", nargs="+", help="Turtle data files, merged before checking")
    p.add_argument("--ontology", default=str(MINI_GLOSIS_MANIFEST), help="module manifest (IRI<TAB>path lines)")
    p.add_argument("--strict", action="store_true", help="treat unknown-class findings as errors")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("-o", "--output", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("codelist", help="convert codelists between CSV and RDF")
    csub = p.add_subparsers(dest="action", required=True, metavar="ACTION")
    c = csub.add_parser("import", help="CSV rows to a Turtle codelist")
    c.add_argument("csv")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_codelist_import)
    c = csub.add_parser("export", help="Turtle codelists to CSV rows")
    c.add_argument("ttl")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_codelist_export)

    p = sub.add_parser("ingest", help="turn a survey table into GloSIS RDF")
    p.add_argument("csv")
    p.add_argument("--mapping", required=True, help="JSON mapping configuration")
    p.add_argument("-o", "--output")
    p.add_argument("--strict", action="store_true", help="exit 1 when any cell was rejected")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("query", help="run a SPARQL SELECT query over local data")
    p.add_argument("file", nargs="?", help="file holding the query")
    p.add_argument("--inline", metavar="QUERY", help="query text given on the command line")
    p.add_argument("--data", nargs="+", default=[], metavar="TTL", help="Turtle files to query")
    p.add_argument("--ontology", metavar="MANIFEST", help="also load these ontology modules")
    p.add_argument("--endpoint", action="append", default=[], metavar="NAME=URL",
                   help="register a SERVICE endpoint; repeatable")
    p.add_argument("--lenient", action="store_true", help="unreachable SERVICE endpoints yield no rows")
    p.add_argument("--timeout", type=float, default=30.0, help="SERVICE request timeout in seconds")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--require-results", action="store_true", help="exit 1 when the result is empty")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("serve", help="run the SPARQL, REST and ontology HTTP service")
    p.add_argument("--config", help="YAML service configuration")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("version", help="ontology module versioning")
    vsub = p.add_subparsers(dest="action", required=True, metavar="ACTION")
    v = vsub.add_parser("bump", help="raise the version of every module in a directory")
    v.add_argument("part", choices=PARTS)
    v.add_argument("--modules", required=True, help="directory of module Turtle files")
    v.set_defaults(func=cmd_version_bump)

    p = sub.add_parser("docgen-config", help="documentation metadata configuration for one module")
    p.add_argument("module", help="module Turtle file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_docgen_config)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ToolError, OSError, ValueError, FederationError) as exc:
        # parse, schema, codelist, mapping, version and query errors are all ValueErrors
        print(f"glosis-ld {args.command}: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Codelist CSV conversion, tabular ingestion and module version bumps."""

from .codelists import (
    CodelistError, CodelistRow, CodelistWarning, codelist_csv_to_rdf, codelist_rdf_to_csv, codelist_subgraph,
    read_codelist_csv, write_codelist_csv,
)
from .ingest import MappingConfig, MappingError, RowFinding, ingest_csv, load_mapping, read_table
from .version import VersionError, VersionSpec, bump_version, module_versions

__all__ = [
    "CodelistError", "CodelistRow", "CodelistWarning", "MappingConfig", "MappingError", "RowFinding",
    "VersionError", "VersionSpec", "bump_version", "codelist_csv_to_rdf", "codelist_rdf_to_csv",
    "codelist_subgraph", "ingest_csv", "load_mapping", "module_versions", "read_codelist_csv", "read_table",
    "write_codelist_csv",
]

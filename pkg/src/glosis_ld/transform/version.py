"""Semantic version bumps applied to a whole set of ontology modules at once."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from ..rdf import OWL, RDF, IRI, Graph, Literal, parse_file, serialize_turtle

PARTS = ("major", "minor", "micro")
_VERSION = re.compile(r"^v?(\d+)\.(\d+)\.(\d+)$")


class VersionError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class VersionSpec:
    major: int
    minor: int
    micro: int

    def __post_init__(self) -> None:
        if min(self.major, self.minor, self.micro) < 0:
            raise VersionError(f"negative version component in {self.major}.{self.minor}.{self.micro}")

    @classmethod
    def parse(cls, text: str) -> VersionSpec:
        m = _VERSION.match(text.strip())
        if not m:
            raise VersionError(f"{text!r} is not a MAJOR.MINOR.MICRO version")
        return cls(*(int(g) for g in m.groups()))

    def bump(self, part: str) -> VersionSpec:
        part = part.lower()
        if part == "major":
            return VersionSpec(self.major + 1, 0, 0)
        if part == "minor":
            return VersionSpec(self.major, self.minor + 1, 0)
        if part == "micro":
            return VersionSpec(self.major, self.minor, self.micro + 1)
        raise VersionError(f"unknown version part {part!r}; expected one of {PARTS}")

    def __str__(self) -> str:
        return f"{self.major}.{self.minor}.{self.micro}"


def module_versions(modules: list[tuple[IRI, Graph]]) -> dict[IRI, VersionSpec]:
    """The ``owl:versionInfo`` of each module, parsed."""
    out: dict[IRI, VersionSpec] = {}
    for iri, graph in modules:
        infos = [o for o in graph.objects(iri, OWL.versionInfo) if isinstance(o, Literal)]
        if len(infos) != 1:
            raise VersionError(f"module {iri.value} has {len(infos)} owl:versionInfo values, expected 1")
        out[iri] = VersionSpec.parse(infos[0].lexical)
    return out


def bump_version(modules: list[tuple[IRI, Graph]], part: str) -> list[tuple[IRI, Graph]]:
    """Return copies of ``modules`` moved to one common, bumped release.

    The new version is the bump of the highest version present, so a set
    whose modules had drifted apart is brought back in step. Only the
    ``owl:versionInfo`` and ``owl:versionIRI`` triples of each module change.
    """
    if not modules:
        return []
    current = module_versions(modules)
    target = max(current.values()).bump(part)
    updated: list[tuple[IRI, Graph]] = []
    for iri, graph in modules:
        g = graph.copy()
        for t in g.match(iri, OWL.versionInfo, None) + g.match(iri, OWL.versionIRI, None):
            g.remove(*t)
        g.add(iri, OWL.versionInfo, Literal(str(target)))
        g.add(iri, OWL.versionIRI, IRI(f"{iri.value}/{target}"))
        updated.append((iri, g))
    return updated


def ontology_iri(graph: Graph) -> IRI | None:
    """The single ``owl:Ontology`` subject declared in a module file, if any."""
    found = [s for s in graph.subjects(RDF.type, OWL.Ontology) if isinstance(s, IRI)]
    if len(found) > 1:
        raise VersionError(f"file declares several ontologies: {[s.value for s in found]}")
    return found[0] if found else None


def bump_directory(directory: str | Path, part: str) -> dict[Path, VersionSpec]:
    """Bump every Turtle file in ``directory`` that declares an ontology.

    Files are rewritten through the serializer; comments are not preserved.
    Returns the new version per rewritten file.
    """
    files: list[tuple[Path, IRI, Graph]] = []
    for path in sorted(Path(directory).glob("*.ttl")):
        graph = parse_file(path)
        iri = ontology_iri(graph)
        if iri is not None:
            files.append((path, iri, graph))
    if not files:
        raise VersionError(f"no ontology modules found in {directory}")
    updated = bump_version([(iri, g) for _, iri, g in files], part)
    result: dict[Path, VersionSpec] = {}
    for (path, _, _), (iri, graph) in zip(files, updated):
        path.write_text(serialize_turtle(graph), encoding="utf-8")
        result[path] = module_versions([(iri, graph)])[iri]
    return result

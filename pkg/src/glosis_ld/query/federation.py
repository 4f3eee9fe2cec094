"""SERVICE dispatch: a registry of named endpoints, reachable in-process or
over the SPARQL protocol."""

from __future__ import annotations

import json
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from typing import Protocol

from .results import SolutionTable

ENDPOINT_URN = "urn:glosis:endpoint:"
RESULTS_JSON = "application/sparql-results+json"


class FederationError(RuntimeError):
    """A SERVICE endpoint could not be reached or returned an unusable answer."""

    def __init__(self, endpoint: str, reason: str) -> None:
        super().__init__(f"SERVICE <{endpoint}> failed: {reason}")
        self.endpoint = endpoint
        self.reason = reason


class Endpoint(Protocol):
    def select(self, query_text: str) -> SolutionTable: ...


@dataclass
class LocalEndpoint:
    """Answers SERVICE calls from an in-memory graph, as a remote store would."""

    graph: object
    federation: FederationClient | None = None

    def select(self, query_text: str) -> SolutionTable:
        from .evaluate import evaluate
        from .parser import parse_query

        return evaluate(self.graph, parse_query(query_text), self.federation)


@dataclass
class HttpEndpoint:
    url: str
    timeout: float = 30.0

    def select(self, query_text: str) -> SolutionTable:
        body = urllib.parse.urlencode({"query": query_text}).encode("utf-8")
        request = urllib.request.Request(
            self.url,
            data=body,
            headers={"Accept": RESULTS_JSON, "Content-Type": "application/x-www-form-urlencoded"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                payload = response.read().decode("utf-8")
        except urllib.error.HTTPError as exc:
            raise FederationError(self.url, f"HTTP {exc.code}") from None
        except (urllib.error.URLError, OSError) as exc:
            raise FederationError(self.url, str(getattr(exc, "reason", exc))) from None
        try:
            return SolutionTable.from_json(json.loads(payload))
        except ValueError as exc:
            raise FederationError(self.url, f"bad results document: {exc}") from None


@dataclass
class FederationClient:
    """Resolves SERVICE IRIs to endpoints.

    ``registry`` maps a name or an IRI to an endpoint object or a URL. A
    SERVICE IRI is looked up verbatim first, then ``urn:glosis:endpoint:NAME``
    by name; unregistered http(s) IRIs are contacted directly unless
    ``allow_direct`` is off. With ``lenient`` set, a failing endpoint yields no
    solutions instead of an error.
    """

    registry: dict[str, Endpoint | str] = field(default_factory=dict)
    lenient: bool = False
    allow_direct: bool = True
    timeout: float = 30.0

    def register(self, name: str, endpoint: Endpoint | str) -> None:
        self.registry[name] = endpoint

    def resolve(self, iri: str) -> Endpoint:
        target = self.registry.get(iri)
        if target is None and iri.startswith(ENDPOINT_URN):
            target = self.registry.get(iri[len(ENDPOINT_URN):])
        if target is None:
            if self.allow_direct and iri.startswith(("http://", "https://")):
                target = iri
            else:
                raise FederationError(iri, "no such endpoint registered")
        if isinstance(target, str):
            return HttpEndpoint(target, self.timeout)
        return target

    def select(self, iri: str, query_text: str) -> SolutionTable:
        try:
            return self.resolve(iri).select(query_text)
        except FederationError:
            if self.lenient:
                return SolutionTable(())
            raise
        except Exception as exc:  # an in-process endpoint failing is still a remote failure
            if self.lenient:
                return SolutionTable(())
            raise FederationError(iri, f"{type(exc).__name__}: {exc}") from exc

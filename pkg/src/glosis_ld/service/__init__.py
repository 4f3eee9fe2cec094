"""HTTP layer: SPARQL endpoint, template-driven REST methods and ontology documents."""

from .app import App, ConfigError, Response, ServiceConfig, Snapshot, row_objects
from .server import make_server, serve, serve_in_thread
from .templates import (
    ParamContext, ParameterError, ParamSpec, QueryTemplate, TemplateError, load_templates, parse_template,
    placeholders, substitute,
)

__all__ = [
    "App", "ConfigError", "ParamContext", "ParamSpec", "ParameterError", "QueryTemplate", "Response",
    "ServiceConfig", "Snapshot", "TemplateError", "load_templates", "make_server", "parse_template",
    "placeholders", "row_objects", "serve", "serve_in_thread", "substitute",
]

"""A SPARQL SELECT subset: parser, evaluator, property paths and federation."""

from .ast import SelectQuery, Var, ast_shape, group_as_select, to_sparql
from .evaluate import evaluate, join, run_query
from .federation import ENDPOINT_URN, FederationClient, FederationError, HttpEndpoint, LocalEndpoint
from .functions import ExpressionError
from .parser import DEFAULT_QUERY_PREFIXES, QuerySyntaxError, UnsupportedFeatureError, parse_query
from .paths import eval_path, eval_path_inverse, path_pairs
from .results import SolutionTable, term_from_json, term_to_json

__all__ = [
    "DEFAULT_QUERY_PREFIXES", "ENDPOINT_URN", "ExpressionError", "FederationClient", "FederationError",
    "HttpEndpoint", "LocalEndpoint", "QuerySyntaxError", "SelectQuery", "SolutionTable",
    "UnsupportedFeatureError", "Var", "ast_shape", "eval_path", "eval_path_inverse", "evaluate",
    "group_as_select", "join", "parse_query", "path_pairs", "run_query", "term_from_json", "term_to_json",
    "to_sparql",
]

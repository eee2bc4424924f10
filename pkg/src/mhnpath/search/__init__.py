from .tree import Prioritizers, SearchConfig, SearchEdge, SearchNode, Services
from .run import run_search, expand
from .routes import Route, extract_routes
from .io import (
    FormatError,
    deserialize_tree,
    serialize_tree,
    write_dot,
    write_expansion_log,
)

__all__ = [
    "FormatError",
    "Prioritizers",
    "Route",
    "SearchConfig",
    "SearchEdge",
    "SearchNode",
    "Services",
    "deserialize_tree",
    "expand",
    "extract_routes",
    "run_search",
    "serialize_tree",
    "write_dot",
    "write_expansion_log",
]

"""semviz: register markup templates against ontology elements and render
any semantic data source through them, over HTTP or from the command line."""

__version__ = "0.1.0"

from .rdf import Graph, PrefixRegistry, Term, Triple, parse_graph, serialize_graph  # noqa: F401
from .refs import ElementRef, parse_element_ref, resolve  # noqa: F401

"""Offline data pipeline feeding the mhnpath engine.

Converts public atom-mapped reaction corpora and vendor/toxicity dumps into
the engine's TSV/CSV formats. Talks to the engine only through its
command-line interface and file formats.
"""

__version__ = "0.1.0"

from .reactions import CleanStats, clean_reactions
from .library import build_template_library
from .catalog import build_catalog, build_toxdb
from .manifest import write_manifest

__all__ = [
    "CleanStats",
    "build_catalog",
    "build_template_library",
    "build_toxdb",
    "clean_reactions",
    "write_manifest",
    "__version__",
]

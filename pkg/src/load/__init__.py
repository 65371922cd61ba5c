"""Loading datasets and querying the catalog."""

from .info import (
    available,
    cached,
    clear_cache,
    dependencies,
    info_header,
    info_schemes,
    info_tables,
    latest_version,
    repository,
    search_by_scheme,
    versions,
)
from .loader import LoadedDataset, LoadError, LoadRequest, load

__all__ = [
    "LoadError",
    "LoadRequest",
    "LoadedDataset",
    "available",
    "cached",
    "clear_cache",
    "dependencies",
    "info_header",
    "info_schemes",
    "info_tables",
    "latest_version",
    "load",
    "repository",
    "search_by_scheme",
    "versions",
]

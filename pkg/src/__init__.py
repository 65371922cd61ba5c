"""audvault: versioned audio datasets with incremental publishing and a local cache."""

from .audio import Flavour
from .backend import Repository, register_backend
from .config import Config, load_config
from .core import Column, Database, Header, Index, Scheme, Table, filewise_index, segmented_index
from .dependency import DependencyTable
from .errors import AudvaultError
from .load import (
    LoadedDataset,
    LoadError,
    available,
    cached,
    clear_cache,
    dependencies,
    info_header,
    info_schemes,
    info_tables,
    latest_version,
    load,
    repository,
    search_by_scheme,
    versions,
)
from .publish import PublishError, load_to, publish, remove_media, unlock

__version__ = "0.1.0"

__all__ = [
    "AudvaultError",
    "Column",
    "Config",
    "Database",
    "DependencyTable",
    "Flavour",
    "Header",
    "Index",
    "LoadError",
    "LoadedDataset",
    "PublishError",
    "Repository",
    "Scheme",
    "Table",
    "available",
    "cached",
    "clear_cache",
    "dependencies",
    "filewise_index",
    "info_header",
    "info_schemes",
    "info_tables",
    "latest_version",
    "load",
    "load_config",
    "load_to",
    "publish",
    "register_backend",
    "remove_media",
    "repository",
    "search_by_scheme",
    "segmented_index",
    "unlock",
    "versions",
]

"""Dependency tables, change detection and version ordering."""

from .dependencies import (
    ATTACHMENT,
    DEPS_FILE,
    HEADER,
    MEDIA,
    TABLE,
    ZERO_DIGEST,
    ChangeSet,
    DepEntry,
    DependencyError,
    DependencyTable,
    EntryNotFoundError,
    apply,
    diff,
    parse_deps,
    serialize_deps,
)
from .digest import compute_digest, digest_file
from .version import latest, sort_versions, version_key

__all__ = [
    "ATTACHMENT",
    "DEPS_FILE",
    "HEADER",
    "MEDIA",
    "TABLE",
    "ZERO_DIGEST",
    "ChangeSet",
    "DepEntry",
    "DependencyError",
    "DependencyTable",
    "EntryNotFoundError",
    "apply",
    "compute_digest",
    "diff",
    "digest_file",
    "latest",
    "parse_deps",
    "serialize_deps",
    "sort_versions",
    "version_key",
]

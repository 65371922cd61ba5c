"""Catalog queries: available datasets, versions, headers and cache contents.

Header queries download only the header archive of a version.
"""

import logging
import tempfile
from pathlib import Path
from typing import List, Optional, Sequence, Union

import pandas as pd

from ..backend.archive import download_single
from ..backend.base import BackendError
from ..backend.registry import get_backend
from ..backend.repository import Repository, header_path, list_datasets, list_versions, resolve_repository
from ..cache.cache import Cache
from ..config import load_config
from ..core.database import HEADER_FILE
from ..core.header import Header, parse_header
from ..dependency.dependencies import DependencyTable
from ..publish.publisher import fetch_deps

logger = logging.getLogger(__name__)

AVAILABLE_COLUMNS = ["name", "version", "repository", "backend", "host"]
CACHED_COLUMNS = ["repository", "name", "version", "flavour_id", "path"]


def _repositories(repositories: Optional[Sequence[Repository]]) -> Sequence[Repository]:
    return load_config().repositories if repositories is None else repositories


def _cache(cache_root: Optional[Union[str, Path]]) -> Cache:
    return Cache(cache_root if cache_root is not None else load_config().cache_root)


# =============================================================================
# Versions
# =============================================================================

def available(
    repositories: Optional[Sequence[Repository]] = None,
    only_latest: bool = False,
) -> pd.DataFrame:
    """
    Published datasets of all repositories.

    Unreachable repositories are skipped with a warning.

    Args:
        repositories: Repositories to list (default: configured ones)
        only_latest: One row per dataset with its newest version

    Returns:
        DataFrame with columns name, version, repository, backend, host,
        sorted by name
    """
    rows = []
    for repository in _repositories(repositories):
        try:
            datasets = list_datasets(get_backend(repository))
        except BackendError as e:
            logger.warning(f"Skipping repository '{repository.name}': {e}")
            continue
        for name, versions in datasets.items():
            for version in versions[-1:] if only_latest else versions:
                rows.append([name, version, repository.name, repository.backend, repository.host])

    if only_latest:
        # A dataset in several repositories is listed from the first one
        first = {}
        for row in rows:
            first.setdefault(row[0], row)
        rows = list(first.values())
    rows.sort(key=lambda row: row[0])
    return pd.DataFrame(rows, columns=AVAILABLE_COLUMNS)


def versions(name: str, repositories: Optional[Sequence[Repository]] = None) -> List[str]:
    """
    Complete versions of a dataset in the first repository holding it, ascending.

    Raises:
        BackendNotFoundError: If no repository holds the dataset
    """
    repository = resolve_repository(name, None, _repositories(repositories))
    return list_versions(get_backend(repository), name)


def latest_version(name: str, repositories: Optional[Sequence[Repository]] = None) -> str:
    """
    Newest complete version of a dataset.

    Raises:
        BackendNotFoundError: If no repository holds the dataset
    """
    return versions(name, repositories)[-1]


def repository(
    name: str,
    version: str,
    repositories: Optional[Sequence[Repository]] = None,
) -> Repository:
    """
    Repository that holds a dataset version.

    Raises:
        BackendNotFoundError: If no repository holds the version
    """
    return resolve_repository(name, version, _repositories(repositories))


# =============================================================================
# Header
# =============================================================================

def info_header(
    name: str,
    version: Optional[str] = None,
    repositories: Optional[Sequence[Repository]] = None,
) -> Header:
    """
    Header of a dataset version, fetched without tables or media.

    Args:
        name: Dataset name
        version: Version (default: latest)
        repositories: Repositories to search (default: configured ones)

    Returns:
        Header

    Raises:
        BackendNotFoundError: If the dataset or version does not exist
    """
    repositories = _repositories(repositories)
    repo = resolve_repository(name, version, repositories)
    backend = get_backend(repo)
    if version is None:
        version = list_versions(backend, name)[-1]
    with tempfile.TemporaryDirectory() as tmp:
        local = download_single(backend, header_path(name, version), Path(tmp) / HEADER_FILE)
        return parse_header(local.read_text(encoding="utf-8"))


def info_schemes(
    name: str,
    version: Optional[str] = None,
    repositories: Optional[Sequence[Repository]] = None,
) -> List[str]:
    """Scheme IDs declared by a dataset version."""
    return list(info_header(name, version, repositories).schemes)


def info_tables(
    name: str,
    version: Optional[str] = None,
    repositories: Optional[Sequence[Repository]] = None,
) -> List[str]:
    """Table IDs declared by a dataset version."""
    return list(info_header(name, version, repositories).tables)


def search_by_scheme(
    scheme_id: str,
    repositories: Optional[Sequence[Repository]] = None,
) -> List[str]:
    """Names of datasets whose latest version declares ``scheme_id``, sorted."""
    repositories = _repositories(repositories)
    names = []
    for row in available(repositories, only_latest=True).itertuples(index=False):
        try:
            header = info_header(row.name, row.version, repositories)
        except BackendError as e:
            logger.warning(f"Cannot read header of '{row.name}' {row.version}: {e}")
            continue
        if scheme_id in header.schemes:
            names.append(row.name)
    return sorted(names)


def dependencies(
    name: str,
    version: Optional[str] = None,
    repositories: Optional[Sequence[Repository]] = None,
) -> DependencyTable:
    """
    Dependency table of a dataset version.

    Raises:
        BackendNotFoundError: If the dataset or version does not exist
    """
    repositories = _repositories(repositories)
    repo = resolve_repository(name, version, repositories)
    backend = get_backend(repo)
    if version is None:
        version = list_versions(backend, name)[-1]
    return fetch_deps(backend, name, version)


# =============================================================================
# Cache
# =============================================================================

def cached(
    cache_root: Optional[Union[str, Path]] = None,
    name: Optional[str] = None,
) -> pd.DataFrame:
    """Completed cache keys as a DataFrame (repository, name, version, flavour_id, path)."""
    return pd.DataFrame(_cache(cache_root).cached(name), columns=CACHED_COLUMNS)


def clear_cache(
    cache_root: Optional[Union[str, Path]] = None,
    name: Optional[str] = None,
) -> int:
    """Delete cached datasets (all or one by name); return the number of removed folders."""
    count = _cache(cache_root).clear(name)
    logger.info(f"Cleared {count} cached dataset folder(s)")
    return count

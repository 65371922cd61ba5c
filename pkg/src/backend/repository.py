"""Repositories and the remote layout of published datasets."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from ..dependency.version import sort_versions
from .base import Backend, BackendError, BackendNotFoundError, UnknownBackendError
from .registry import get_backend, is_registered

logger = logging.getLogger(__name__)

DEPS_ARCHIVE = "db.deps.zip"
HEADER_ARCHIVE = "db.yaml.zip"
LOCK_MARKER = ".lock"


@dataclass(frozen=True)
class Repository:
    """Named storage location holding published datasets."""

    name: str
    host: str
    backend: str = "file-system"

    def __post_init__(self) -> None:
        if not self.name:
            raise BackendError("Repository name must not be empty")
        if not is_registered(self.backend):
            raise UnknownBackendError(f"Repository '{self.name}' uses unknown backend '{self.backend}'")

    def create_backend(self) -> Backend:
        return get_backend(self)

    def to_dict(self) -> Dict[str, str]:
        return {"name": self.name, "host": self.host, "backend": self.backend}


def deps_path(name: str, version: str) -> str:
    return f"{name}/{version}/{DEPS_ARCHIVE}"


def header_path(name: str, version: str) -> str:
    return f"{name}/{version}/{HEADER_ARCHIVE}"


def lock_path(name: str) -> str:
    return f"{name}/{LOCK_MARKER}"


def list_versions(backend: Backend, name: str) -> List[str]:
    """Complete versions of a dataset (those with a dependency table), ascending."""
    versions = []
    for path in backend.ls(name):
        parts = path.split("/")
        if len(parts) == 3 and parts[0] == name and parts[2] == DEPS_ARCHIVE:
            versions.append(parts[1])
    return sort_versions(versions)


def list_datasets(backend: Backend) -> Dict[str, List[str]]:
    """Complete versions per dataset name in one repository."""
    datasets: Dict[str, List[str]] = {}
    for path in backend.ls():
        parts = path.split("/")
        if len(parts) == 3 and parts[2] == DEPS_ARCHIVE:
            datasets.setdefault(parts[0], []).append(parts[1])
    return {name: sort_versions(versions) for name, versions in sorted(datasets.items())}


def version_exists(backend: Backend, name: str, version: str) -> bool:
    return backend.exists(deps_path(name, version))


def resolve_repository(
    name: str,
    version: Optional[str],
    repositories: Sequence[Repository],
) -> Repository:
    """
    First repository, in configuration order, that holds the dataset.

    Args:
        name: Dataset name
        version: Required version (None: any complete version)
        repositories: Configured repositories

    Returns:
        Repository

    Raises:
        BackendError: If no repository is configured
        BackendNotFoundError: If no repository holds the dataset (version)
    """
    if not repositories:
        raise BackendError("No repositories configured")

    for repository in repositories:
        backend = get_backend(repository)
        try:
            if version is None:
                found = bool(list_versions(backend, name))
            else:
                found = version_exists(backend, name, version)
        except BackendError as e:
            logger.warning(f"Skipping repository '{repository.name}': {e}")
            continue
        if found:
            logger.debug(f"Resolved '{name}' {version or ''} to repository '{repository.name}'")
            return repository

    what = f"'{name}' version {version}" if version else f"'{name}'"
    raise BackendNotFoundError(f"Dataset {what} not found in any repository")

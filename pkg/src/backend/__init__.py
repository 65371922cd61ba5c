"""Repositories, storage backends and archive handling."""

from .archive import ArchiveError, zip_create, zip_extract
from .base import (
    Backend,
    BackendError,
    BackendNotFoundError,
    BackendPath,
    DuplicateBackendError,
    UnknownBackendError,
)
from .filesystem import FileSystemBackend
from .registry import get_backend, register_backend, unregister_backend
from .repository import Repository, list_versions, resolve_repository

__all__ = [
    "ArchiveError",
    "Backend",
    "BackendError",
    "BackendNotFoundError",
    "BackendPath",
    "DuplicateBackendError",
    "FileSystemBackend",
    "Repository",
    "UnknownBackendError",
    "get_backend",
    "list_versions",
    "register_backend",
    "resolve_repository",
    "unregister_backend",
    "zip_create",
    "zip_extract",
]

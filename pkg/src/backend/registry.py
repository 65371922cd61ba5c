"""Backend registry: backend kinds map to factories."""

import logging
import threading
from typing import TYPE_CHECKING, Callable, Dict, List, Tuple

from .base import Backend, DuplicateBackendError, UnknownBackendError
from .filesystem import FileSystemBackend

if TYPE_CHECKING:
    from .repository import Repository

logger = logging.getLogger(__name__)

BackendFactory = Callable[[str, str], Backend]

_factories: Dict[str, BackendFactory] = {}
_instances: Dict[Tuple[str, str, str], Backend] = {}
_lock = threading.Lock()


def register_backend(kind: str, factory: BackendFactory) -> None:
    """
    Register a backend factory.

    Args:
        kind: Backend kind used in repository configurations
        factory: Callable ``(host, repository) -> Backend``

    Raises:
        DuplicateBackendError: If ``kind`` is already registered
    """
    with _lock:
        if kind in _factories:
            raise DuplicateBackendError(f"Backend '{kind}' is already registered")
        _factories[kind] = factory
    logger.debug(f"Registered backend '{kind}'")


def unregister_backend(kind: str) -> None:
    """Remove a backend kind and its cached instances."""
    with _lock:
        _factories.pop(kind, None)
        for key in [k for k in _instances if k[0] == kind]:
            del _instances[key]


def is_registered(kind: str) -> bool:
    return kind in _factories


def backend_kinds() -> List[str]:
    return sorted(_factories)


def get_backend(repository: "Repository") -> Backend:
    """
    Backend instance of a repository.

    Instances are shared per (kind, host, repository name), so call counters
    see every operation on that repository.

    Raises:
        UnknownBackendError: If the repository's backend kind is not registered
    """
    key = (repository.backend, repository.host, repository.name)
    with _lock:
        backend = _instances.get(key)
        if backend is not None:
            return backend
        factory = _factories.get(repository.backend)
        if factory is None:
            raise UnknownBackendError(
                f"Unknown backend '{repository.backend}', registered: {', '.join(sorted(_factories))}"
            )
        backend = factory(repository.host, repository.name)
        _instances[key] = backend
        return backend


def clear_instances() -> None:
    """Forget cached backend instances."""
    with _lock:
        _instances.clear()


register_backend(FileSystemBackend.kind, FileSystemBackend)

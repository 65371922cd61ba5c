"""Storage backend interface."""

import logging
import threading
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

from ..errors import AudvaultError

logger = logging.getLogger(__name__)


# =============================================================================
# Error Classes
# =============================================================================

class BackendError(AudvaultError):
    """Raised when a backend operation fails."""
    pass


class BackendNotFoundError(BackendError):
    """Raised when a remote object, dataset or version does not exist."""
    pass


class UnknownBackendError(BackendError):
    """Raised when no backend is registered under the requested kind."""
    pass


class DuplicateBackendError(BackendError):
    """Raised when a backend kind is registered twice."""
    pass


# =============================================================================
# Paths
# =============================================================================

@dataclass(frozen=True)
class BackendPath:
    """Path of an object below a repository, e.g. ``emodb/1.0.0/db.yaml.zip``."""

    segments: Tuple[str, ...]

    @classmethod
    def parse(cls, text: Union[str, "BackendPath"]) -> "BackendPath":
        """
        Split and validate a remote path.

        Raises:
            BackendError: If the path is empty, absolute or has empty or
                ``.``/``..`` segments
        """
        if isinstance(text, BackendPath):
            return text
        if not text or text.startswith("/") or "\\" in text:
            raise BackendError(f"Invalid backend path: {text!r}")
        segments = tuple(text.split("/"))
        if any(s in ("", ".", "..") for s in segments):
            raise BackendError(f"Invalid backend path: {text!r}")
        return cls(segments)

    @property
    def hidden(self) -> bool:
        return any(s.startswith(".") for s in self.segments)

    def __str__(self) -> str:
        return "/".join(self.segments)


RemotePath = Union[str, BackendPath]


# =============================================================================
# Backend
# =============================================================================

class Backend(ABC):
    """Object storage of one repository.

    Public methods validate remote paths and count calls per operation in
    ``calls`` before delegating to the ``_``-prefixed implementation.
    """

    kind = ""

    def __init__(self, host: str, repository: str):
        self.host = host
        self.repository = repository
        self.calls: Counter = Counter()
        self._calls_lock = threading.Lock()

    def __repr__(self) -> str:
        return f"{type(self).__name__}(host={self.host!r}, repository={self.repository!r})"

    def _count(self, operation: str) -> None:
        with self._calls_lock:
            self.calls[operation] += 1

    @property
    def total_calls(self) -> int:
        """Number of backend operations since the last reset."""
        return sum(self.calls.values())

    def reset_counters(self) -> None:
        with self._calls_lock:
            self.calls.clear()

    def put_file(self, local: Union[str, Path], remote: RemotePath) -> None:
        """
        Upload a local file; the remote object appears atomically.

        Raises:
            BackendError: If the local file is missing or the upload fails
        """
        path = BackendPath.parse(remote)
        self._count("put")
        local = Path(local)
        if not local.is_file():
            raise BackendError(f"Cannot upload missing file: {local}")
        self._put_file(local, path)
        logger.debug(f"Uploaded {local.name} to {self.repository}/{path}")

    def get_file(self, remote: RemotePath, local: Union[str, Path]) -> Path:
        """
        Download a remote object and verify its size.

        Raises:
            BackendNotFoundError: If the object does not exist
            BackendError: If the download is incomplete
        """
        path = BackendPath.parse(remote)
        self._count("get")
        local = Path(local)
        local.parent.mkdir(parents=True, exist_ok=True)
        expected = self._get_file(path, local)
        actual = local.stat().st_size
        if actual != expected:
            local.unlink()
            raise BackendError(f"Incomplete download of {path}: {actual} of {expected} bytes")
        return local

    def exists(self, remote: RemotePath) -> bool:
        path = BackendPath.parse(remote)
        self._count("exists")
        return self._exists(path)

    def ls(self, prefix: str = "") -> List[str]:
        """All visible object paths below ``prefix``, sorted."""
        if prefix:
            BackendPath.parse(prefix.rstrip("/"))
        self._count("ls")
        paths = (BackendPath.parse(p) for p in self._ls(prefix.rstrip("/")))
        return sorted(str(p) for p in paths if not p.hidden)

    def delete(self, remote: RemotePath) -> None:
        """
        Delete a remote object.

        Raises:
            BackendNotFoundError: If the object does not exist
        """
        path = BackendPath.parse(remote)
        self._count("delete")
        self._delete(path)

    def create_marker(self, remote: RemotePath, content: str = "") -> bool:
        """Create an object only if it does not exist yet; return whether it was created."""
        path = BackendPath.parse(remote)
        self._count("create_marker")
        return self._create_marker(path, content)

    @abstractmethod
    def _put_file(self, local: Path, path: BackendPath) -> None:
        ...

    @abstractmethod
    def _get_file(self, path: BackendPath, local: Path) -> int:
        """Download to ``local`` and return the size of the remote object."""

    @abstractmethod
    def _exists(self, path: BackendPath) -> bool:
        ...

    @abstractmethod
    def _ls(self, prefix: str) -> List[str]:
        ...

    @abstractmethod
    def _delete(self, path: BackendPath) -> None:
        ...

    @abstractmethod
    def _create_marker(self, path: BackendPath, content: str) -> bool:
        ...

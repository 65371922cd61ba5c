"""Repository stored in a local or mounted folder."""

import logging
import os
import shutil
import tempfile
from pathlib import Path
from typing import List

from .base import Backend, BackendError, BackendNotFoundError, BackendPath

logger = logging.getLogger(__name__)


class FileSystemBackend(Backend):
    """Backend that keeps objects as files below ``<host>/<repository>/``."""

    kind = "file-system"

    def __init__(self, host: str, repository: str):
        super().__init__(host, repository)
        self.root = Path(host).expanduser() / repository

    def _local(self, path: BackendPath) -> Path:
        return self.root.joinpath(*path.segments)

    def _put_file(self, local: Path, path: BackendPath) -> None:
        target = self._local(path)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=target.parent)
            os.close(fd)
            shutil.copyfile(local, tmp)
            os.replace(tmp, target)
        except OSError as e:
            raise BackendError(f"Failed to upload {path}: {e}") from e

    def _get_file(self, path: BackendPath, local: Path) -> int:
        source = self._local(path)
        if not source.is_file():
            raise BackendNotFoundError(f"Not found in repository '{self.repository}': {path}")
        try:
            size = source.stat().st_size
            fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=local.parent)
            os.close(fd)
            shutil.copyfile(source, tmp)
            os.replace(tmp, local)
        except OSError as e:
            raise BackendError(f"Failed to download {path}: {e}") from e
        return size

    def _exists(self, path: BackendPath) -> bool:
        return self._local(path).is_file()

    def _ls(self, prefix: str) -> List[str]:
        base = self.root.joinpath(*prefix.split("/")) if prefix else self.root
        if not base.is_dir():
            return []
        paths = []
        for dirpath, dirnames, filenames in os.walk(base):
            dirnames[:] = [d for d in dirnames if not d.startswith(".")]
            for name in filenames:
                if name.startswith("."):
                    continue
                paths.append(Path(dirpath, name).relative_to(self.root).as_posix())
        return paths

    def _delete(self, path: BackendPath) -> None:
        target = self._local(path)
        try:
            target.unlink()
        except FileNotFoundError:
            raise BackendNotFoundError(f"Not found in repository '{self.repository}': {path}") from None
        except OSError as e:
            raise BackendError(f"Failed to delete {path}: {e}") from e

    def _create_marker(self, path: BackendPath, content: str) -> bool:
        target = self._local(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(target, os.O_CREAT | os.O_EXCL | os.O_WRONLY, 0o644)
        except FileExistsError:
            return False
        except OSError as e:
            raise BackendError(f"Failed to create {path}: {e}") from e
        with os.fdopen(fd, "w") as f:
            f.write(content)
        return True

"""Exclusive per-key lock on a lock file."""

import fcntl
import logging
import os
import time
from pathlib import Path
from typing import IO, Optional, Union

from ..errors import AudvaultError

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 3600.0
STALE_AFTER = 3600.0
POLL_INTERVAL = 0.05


class CacheLockTimeout(AudvaultError):
    """Raised when a cache key stays locked longer than the timeout."""
    pass


class CacheLock:
    """Cross-process and cross-thread exclusive lock.

    The lock is an ``flock`` on ``path``; the file carries the holder's pid
    and a heartbeat timestamp. The kernel drops the lock when the holder
    dies, so a crashed load never blocks later ones.
    """

    def __init__(
        self,
        path: Union[str, Path],
        timeout: float = DEFAULT_TIMEOUT,
        poll_interval: float = POLL_INTERVAL,
    ):
        self.path = Path(path)
        self.timeout = timeout
        self.poll_interval = poll_interval
        self._file: Optional[IO[str]] = None

    @property
    def locked(self) -> bool:
        return self._file is not None

    def acquire(self) -> "CacheLock":
        """
        Block until the lock is held.

        Raises:
            CacheLockTimeout: If the lock is not acquired within ``timeout`` seconds
        """
        self.path.parent.mkdir(parents=True, exist_ok=True)
        f = self.path.open("a+", encoding="utf-8")
        deadline = time.monotonic() + self.timeout
        while True:
            try:
                fcntl.flock(f.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
                break
            except BlockingIOError:
                if time.monotonic() >= deadline:
                    f.close()
                    raise CacheLockTimeout(self._timeout_message()) from None
                time.sleep(self.poll_interval)
            except OSError:
                f.close()
                raise

        self._file = f
        self.heartbeat()
        logger.debug(f"Acquired lock {self.path}")
        return self

    def heartbeat(self) -> None:
        """Refresh the holder's timestamp."""
        if self._file is None:
            return
        self._file.seek(0)
        self._file.truncate()
        self._file.write(f"{os.getpid()} {time.time():.3f}\n")
        self._file.flush()

    def release(self) -> None:
        if self._file is None:
            return
        try:
            fcntl.flock(self._file.fileno(), fcntl.LOCK_UN)
        finally:
            self._file.close()
            self._file = None
        logger.debug(f"Released lock {self.path}")

    def _timeout_message(self) -> str:
        message = f"Timed out after {self.timeout:.0f}s waiting for {self.path}"
        try:
            pid, stamp = self.path.read_text(encoding="utf-8").split()
            age = time.time() - float(stamp)
        except (OSError, ValueError):
            return message
        if age > STALE_AFTER:
            logger.warning(f"Lock {self.path} held by pid {pid} has a stale heartbeat ({age:.0f}s)")
            return f"{message} (holder pid {pid}, heartbeat stale for {age:.0f}s)"
        return f"{message} (holder pid {pid})"

    def __enter__(self) -> "CacheLock":
        return self.acquire()

    def __exit__(self, *exc: object) -> None:
        self.release()

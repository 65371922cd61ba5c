"""Local dataset cache with per-key locking and cross-version reuse."""

from .cache import Cache, CacheKey, Manifest, default_cache_root
from .lock import CacheLock, CacheLockTimeout
from .snapshot import SNAPSHOT_FORMAT, read_snapshot, write_snapshot

__all__ = [
    "SNAPSHOT_FORMAT",
    "Cache",
    "CacheKey",
    "CacheLock",
    "CacheLockTimeout",
    "Manifest",
    "default_cache_root",
    "read_snapshot",
    "write_snapshot",
]

"""Local cache of materialized dataset versions.

Layout::

    <root>/<repository>/<name>/<version>/<flavour id>/
        db.yaml, db.deps.csv, db.<table>.csv, db.<table>.snapshot, media...
        .manifest.csv   path, source digest, stored digest
        .complete       written after every successful load
        .lock           per-key lock file
"""

import csv
import io
import logging
import os
import shutil
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Collection, Dict, List, Mapping, NamedTuple, Optional, Tuple, Union

from ..core.header import TableDecl
from ..core.scheme import Scheme
from ..core.table import Table, parse_table_csv
from ..dependency.digest import digest_file
from ..dependency.version import version_key
from .lock import DEFAULT_TIMEOUT, CacheLock
from .snapshot import SnapshotError, read_snapshot, snapshot_file, write_snapshot

logger = logging.getLogger(__name__)

CACHE_ROOT_ENV = "AUDVAULT_CACHE_ROOT"
DEFAULT_CACHE_ROOT = "~/.cache/audvault"

MANIFEST_FILE = ".manifest.csv"
COMPLETE_MARKER = ".complete"
LOCK_FILE = ".lock"

MANIFEST_COLUMNS = ("path", "source_digest", "digest")


def default_cache_root() -> Path:
    """Cache root from ``$AUDVAULT_CACHE_ROOT`` or ``~/.cache/audvault``."""
    return Path(os.environ.get(CACHE_ROOT_ENV) or DEFAULT_CACHE_ROOT).expanduser()


@dataclass(frozen=True)
class CacheKey:
    """Identifies one materialized (repository, dataset, version, flavour)."""

    repository: str
    name: str
    version: str
    flavour_id: str

    def folder(self, root: Union[str, Path]) -> Path:
        return Path(root) / self.repository / self.name / self.version / self.flavour_id


class ManifestRecord(NamedTuple):
    source_digest: str
    digest: str


class Manifest:
    """Thread-safe record of cached files and the digests they were verified against."""

    def __init__(self, path: Path):
        self.path = path
        self._records: Dict[str, ManifestRecord] = {}
        self._lock = threading.Lock()
        self._read()

    def _read(self) -> None:
        try:
            text = self.path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return
        reader = csv.reader(io.StringIO(text, newline=""))
        header = next(reader, None)
        if header is None or tuple(header) != MANIFEST_COLUMNS:
            logger.warning(f"Ignoring malformed cache manifest {self.path}")
            return
        for record in reader:
            if len(record) == 3:
                self._records[record[0]] = ManifestRecord(record[1], record[2])

    def get(self, path: str) -> Optional[ManifestRecord]:
        with self._lock:
            return self._records.get(path)

    def set(self, path: str, source_digest: str, digest: str) -> None:
        with self._lock:
            self._records[path] = ManifestRecord(source_digest, digest)

    def discard(self, path: str) -> None:
        with self._lock:
            self._records.pop(path, None)

    def save(self) -> None:
        """Write the manifest atomically."""
        with self._lock:
            rows = sorted(self._records.items())
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        for path, record in rows:
            writer.writerow([path, record.source_digest, record.digest])
        _atomic_write_text(self.path, buffer.getvalue())

    def __len__(self) -> int:
        return len(self._records)


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Cache:
    """Materialized dataset versions below a cache root."""

    def __init__(
        self,
        root: Optional[Union[str, Path]] = None,
        lock_timeout: float = DEFAULT_TIMEOUT,
        link: bool = False,
    ):
        """
        Initialize cache.

        Args:
            root: Cache root (default: ``default_cache_root()``)
            lock_timeout: Seconds to wait for a key lock
            link: Hard-link files reused from other versions instead of copying
                (experimental)
        """
        self.root = Path(root).expanduser() if root is not None else default_cache_root()
        self.lock_timeout = lock_timeout
        self.link = link

    def folder(self, key: CacheKey) -> Path:
        return key.folder(self.root)

    def lock(self, key: CacheKey) -> CacheLock:
        """Exclusive lock for materializing ``key``."""
        return CacheLock(self.folder(key) / LOCK_FILE, timeout=self.lock_timeout)

    def manifest(self, key: CacheKey) -> Manifest:
        return Manifest(self.folder(key) / MANIFEST_FILE)

    def is_complete(self, key: CacheKey) -> bool:
        return (self.folder(key) / COMPLETE_MARKER).exists()

    def mark_complete(self, key: CacheKey) -> None:
        _atomic_write_text(self.folder(key) / COMPLETE_MARKER, "")

    # -------------------------------------------------------------------------
    # Files
    # -------------------------------------------------------------------------

    def lookup(
        self,
        key: CacheKey,
        path: str,
        source_digest: str,
        manifest: Optional[Manifest] = None,
    ) -> Optional[Path]:
        """
        Cached file of ``path`` if it was stored for ``source_digest`` and is intact.

        Args:
            key: Cache key
            path: Path relative to the dataset root
            source_digest: Digest recorded for ``path`` in the dependency table
            manifest: Manifest of ``key`` (read from disk when omitted)

        Returns:
            Local file or None on a miss
        """
        local = self.folder(key) / path
        if not local.is_file():
            return None
        manifest = manifest if manifest is not None else self.manifest(key)
        record = manifest.get(path)
        if record is None or record.source_digest != source_digest:
            return None
        if digest_file(local) != record.digest:
            logger.debug(f"Cached {path} in {key.version}/{key.flavour_id} is corrupt")
            return None
        return local

    def store(
        self,
        key: CacheKey,
        path: str,
        source: Union[str, Path],
        source_digest: str,
        manifest: Manifest,
        move: bool = False,
        link: bool = False,
    ) -> Path:
        """
        Place a verified file under the key folder atomically.

        Args:
            key: Cache key
            path: Path relative to the dataset root
            source: File to store
            source_digest: Digest of the raw content in the dependency table
            manifest: Manifest of ``key``; updated but not saved
            move: Move ``source`` instead of copying it
            link: Hard-link ``source`` instead of copying it

        Returns:
            Stored file
        """
        target = self.folder(key) / path
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=target.parent)
        os.close(fd)
        try:
            if move:
                os.replace(source, tmp)
            elif link:
                os.unlink(tmp)
                os.link(source, tmp)
            else:
                shutil.copyfile(source, tmp)
            digest = digest_file(tmp)
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        manifest.set(path, source_digest, digest)
        return target

    def siblings(self, key: CacheKey) -> List[Tuple[CacheKey, Manifest]]:
        """
        Other cached versions of the same dataset and flavour with their
        manifests, newest version first.

        Read once per materialization and pass to ``sibling_sources``.
        """
        dataset_folder = self.root / key.repository / key.name
        if not dataset_folder.is_dir():
            return []
        versions = [
            entry.name for entry in dataset_folder.iterdir()
            if entry.is_dir() and entry.name != key.version and (entry / key.flavour_id).is_dir()
        ]
        others = [
            CacheKey(key.repository, key.name, version, key.flavour_id)
            for version in sorted(versions, key=version_key, reverse=True)
        ]
        return [(other, self.manifest(other)) for other in others]

    def sibling_sources(
        self,
        key: CacheKey,
        path: str,
        source_digest: str,
        siblings: Optional[List[Tuple[CacheKey, Manifest]]] = None,
    ) -> List[Tuple[CacheKey, Path]]:
        """
        Other cached versions of the same dataset and flavour holding ``path``
        with the same raw digest, newest version first.

        Args:
            key: Cache key being materialized
            path: Path relative to the dataset root
            source_digest: Digest recorded for ``path`` in the dependency table
            siblings: Result of ``siblings(key)`` (read from disk when omitted)
        """
        if siblings is None:
            siblings = self.siblings(key)
        sources = []
        for other, manifest in siblings:
            local = self.lookup(other, path, source_digest, manifest)
            if local is not None:
                sources.append((other, local))
        return sources

    def copy_from_sibling(
        self,
        key: CacheKey,
        path: str,
        source_digest: str,
        manifest: Manifest,
        siblings: Optional[List[Tuple[CacheKey, Manifest]]] = None,
    ) -> Optional[Path]:
        """Reuse ``path`` from another cached version; None when no sibling holds it."""
        for other, local in self.sibling_sources(key, path, source_digest, siblings):
            try:
                stored = self.store(key, path, local, source_digest, manifest, link=self.link)
            except OSError as e:
                logger.debug(f"Cannot reuse {path} from {other.version}: {e}")
                continue
            logger.debug(f"Reused {path} from version {other.version}")
            return stored
        return None

    # -------------------------------------------------------------------------
    # Tables
    # -------------------------------------------------------------------------

    def load_snapshot(
        self,
        key: CacheKey,
        table_id: str,
        decl: TableDecl,
        schemes: Mapping[str, Scheme],
        source_digest: Optional[str] = None,
        misc_labels: Optional[Mapping[str, Collection[Any]]] = None,
    ) -> Table:
        """
        Read a cached table, preferring its snapshot.

        A missing, corrupt or outdated snapshot falls back to parsing the CSV,
        after which the snapshot is rewritten.
        """
        folder = self.folder(key)
        snapshot = folder / snapshot_file(table_id)
        try:
            return read_snapshot(snapshot, schemes, source_digest)
        except SnapshotError as e:
            logger.debug(f"Falling back to CSV for table '{table_id}': {e}")

        csv_path = folder / f"db.{table_id}.csv"
        table = parse_table_csv(csv_path.read_text(encoding="utf-8"), table_id, decl, schemes, misc_labels)
        try:
            write_snapshot(table, snapshot, source_digest)
        except OSError as e:
            logger.warning(f"Cannot write snapshot for table '{table_id}': {e}")
        return table

    # -------------------------------------------------------------------------
    # Maintenance
    # -------------------------------------------------------------------------

    def cached(self, name: Optional[str] = None) -> List[Dict[str, Any]]:
        """Completed cache keys, optionally of one dataset."""
        keys = []
        for marker in sorted(self.root.glob(f"*/{name or '*'}/*/*/{COMPLETE_MARKER}")):
            folder = marker.parent
            key = CacheKey(folder.parents[2].name, folder.parents[1].name, folder.parent.name, folder.name)
            keys.append({
                "repository": key.repository,
                "name": key.name,
                "version": key.version,
                "flavour_id": key.flavour_id,
                "path": str(folder),
            })
        keys.sort(key=lambda k: (k["repository"], k["name"], version_key(k["version"]), k["flavour_id"]))
        return keys

    def complete_keys(self, name: str, flavour_id: str, version: Optional[str] = None) -> List[CacheKey]:
        """Completed keys of a dataset and flavour, newest version first."""
        keys = [
            CacheKey(k["repository"], k["name"], k["version"], k["flavour_id"])
            for k in self.cached(name)
            if k["flavour_id"] == flavour_id and (version is None or k["version"] == version)
        ]
        return sorted(keys, key=lambda k: version_key(k.version), reverse=True)

    def clear(self, name: Optional[str] = None) -> int:
        """Delete cached datasets (all or one by name); return the number of removed folders."""
        if not self.root.exists():
            return 0
        if name is None:
            folders = [p for p in self.root.iterdir() if p.is_dir()]
        else:
            folders = [p for p in self.root.glob(f"*/{name}") if p.is_dir()]
        for folder in folders:
            shutil.rmtree(folder)
            logger.info(f"Removed {folder}")
        return len(folders)

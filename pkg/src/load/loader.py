"""Loading dataset versions into the cache."""

import fnmatch
import logging
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from tqdm import tqdm

from ..audio.flavour import Flavour, convert
from ..backend.archive import download_single
from ..backend.base import Backend, BackendError
from ..backend.registry import get_backend
from ..backend.repository import Repository, deps_path, header_path, list_versions, resolve_repository
from ..cache.cache import Cache, CacheKey, Manifest
from ..cache.lock import DEFAULT_TIMEOUT
from ..config import load_config
from ..core.database import HEADER_FILE, Database, misc_labels, table_file
from ..core.header import Header, parse_header
from ..core.index import MISC
from ..core.table import Table
from ..dependency.dependencies import DEPS_FILE, DependencyTable, parse_deps
from ..dependency.digest import digest_file
from ..errors import AudvaultError

logger = logging.getLogger(__name__)

DEFAULT_NUM_WORKERS = 4


class LoadError(AudvaultError):
    """Raised when a load request cannot be satisfied."""
    pass


@dataclass(frozen=True)
class LoadRequest:
    """What to load: dataset version, flavour and table/media filters.

    Patterns are literal IDs or paths, or globs with ``*``.
    """

    name: str
    version: Optional[str] = None
    flavour: Flavour = field(default_factory=Flavour)
    tables: Optional[Tuple[str, ...]] = None
    media: Optional[Tuple[str, ...]] = None
    only_metadata: bool = False

    def __post_init__(self) -> None:
        for name in ("tables", "media"):
            value = getattr(self, name)
            if isinstance(value, str):
                object.__setattr__(self, name, (value,))
            elif value is not None:
                object.__setattr__(self, name, tuple(value))


@dataclass(frozen=True)
class LoadedDataset:
    """A loaded dataset version, materialized in a cache folder."""

    header: Header
    tables: Dict[str, Table]
    root: Path
    removed_media: List[str]
    deps: DependencyTable
    version: str
    repository: str
    database: Database = field(repr=False, compare=False)

    @property
    def name(self) -> str:
        return self.header.name

    @property
    def files(self) -> List[str]:
        """Media files referenced by the loaded tables."""
        return self.database.files

    def __getitem__(self, table_id: str) -> Table:
        return self.database[table_id]

    def __contains__(self, table_id: object) -> bool:
        return table_id in self.tables


# =============================================================================
# Pattern matching
# =============================================================================

def _matches(value: str, patterns: Sequence[str]) -> bool:
    return any(value == p or ("*" in p and fnmatch.fnmatchcase(value, p)) for p in patterns)


def select_tables(header: Header, patterns: Optional[Sequence[str]]) -> List[str]:
    """
    Table IDs to load: all, or those matching ``patterns``, plus every misc table.

    Raises:
        LoadError: If a pattern matches no table
    """
    if patterns is None:
        return list(header.tables)
    for pattern in patterns:
        if not any(_matches(tid, [pattern]) for tid in header.tables):
            raise LoadError(f"No table of '{header.name}' matches '{pattern}'")
    return [
        tid for tid, decl in header.tables.items()
        if decl.type == MISC or _matches(tid, patterns)
    ]


# =============================================================================
# Loader
# =============================================================================

class _Loader:
    """Materializes one request under one cache key."""

    def __init__(
        self,
        request: LoadRequest,
        cache: Cache,
        key: CacheKey,
        num_workers: int,
        verbose: bool,
    ):
        self.request = request
        self.cache = cache
        self.key = key
        self.folder = cache.folder(key)
        self.num_workers = num_workers
        self.verbose = verbose
        self.siblings: List[Tuple[CacheKey, Manifest]] = []

    # -------------------------------------------------------------------------
    # Cached pass
    # -------------------------------------------------------------------------

    def from_cache(self) -> Optional[LoadedDataset]:
        """Serve the request from the cache only, or return None."""
        if not self.cache.is_complete(self.key):
            return None
        header_file = self.folder / HEADER_FILE
        deps_file = self.folder / DEPS_FILE
        if not header_file.is_file() or not deps_file.is_file():
            return None

        header = parse_header(header_file.read_text(encoding="utf-8"))
        deps = parse_deps(deps_file.read_text(encoding="utf-8"), self.key.version)
        manifest = self.cache.manifest(self.key)

        table_ids = select_tables(header, self.request.tables)
        for table_id in table_ids:
            path = table_file(table_id)
            if path not in deps or self.cache.lookup(self.key, path, deps.digest(path), manifest) is None:
                return None

        db = self._read_tables(header, deps, table_ids)
        db, media, removed = self._select_media(db, deps)
        if not self.request.only_metadata:
            for path in media:
                if self.cache.lookup(self.key, path, deps.digest(path), manifest) is None:
                    return None

        logger.debug(f"Serving '{self.key.name}' {self.key.version} from cache")
        return self._result(header, db, deps, removed)

    def revalidate(self, backend: Backend) -> List[str]:
        """
        Drop media removed in the repository since the key was cached.

        Caller holds the key lock.

        Returns:
            Media paths newly flagged as removed
        """
        name, version = self.key.name, self.key.version
        deps_file = self.folder / DEPS_FILE
        if not deps_file.is_file():
            return []
        cached = parse_deps(deps_file.read_text(encoding="utf-8"), version)

        with tempfile.TemporaryDirectory(dir=self.folder, prefix=".fetch-") as tmp:
            remote_file = download_single(backend, deps_path(name, version), Path(tmp) / DEPS_FILE)
            remote = parse_deps(remote_file.read_text(encoding="utf-8"), version)
            newly = [p for p in remote.removed() if p in cached and not cached.is_removed(p)]
            if not newly:
                return []
            os.replace(remote_file, deps_file)

        manifest = self.cache.manifest(self.key)
        for path in newly:
            (self.folder / path).unlink(missing_ok=True)
            manifest.discard(path)
        manifest.save()
        logger.info(f"{len(newly)} media file(s) of '{name}' {version} were removed in the repository")
        return newly

    # -------------------------------------------------------------------------
    # Materialization
    # -------------------------------------------------------------------------

    def materialize(self, backend: Backend) -> LoadedDataset:
        """Fetch everything missing from the cache; caller holds the key lock."""
        name, version = self.key.name, self.key.version
        self.folder.mkdir(parents=True, exist_ok=True)
        manifest = self.cache.manifest(self.key)
        self.siblings = self.cache.siblings(self.key)

        try:
            download_single(backend, header_path(name, version), self.folder / HEADER_FILE)
            download_single(backend, deps_path(name, version), self.folder / DEPS_FILE)
            header = parse_header((self.folder / HEADER_FILE).read_text(encoding="utf-8"))
            deps = parse_deps((self.folder / DEPS_FILE).read_text(encoding="utf-8"), version)

            table_ids = select_tables(header, self.request.tables)
            for table_id in table_ids:
                path = table_file(table_id)
                if path not in deps:
                    raise LoadError(f"Table '{table_id}' has no dependency entry in {version}")
                self._fetch(backend, path, deps, manifest, convert_media=False)

            db = self._read_tables(header, deps, table_ids)
            db, media, removed = self._select_media(db, deps)

            if not self.request.only_metadata:
                pending = [p for p in media if self.cache.lookup(self.key, p, deps.digest(p), manifest) is None]
                self._fetch_all(backend, pending, deps, manifest)
        finally:
            manifest.save()

        self.cache.mark_complete(self.key)
        return self._result(header, db, deps, removed)

    def _fetch_all(
        self,
        backend: Backend,
        paths: List[str],
        deps: DependencyTable,
        manifest: Manifest,
    ) -> None:
        if not paths:
            return

        def fetch(path: str) -> None:
            self._fetch(backend, path, deps, manifest, convert_media=True)

        with ThreadPoolExecutor(max_workers=max(1, self.num_workers)) as executor:
            results = executor.map(fetch, paths)
            if self.verbose:
                results = tqdm(results, total=len(paths), desc=f"Load {self.key.name}", unit="file")
            for _ in results:
                pass

    def _fetch(
        self,
        backend: Backend,
        path: str,
        deps: DependencyTable,
        manifest: Manifest,
        convert_media: bool,
    ) -> None:
        """Bring one file into the key folder: cache, then sibling versions, then backend."""
        entry = deps.entry(path)
        if self.cache.lookup(self.key, path, entry.digest, manifest) is not None:
            return
        reused = self.cache.copy_from_sibling(self.key, path, entry.digest, manifest, self.siblings)
        if reused is not None:
            return

        with tempfile.TemporaryDirectory(dir=self.folder, prefix=".fetch-") as tmp:
            raw = download_single(backend, entry.backend_path(self.key.name), Path(tmp) / "raw")
            if digest_file(raw) != entry.digest:
                raise LoadError(f"Digest mismatch for {path} from version {entry.origin_version}")
            if convert_media and not self.request.flavour.is_raw:
                converted = Path(tmp) / f"converted.{self.request.flavour.format}"
                convert(raw, self.request.flavour, converted)
                raw = converted
            self.cache.store(self.key, path, raw, entry.digest, manifest, move=True)
        logger.debug(f"Downloaded {path} from version {entry.origin_version}")

    # -------------------------------------------------------------------------
    # Shared
    # -------------------------------------------------------------------------

    def _read_tables(self, header: Header, deps: DependencyTable, table_ids: List[str]) -> Database:
        ordered = sorted(table_ids, key=lambda tid: header.tables[tid].type != MISC)
        tables: Dict[str, Table] = {}
        for table_id in ordered:
            tables[table_id] = self.cache.load_snapshot(
                self.key,
                table_id,
                header.tables[table_id],
                header.schemes,
                deps.digest(table_file(table_id)),
                misc_labels(tables),
            )
        db = Database.__new__(Database)
        db.header = header
        db.tables = {tid: tables[tid] for tid in header.tables if tid in tables}
        for table in db.tables.values():
            table.database = db
        return db

    def _select_media(self, db: Database, deps: DependencyTable) -> Tuple[Database, List[str], List[str]]:
        """Apply the media filter; return filtered database, media to load and removed media."""
        files = db.files
        if self.request.media is not None:
            files = [f for f in files if _matches(f, self.request.media)]
            if not files:
                logger.warning(f"Media filter {list(self.request.media)} matches no file of '{db.name}'")
            db = db.filter_files(files)

        unknown = [f for f in files if f not in deps]
        if unknown:
            raise LoadError(f"Media without dependency entry: {', '.join(unknown[:5])}")
        removed = [f for f in files if deps.is_removed(f)]
        media = [f for f in files if not deps.is_removed(f)]
        return db, media, removed

    def _result(
        self,
        header: Header,
        db: Database,
        deps: DependencyTable,
        removed: List[str],
    ) -> LoadedDataset:
        if removed:
            logger.info(f"{len(removed)} media file(s) of '{header.name}' were removed and are skipped")
        return LoadedDataset(
            header=header,
            tables=dict(db.tables),
            root=self.folder,
            removed_media=removed,
            deps=deps,
            version=self.key.version,
            repository=self.key.repository,
            database=db,
        )


# =============================================================================
# Public API
# =============================================================================

def _resolve(
    name: str,
    version: Optional[str],
    repositories: Sequence[Repository],
) -> Tuple[Repository, str]:
    repository = resolve_repository(name, version, repositories)
    if version is None:
        version = list_versions(get_backend(repository), name)[-1]
    return repository, version


def _cached_keys(
    cache: Cache,
    request: LoadRequest,
    version: Optional[str],
    repositories: Sequence[Repository],
) -> List[CacheKey]:
    keys = cache.complete_keys(request.name, request.flavour.id, version)
    order = {r.name: i for i, r in enumerate(repositories)}
    return sorted(keys, key=lambda k: order.get(k.repository, len(order)))


def load(
    name: str,
    version: Optional[str] = None,
    *,
    flavour: Optional[Flavour] = None,
    bit_depth: Optional[int] = None,
    sampling_rate: Optional[int] = None,
    channels: Optional[Sequence[int]] = None,
    mixdown: bool = False,
    tables: Optional[Union[str, Sequence[str]]] = None,
    media: Optional[Union[str, Sequence[str]]] = None,
    only_metadata: bool = False,
    repositories: Optional[Sequence[Repository]] = None,
    cache_root: Optional[Union[str, Path]] = None,
    num_workers: Optional[int] = None,
    timeout: float = DEFAULT_TIMEOUT,
    link: bool = False,
    revalidate: bool = False,
    verbose: bool = False,
) -> LoadedDataset:
    """
    Load a dataset version into the cache.

    Files missing from the cache are copied from other cached versions when
    their digest matches, and downloaded otherwise. A request the cache can
    fully serve makes no backend calls.

    Args:
        name: Dataset name
        version: Version (default: latest)
        flavour: Media conversion target (alternative to the individual fields)
        bit_depth: Target bit depth
        sampling_rate: Target sampling rate in Hz
        channels: Channel selection (0-based)
        mixdown: Mix all channels to mono
        tables: Table IDs or ``*`` patterns to load (misc tables are always loaded)
        media: Media paths or ``*`` patterns to load
        only_metadata: Load header and tables only
        repositories: Repositories to search (default: configured ones)
        cache_root: Cache root (default: configured one)
        num_workers: Parallel downloads (default: configured value)
        timeout: Seconds to wait for a concurrent load of the same key
        link: Hard-link files reused from other cached versions (experimental)
        revalidate: Contact the repository even for a cached version and drop
            media removed there since it was cached
        verbose: Show a progress bar

    Returns:
        LoadedDataset

    Raises:
        LoadError: If a table pattern matches nothing or a download is corrupt
        BackendNotFoundError: If the dataset or version does not exist
    """
    if flavour is None:
        flavour = Flavour(
            bit_depth=bit_depth,
            sampling_rate=sampling_rate,
            channels=tuple(channels) if channels is not None else None,
            mixdown=mixdown,
        )
    request = LoadRequest(name, version, flavour, tables, media, only_metadata)  # type: ignore[arg-type]

    if repositories is None or cache_root is None or num_workers is None:
        config = load_config()
        repositories = config.repositories if repositories is None else repositories
        cache_root = config.cache_root if cache_root is None else cache_root
        num_workers = config.num_workers if num_workers is None else num_workers
    cache = Cache(cache_root, lock_timeout=timeout, link=link)

    if request.version is not None and not revalidate:
        for key in _cached_keys(cache, request, request.version, repositories):
            loaded = _Loader(request, cache, key, num_workers, verbose).from_cache()
            if loaded is not None:
                return loaded

    try:
        repository, version = _resolve(name, request.version, repositories)
    except BackendError:
        if request.version is not None:
            raise
        cached = _cached_keys(cache, request, None, repositories)
        if not cached:
            raise
        key = cached[0]
        logger.warning(f"No repository reachable for '{name}', using cached version {key.version}")
        loaded = _Loader(request, cache, key, num_workers, verbose).from_cache()
        if loaded is None:
            raise LoadError(f"Cached version {key.version} of '{name}' does not satisfy the request") from None
        return loaded

    key = CacheKey(repository.name, name, version, flavour.id)
    loader = _Loader(request, cache, key, num_workers, verbose)
    if revalidate and cache.is_complete(key):
        with cache.lock(key):
            loader.revalidate(get_backend(repository))
    loaded = loader.from_cache()
    if loaded is not None:
        return loaded

    with cache.lock(key):
        loaded = loader.from_cache()
        if loaded is not None:
            return loaded
        logger.info(f"Loading '{name}' {version} ({flavour.id}) from '{repository.name}'")
        return loader.materialize(get_backend(repository))

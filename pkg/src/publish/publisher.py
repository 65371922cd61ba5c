"""Publishing dataset versions and removing media from all of them."""

import logging
import os
import socket
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from tqdm import tqdm

from ..audio.wavio import scan_media
from ..backend.archive import download_single, upload_archive, zip_placeholder
from ..backend.base import Backend, BackendNotFoundError
from ..backend.registry import get_backend
from ..backend.repository import (
    Repository,
    deps_path,
    header_path,
    list_versions,
    lock_path,
    resolve_repository,
    version_exists,
)
from ..core.database import HEADER_FILE, Database, table_file
from ..dependency.dependencies import (
    DEPS_FILE,
    MEDIA,
    TABLE,
    DependencyError,
    DependencyTable,
    apply,
    classify,
    diff,
    parse_deps,
    serialize_deps,
)
from ..dependency.digest import digest_file
from ..dependency.version import is_newer
from ..errors import AudvaultError

logger = logging.getLogger(__name__)

LATEST = "latest"
DEFAULT_NUM_WORKERS = 4


class PublishError(AudvaultError):
    """Raised when a version cannot be published or media cannot be removed."""
    pass


@dataclass
class PublishReport:
    """Outcome of a publish."""

    name: str
    version: str
    previous_version: Optional[str]
    uploaded_archives: List[str] = field(default_factory=list)
    reused: int = 0
    deleted: int = 0
    total_bytes_uploaded: int = 0

    @property
    def uploaded(self) -> int:
        return len(self.uploaded_archives)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["uploaded"] = self.uploaded
        return data


@dataclass
class RemovalReport:
    """Outcome of removing media from all versions."""

    name: str
    files: List[str]
    versions: List[str] = field(default_factory=list)
    placeholders: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# =============================================================================
# Helpers
# =============================================================================

def lock_holder(backend: Backend, name: str) -> Optional[str]:
    """Description of the writer holding the dataset lock, or None when unlocked.

    The lock marker holds ``<host> <pid> <unix time>``.
    """
    with tempfile.TemporaryDirectory() as tmp:
        try:
            local = backend.get_file(lock_path(name), Path(tmp) / "lock")
        except BackendNotFoundError:
            return None
        fields = local.read_text(encoding="utf-8").split()
    if len(fields) != 3 or not fields[2].isdigit():
        return "an unknown writer"
    host, pid, since = fields
    started = time.strftime("%Y-%m-%d %H:%M:%S UTC", time.gmtime(int(since)))
    return f"{host} (pid {pid}) since {started}"


@contextmanager
def dataset_lock(backend: Backend, name: str) -> Iterator[None]:
    """
    Exclusive writer lock on a dataset in a repository.

    A writer that crashed leaves the lock behind; ``unlock`` removes it.

    Raises:
        PublishError: If another writer holds the lock
    """
    marker = lock_path(name)
    holder = f"{socket.gethostname()} {os.getpid()} {time.time():.0f}"
    if not backend.create_marker(marker, holder):
        current = lock_holder(backend, name) or "another writer"
        raise PublishError(
            f"Dataset '{name}' is locked by {current} ({marker}); "
            f"if that publish or removal crashed, run 'audvault unlock {name}'"
        )
    try:
        yield
    finally:
        backend.delete(marker)


def unlock(name: str, repository: Repository) -> Optional[str]:
    """
    Remove a leftover writer lock of a dataset.

    Only use this when the holder is known to be gone; a running publish
    loses its exclusivity.

    Returns:
        Description of the removed holder, None if the dataset was not locked
    """
    backend = get_backend(repository)
    holder = lock_holder(backend, name)
    if holder is None:
        logger.info(f"Dataset '{name}' is not locked in '{repository.name}'")
        return None
    try:
        backend.delete(lock_path(name))
    except BackendNotFoundError:
        return None
    logger.warning(f"Removed lock of '{name}' in '{repository.name}' held by {holder}")
    return holder


def fetch_deps(backend: Backend, name: str, version: str) -> DependencyTable:
    """
    Download and parse the dependency table of a version.

    Raises:
        BackendNotFoundError: If the version does not exist
    """
    with tempfile.TemporaryDirectory() as tmp:
        local = download_single(backend, deps_path(name, version), Path(tmp) / DEPS_FILE)
        return parse_deps(local.read_text(encoding="utf-8"), version)


def _upload_deps(backend: Backend, name: str, deps: DependencyTable) -> int:
    with tempfile.TemporaryDirectory() as tmp:
        (Path(tmp) / DEPS_FILE).write_text(serialize_deps(deps), encoding="utf-8")
        return upload_archive(backend, deps_path(name, deps.version), [DEPS_FILE], tmp)


def _run_parallel(func, items: Sequence[Any], num_workers: int, verbose: bool, desc: str) -> List[Any]:  # type: ignore[no-untyped-def]
    if not items:
        return []
    with ThreadPoolExecutor(max_workers=max(1, num_workers)) as executor:
        results = executor.map(func, items)
        if verbose:
            results = tqdm(results, total=len(items), desc=desc, unit="file")
        return list(results)


# =============================================================================
# Publish
# =============================================================================

def publish(
    root: Union[str, Path],
    version: str,
    repository: Repository,
    previous_version: Optional[str] = LATEST,
    num_workers: int = DEFAULT_NUM_WORKERS,
    verbose: bool = False,
) -> PublishReport:
    """
    Publish a dataset folder as a new version.

    Every non-hidden file below ``root`` is published: header, tables, media
    and other files as attachments. Only files that are new or changed
    compared to the previous version are uploaded; the dependency table of
    the new version points unchanged files to the version they were
    uploaded with. The dependency table is uploaded last, so the version
    only becomes visible once it is complete.

    Args:
        root: Dataset folder with ``db.yaml``, table CSVs and media
        version: Version to publish
        repository: Target repository
        previous_version: Version to compare against; ``"latest"`` for the
            newest published version, None to publish from scratch
        num_workers: Parallel uploads
        verbose: Show a progress bar

    Returns:
        PublishReport

    Raises:
        PublishError: If the version exists, the previous version is missing,
            the version does not order after the previous one, referenced
            media are missing or not WAV files, or a table file is not declared
        FormatError: If the header or a table is invalid
    """
    root = Path(root)
    db = Database.from_root(root)
    name = db.name
    backend = get_backend(repository)

    with dataset_lock(backend, name):
        if version_exists(backend, name, version):
            raise PublishError(f"Version {version} of '{name}' already exists in '{repository.name}'")

        versions = list_versions(backend, name)
        if previous_version == LATEST:
            previous_version = versions[-1] if versions else None
        elif previous_version is not None and previous_version not in versions:
            raise PublishError(f"Previous version {previous_version} of '{name}' not found in '{repository.name}'")
        if previous_version is not None and not is_newer(version, previous_version):
            raise PublishError(f"Version {version} must be newer than previous version {previous_version}")

        previous = fetch_deps(backend, name, previous_version) if previous_version else None

        referenced = db.files
        not_media = [f for f in referenced if classify(f) != MEDIA]
        if not_media:
            preview = ", ".join(not_media[:5])
            raise PublishError(f"Referenced files must be WAV media ({len(not_media)}): {preview}")
        missing = [f for f in referenced if not (root / f).is_file()]
        carried = [f for f in missing if previous is not None and f in previous]
        unknown = sorted(set(missing) - set(carried))
        if unknown:
            preview = ", ".join(unknown[:5])
            raise PublishError(f"Missing referenced media ({len(unknown)}): {preview}")

        changes = diff(root, previous)
        undeclared = [
            f for f in changes.added + changes.modified + changes.unchanged
            if classify(f) == TABLE and f not in {table_file(t) for t in db.tables}
        ]
        if undeclared:
            raise PublishError(f"Table files not declared in {HEADER_FILE}: {', '.join(undeclared)}")
        carried_set = set(carried)
        changes.unchanged = sorted(changes.unchanged + [f for f in changes.deleted if f in carried_set])
        changes.deleted = [f for f in changes.deleted if f not in carried_set]
        logger.info(f"Publishing '{name}' {version} against {previous_version or 'nothing'}: {changes.summary()}")

        media_meta = {
            path: scan_media(root / path)
            for path in changes.changed
            if classify(path) == MEDIA
        }
        deps = apply(previous, changes, version, media_meta)

        uploads: Dict[str, str] = {}
        for path in changes.changed:
            if path == HEADER_FILE:
                continue
            remote = deps.entry(path).backend_path(name)
            if remote in uploads:
                logger.debug(f"Skipping {path}, same archive as {uploads[remote]}")
                continue
            uploads[remote] = path

        def upload(item: Tuple[str, str]) -> int:
            remote, path = item
            return upload_archive(backend, remote, [path], root)

        sizes = _run_parallel(upload, list(uploads.items()), num_workers, verbose, f"Upload {name}")
        total = sum(sizes)
        total += upload_archive(backend, header_path(name, version), [HEADER_FILE], root)
        total += _upload_deps(backend, name, deps)

    report = PublishReport(
        name=name,
        version=version,
        previous_version=previous_version,
        uploaded_archives=sorted(uploads) + [header_path(name, version), deps_path(name, version)],
        reused=len(changes.unchanged),
        deleted=len(changes.deleted),
        total_bytes_uploaded=total,
    )
    logger.info(f"Published '{name}' {version}: {report.uploaded} archives, {report.reused} reused")
    return report


# =============================================================================
# Load to folder
# =============================================================================

def load_to(
    root: Union[str, Path],
    name: str,
    version: str,
    repositories: Sequence[Repository],
    num_workers: int = DEFAULT_NUM_WORKERS,
    verbose: bool = False,
) -> Path:
    """
    Download a version in its original format into an editable folder.

    Files already present with the right digest are kept. Removed media are
    skipped.

    Args:
        root: Target folder
        name: Dataset name
        version: Version to download
        repositories: Repositories to search, in order
        num_workers: Parallel downloads
        verbose: Show a progress bar

    Returns:
        Path of the folder

    Raises:
        BackendNotFoundError: If the version does not exist
        DependencyError: If a downloaded file does not match its digest
    """
    root = Path(root)
    repository = resolve_repository(name, version, repositories)
    backend = get_backend(repository)
    deps = fetch_deps(backend, name, version)

    root.mkdir(parents=True, exist_ok=True)
    download_single(backend, header_path(name, version), root / HEADER_FILE)

    todo = []
    for entry in deps:
        if entry.removed or entry.file == HEADER_FILE:
            continue
        target = root / entry.file
        if target.is_file() and digest_file(target) == entry.digest:
            continue
        todo.append(entry)

    def fetch(entry):  # type: ignore[no-untyped-def]
        target = root / entry.file
        download_single(backend, entry.backend_path(name), target)
        if digest_file(target) != entry.digest:
            raise DependencyError(f"Digest mismatch for {entry.file} from version {entry.origin_version}")

    _run_parallel(fetch, todo, num_workers, verbose, f"Download {name}")
    logger.info(f"Loaded '{name}' {version} to {root} ({len(todo)} files downloaded)")
    return root


# =============================================================================
# Removal
# =============================================================================

def remove_media(name: str, files: Sequence[str], repository: Repository) -> RemovalReport:
    """
    Remove media files from every published version of a dataset.

    The media archives are replaced by empty placeholder archives and the
    entries are flagged removed in every version's dependency table. Header
    and tables stay untouched. Removing already removed files is a no-op.

    Raises:
        PublishError: If a file is unknown in all versions
        BackendNotFoundError: If the dataset does not exist
    """
    backend = get_backend(repository)
    files = sorted(set(files))
    report = RemovalReport(name=name, files=files)

    with dataset_lock(backend, name):
        versions = list_versions(backend, name)
        if not versions:
            raise BackendNotFoundError(f"Dataset '{name}' not found in '{repository.name}'")

        all_deps = {v: fetch_deps(backend, name, v) for v in versions}
        known = set()
        for deps in all_deps.values():
            known.update(f for f in files if f in deps and deps.entry(f).kind == MEDIA)
        unknown = [f for f in files if f not in known]
        if unknown:
            raise PublishError(f"Unknown media in all versions of '{name}': {', '.join(unknown)}")

        targets = set(files)
        keep_archives = {
            e.backend_path(name)
            for deps in all_deps.values()
            for e in deps
            if not e.removed and e.file not in targets
        }
        placeholders = set()
        for version, deps in all_deps.items():
            pending = [f for f in files if f in deps and not deps.is_removed(f)]
            if not pending:
                continue
            for path in pending:
                remote = deps.entry(path).backend_path(name)
                if remote in keep_archives:
                    logger.debug(f"Archive {remote} is shared with a kept file, not replaced")
                    continue
                placeholders.add(remote)
            _upload_deps(backend, name, deps.with_removed(pending))
            report.versions.append(version)

        with tempfile.TemporaryDirectory() as tmp:
            placeholder = zip_placeholder(Path(tmp) / "empty.zip")
            for remote in sorted(placeholders):
                backend.put_file(placeholder, remote)
        report.placeholders = sorted(placeholders)

    if report.versions:
        logger.info(f"Removed {len(files)} media file(s) of '{name}' from versions {', '.join(report.versions)}")
    else:
        logger.info(f"Media of '{name}' already removed, nothing to do")
    return report

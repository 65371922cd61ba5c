"""Dependency table: per-file digests, media properties and origin versions."""

import csv
import io
import logging
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Union

from ..core.database import HEADER_FILE
from ..core.duration import format_duration, parse_optional_duration
from ..core.index import validate_file_path
from ..errors import AudvaultError
from .digest import digest_file
from .version import version_le

logger = logging.getLogger(__name__)

DEPS_FILE = "db.deps.csv"
DEPS_ARCHIVE = "db.deps"

MEDIA = "media"
TABLE = "table"
HEADER = "header"
ATTACHMENT = "attachment"
ENTRY_KINDS = (MEDIA, TABLE, HEADER, ATTACHMENT)
MEDIA_SUFFIXES = (".wav",)

ZERO_DIGEST = "0" * 32

COLUMNS = (
    "file",
    "kind",
    "archive",
    "digest",
    "origin_version",
    "removed",
    "bit_depth",
    "channels",
    "sampling_rate",
    "duration",
    "format",
)

_TABLE_FILE = re.compile(r"^db\.(?P<table_id>[^/]+)\.csv$")
_DIGEST = re.compile(r"^[0-9a-f]{32}$")


# =============================================================================
# Error Classes
# =============================================================================

class DependencyError(AudvaultError):
    """Raised when a dependency table is malformed or inconsistent."""
    pass


class EntryNotFoundError(DependencyError, KeyError):
    """Raised when a path has no entry in the dependency table."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


# =============================================================================
# Entries
# =============================================================================

def classify(path: str) -> str:
    """Entry kind of a file inside a dataset root.

    WAV files are media; files that are neither header, table nor media are
    attachments.
    """
    if path == HEADER_FILE:
        return HEADER
    if _TABLE_FILE.match(path):
        return TABLE
    if Path(path).suffix.lower() in MEDIA_SUFFIXES:
        return MEDIA
    return ATTACHMENT


def archive_id(path: str, digest: str) -> str:
    """
    Archive ID of a file.

    The header lives in ``db.yaml``, tables in ``meta/<table id>``, media
    are content addressed as ``media/<xx>/<digest>`` and attachments as
    ``attachment/<xx>/<digest>``.
    """
    kind = classify(path)
    if kind == HEADER:
        return "db.yaml"
    if kind == TABLE:
        return f"meta/{_TABLE_FILE.match(path).group('table_id')}"  # type: ignore[union-attr]
    return f"{kind}/{digest[:2]}/{digest}"


@dataclass(frozen=True)
class DepEntry:
    """Dependency record of a single file."""

    file: str
    kind: str
    archive: str
    digest: str
    origin_version: str
    removed: bool = False
    bit_depth: Optional[int] = None
    channels: Optional[int] = None
    sampling_rate: Optional[int] = None
    duration: Optional[int] = None
    format: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ENTRY_KINDS:
            raise DependencyError(f"Entry '{self.file}' has unknown kind '{self.kind}'")
        violation = validate_file_path(self.file)
        if violation:
            raise DependencyError(f"Entry path invalid: {violation}")
        if not _DIGEST.match(self.digest):
            raise DependencyError(f"Entry '{self.file}' has malformed digest '{self.digest}'")
        if self.digest == ZERO_DIGEST and not self.removed:
            raise DependencyError(f"Entry '{self.file}' has a zero digest but is not removed")
        if self.kind != MEDIA and any(
            v is not None for v in (self.bit_depth, self.channels, self.sampling_rate, self.duration)
        ):
            raise DependencyError(f"Entry '{self.file}' is a {self.kind} and cannot carry media properties")

    def backend_path(self, name: str) -> str:
        """Location of the archive in a repository."""
        return f"{name}/{self.origin_version}/{self.archive}.zip"

    def to_dict(self) -> Dict[str, Any]:
        return {column: getattr(self, column) for column in COLUMNS}


@dataclass
class ChangeSet:
    """Classification of the files of a dataset root against a previous version."""

    added: List[str] = field(default_factory=list)
    modified: List[str] = field(default_factory=list)
    unchanged: List[str] = field(default_factory=list)
    deleted: List[str] = field(default_factory=list)
    digests: Dict[str, str] = field(default_factory=dict)

    @property
    def changed(self) -> List[str]:
        """Added and modified files, sorted."""
        return sorted(self.added + self.modified)

    def summary(self) -> str:
        return (
            f"{len(self.added)} added, {len(self.modified)} modified, "
            f"{len(self.unchanged)} unchanged, {len(self.deleted)} deleted"
        )


class DependencyTable:
    """Dependency records of one dataset version, keyed by path.

    Instances are treated as immutable values; operations return new tables.
    """

    def __init__(self, entries: Iterable[DepEntry], version: str):
        self.version = version
        self.entries: Dict[str, DepEntry] = {}
        for entry in entries:
            if entry.file in self.entries:
                raise DependencyError(f"Duplicate dependency entry: {entry.file}")
            if not version_le(entry.origin_version, version):
                raise DependencyError(
                    f"Entry '{entry.file}' has origin version {entry.origin_version} "
                    f"newer than {version}"
                )
            self.entries[entry.file] = entry
        self.entries = dict(sorted(self.entries.items()))

    def __contains__(self, path: object) -> bool:
        return path in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):  # type: ignore[no-untyped-def]
        return iter(self.entries.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DependencyTable):
            return NotImplemented
        return self.version == other.version and self.entries == other.entries

    def __repr__(self) -> str:
        return f"DependencyTable(version={self.version!r}, entries={len(self.entries)})"

    def entry(self, path: str) -> DepEntry:
        """
        Record of a path.

        Raises:
            EntryNotFoundError: If the path has no entry
        """
        try:
            return self.entries[path]
        except KeyError:
            raise EntryNotFoundError(f"No dependency entry for '{path}' in version {self.version}") from None

    @property
    def files(self) -> List[str]:
        return list(self.entries)

    def media(self) -> List[str]:
        """Media paths, removed ones included."""
        return [p for p, e in self.entries.items() if e.kind == MEDIA]

    def tables(self) -> List[str]:
        """Table file paths (``db.<id>.csv``)."""
        return [p for p, e in self.entries.items() if e.kind == TABLE]

    def table_ids(self) -> List[str]:
        return [_TABLE_FILE.match(p).group("table_id") for p in self.tables()]  # type: ignore[union-attr]

    def removed(self) -> List[str]:
        """Media paths flagged as removed."""
        return [p for p, e in self.entries.items() if e.removed]

    def origin_version(self, path: str) -> str:
        return self.entry(path).origin_version

    def sampling_rate(self, path: str) -> Optional[int]:
        return self.entry(path).sampling_rate

    def bit_depth(self, path: str) -> Optional[int]:
        return self.entry(path).bit_depth

    def channels(self, path: str) -> Optional[int]:
        return self.entry(path).channels

    def duration(self, path: str) -> Optional[int]:
        return self.entry(path).duration

    def digest(self, path: str) -> str:
        return self.entry(path).digest

    def archive(self, path: str) -> str:
        return self.entry(path).archive

    def is_removed(self, path: str) -> bool:
        return self.entry(path).removed

    def with_removed(self, paths: Iterable[str]) -> "DependencyTable":
        """Copy with ``paths`` flagged removed and their digests zeroed."""
        paths = set(paths)
        entries = [
            replace(e, removed=True, digest=ZERO_DIGEST) if e.file in paths else e
            for e in self.entries.values()
        ]
        return DependencyTable(entries, self.version)


# =============================================================================
# Diff and apply
# =============================================================================

def list_root_files(root: Union[str, Path]) -> List[str]:
    """Relative paths of all non-hidden files below ``root``."""
    root = Path(root)
    files = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = [d for d in dirnames if not d.startswith(".")]
        for name in filenames:
            if name.startswith("."):
                continue
            rel = Path(dirpath, name).relative_to(root).as_posix()
            if rel != DEPS_FILE:
                files.append(rel)
    return sorted(files)


def diff(
    root: Union[str, Path],
    previous: Optional[DependencyTable],
    files: Optional[Iterable[str]] = None,
) -> ChangeSet:
    """
    Classify the files of a dataset root against a previous dependency table.

    Args:
        root: Dataset folder containing ``db.yaml``
        previous: Dependency table of the previous version (None for first publish)
        files: Restrict classification to these relative paths
            (default: every non-hidden file below ``root``)

    Returns:
        ChangeSet with sorted, disjoint path lists and the digest of every
        present file

    Raises:
        DependencyError: If a file cannot be read
    """
    root = Path(root)
    present = sorted(set(files)) if files is not None else list_root_files(root)
    changes = ChangeSet()

    for path in present:
        try:
            digest = digest_file(root / path)
        except OSError as e:
            raise DependencyError(f"Cannot read {path}: {e}") from e
        changes.digests[path] = digest

        old = previous.entries.get(path) if previous is not None else None
        if old is None:
            changes.added.append(path)
        elif old.removed or old.digest != digest:
            changes.modified.append(path)
        else:
            changes.unchanged.append(path)

    if previous is not None:
        present_set = set(present)
        changes.deleted = [
            p for p, e in previous.entries.items() if not e.removed and p not in present_set
        ]

    logger.debug(f"Diff of {root}: {changes.summary()}")
    return changes


def _file_format(path: str) -> str:
    return Path(path).suffix.lower().lstrip(".")


def apply(
    previous: Optional[DependencyTable],
    changes: ChangeSet,
    new_version: str,
    media_meta: Optional[Mapping[str, Any]] = None,
) -> DependencyTable:
    """
    Build the dependency table of a new version.

    Args:
        previous: Dependency table the change set was computed against
        changes: Result of ``diff``
        new_version: Version being published
        media_meta: Per media path ``(bit_depth, channels, sampling_rate, duration)``
            for added and modified media

    Returns:
        New DependencyTable; unchanged entries keep their origin version,
        removed entries are carried forward

    Raises:
        DependencyError: If media properties are missing for a changed media file
    """
    media_meta = media_meta or {}
    entries: Dict[str, DepEntry] = {}

    for path in changes.unchanged:
        if previous is None or path not in previous:
            raise DependencyError(f"Unchanged file '{path}' has no previous entry")
        entries[path] = previous.entries[path]

    for path in changes.changed:
        digest = changes.digests[path]
        kind = classify(path)
        properties: Dict[str, Any] = {}
        if kind == MEDIA:
            if path not in media_meta:
                raise DependencyError(f"Missing media properties for '{path}'")
            bit_depth, channels, sampling_rate, duration = media_meta[path]
            properties = {
                "bit_depth": bit_depth,
                "channels": channels,
                "sampling_rate": sampling_rate,
                "duration": duration,
            }
        entries[path] = DepEntry(
            file=path,
            kind=kind,
            archive=archive_id(path, digest),
            digest=digest,
            origin_version=new_version,
            format=_file_format(path),
            **properties,
        )

    if previous is not None:
        for path, entry in previous.entries.items():
            if entry.removed and path not in entries:
                entries[path] = entry

    return DependencyTable(entries.values(), new_version)


# =============================================================================
# CSV
# =============================================================================

def _format_optional(value: Any) -> str:
    return "" if value is None else str(value)


def serialize_deps(deps: DependencyTable) -> str:
    """Serialize to CSV with a fixed column order and rows sorted by path."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    for path in sorted(deps.entries):
        e = deps.entries[path]
        writer.writerow([
            e.file,
            e.kind,
            e.archive,
            e.digest,
            e.origin_version,
            "True" if e.removed else "False",
            _format_optional(e.bit_depth),
            _format_optional(e.channels),
            _format_optional(e.sampling_rate),
            "" if e.duration is None else format_duration(e.duration),
            e.format,
        ])
    return buffer.getvalue()


def _optional_int(text: str) -> Optional[int]:
    return int(text) if text != "" else None


def parse_deps(text: str, version: str) -> DependencyTable:
    """
    Parse a ``db.deps.csv`` document.

    Args:
        text: CSV document
        version: Dataset version the document belongs to

    Returns:
        DependencyTable

    Raises:
        DependencyError: If the header row or a record is malformed
    """
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise DependencyError("Dependency table is empty, expected a header row")
    if tuple(header) != COLUMNS:
        raise DependencyError(f"Unexpected dependency columns: {header}")

    entries = []
    for line, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != len(COLUMNS):
            raise DependencyError(f"Malformed dependency row at line {line}: {record}")
        row = dict(zip(COLUMNS, record))
        if row["removed"] not in ("True", "False"):
            raise DependencyError(f"Malformed removed flag at line {line}: {row['removed']!r}")
        try:
            entries.append(DepEntry(
                file=row["file"],
                kind=row["kind"],
                archive=row["archive"],
                digest=row["digest"],
                origin_version=row["origin_version"],
                removed=row["removed"] == "True",
                bit_depth=_optional_int(row["bit_depth"]),
                channels=_optional_int(row["channels"]),
                sampling_rate=_optional_int(row["sampling_rate"]),
                duration=parse_optional_duration(row["duration"]),
                format=row["format"],
            ))
        except (ValueError, AudvaultError) as e:
            raise DependencyError(f"Malformed dependency row at line {line}: {e}") from e

    return DependencyTable(entries, version)

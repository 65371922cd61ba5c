"""Deterministic ZIP archives and their transfer to and from a backend."""

import logging
import os
import shutil
import tempfile
import zipfile
from pathlib import Path, PurePosixPath
from typing import List, Sequence, Union

from .base import Backend, BackendError, RemotePath

logger = logging.getLogger(__name__)

ZIP_DATE = (1980, 1, 1, 0, 0, 0)
FILE_MODE = 0o644


class ArchiveError(BackendError):
    """Raised when an archive is corrupt or has unsafe member paths."""
    pass


def zip_create(files: Sequence[str], root: Union[str, Path], out: Union[str, Path]) -> Path:
    """
    Create a reproducible archive.

    Members are stored uncompressed in sorted order with a fixed timestamp
    and fixed permissions, so equal content gives equal archive bytes.

    Args:
        files: Paths relative to ``root``
        root: Folder the paths are relative to
        out: Archive to write

    Returns:
        Path of the archive

    Raises:
        ArchiveError: If a file is missing
    """
    root = Path(root)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)

    try:
        with zipfile.ZipFile(out, "w", compression=zipfile.ZIP_STORED) as zf:
            for rel in sorted(set(files)):
                info = zipfile.ZipInfo(filename=rel, date_time=ZIP_DATE)
                info.compress_type = zipfile.ZIP_STORED
                info.create_system = 0
                info.external_attr = (FILE_MODE & 0xFFFF) << 16
                with open(root / rel, "rb") as src, zf.open(info, "w") as dst:
                    shutil.copyfileobj(src, dst, 1024 * 1024)
    except OSError as e:
        raise ArchiveError(f"Cannot create archive {out.name}: {e}") from e
    return out


def _check_member(name: str) -> None:
    path = PurePosixPath(name)
    if not name or name.startswith("/") or "\\" in name or (len(name) > 1 and name[1] == ":"):
        raise ArchiveError(f"Unsafe archive member: {name!r}")
    if any(part == ".." for part in path.parts):
        raise ArchiveError(f"Unsafe archive member: {name!r}")


def zip_extract(archive: Union[str, Path], dest: Union[str, Path]) -> List[str]:
    """
    Extract an archive after checking every member path.

    Args:
        archive: Archive to extract
        dest: Destination folder

    Returns:
        Extracted member paths (files only), sorted

    Raises:
        ArchiveError: If the archive is corrupt or a member path is absolute
            or contains ``..``
    """
    dest = Path(dest)
    try:
        with zipfile.ZipFile(archive) as zf:
            members = [m for m in zf.infolist() if not m.is_dir()]
            for member in members:
                _check_member(member.filename)
            for member in members:
                target = dest.joinpath(*PurePosixPath(member.filename).parts)
                target.parent.mkdir(parents=True, exist_ok=True)
                with zf.open(member) as src, open(target, "wb") as dst:
                    shutil.copyfileobj(src, dst, 1024 * 1024)
    except zipfile.BadZipFile as e:
        raise ArchiveError(f"Corrupt archive {Path(archive).name}: {e}") from e
    return sorted(m.filename for m in members)


def zip_placeholder(out: Union[str, Path]) -> Path:
    """Write an archive without members."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(out, "w", compression=zipfile.ZIP_STORED):
        pass
    return out


# =============================================================================
# Transfer
# =============================================================================

def upload_archive(
    backend: Backend,
    remote: RemotePath,
    files: Sequence[str],
    root: Union[str, Path],
) -> int:
    """Zip ``files`` below ``root`` and upload the archive; return its size in bytes."""
    with tempfile.TemporaryDirectory() as tmp:
        archive = zip_create(files, root, Path(tmp) / "archive.zip")
        size = archive.stat().st_size
        backend.put_file(archive, remote)
    return size


def download_archive(backend: Backend, remote: RemotePath, dest: Union[str, Path]) -> List[str]:
    """Download an archive and extract it into ``dest``; return the member paths."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=dest, prefix=".download-") as tmp:
        archive = backend.get_file(remote, Path(tmp) / "archive.zip")
        return zip_extract(archive, dest)


def download_single(backend: Backend, remote: RemotePath, target: Union[str, Path]) -> Path:
    """
    Download a one-file archive and place its member at ``target``.

    The member name inside the archive is ignored, so content-addressed
    archives can be restored under any path.

    Raises:
        ArchiveError: If the archive does not hold exactly one file
    """
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=target.parent, prefix=".download-") as tmp:
        archive = backend.get_file(remote, Path(tmp) / "archive.zip")
        extract_dir = Path(tmp) / "x"
        members = zip_extract(archive, extract_dir)
        if len(members) != 1:
            raise ArchiveError(f"Expected one file in {remote}, found {len(members)}")
        os.replace(extract_dir.joinpath(*PurePosixPath(members[0]).parts), target)
    return target

"""Content digests."""

import hashlib
from pathlib import Path
from typing import BinaryIO, Union

CHUNK_SIZE = 1024 * 1024

EMPTY_DIGEST = "d41d8cd98f00b204e9800998ecf8427e"


def compute_digest(stream: BinaryIO, chunk_size: int = CHUNK_SIZE) -> str:
    """
    MD5 of a byte stream, read in chunks.

    Args:
        stream: Binary stream positioned at the start of the content
        chunk_size: Read size in bytes

    Returns:
        Lowercase 32-character hex digest
    """
    md5 = hashlib.md5()
    for chunk in iter(lambda: stream.read(chunk_size), b""):
        md5.update(chunk)
    return md5.hexdigest()


def digest_file(path: Union[str, Path]) -> str:
    """MD5 of a file's content."""
    with open(path, "rb") as f:
        return compute_digest(f)


def digest_bytes(data: bytes) -> str:
    """MD5 of an in-memory payload."""
    return hashlib.md5(data).hexdigest()

"""Version ordering for dataset versions.

Dotted segments compare numerically when both are numbers, a pre-release
suffix after ``-`` sorts before its release (``1.0.0-rc1 < 1.0.0``) and
remaining ties are broken by the plain string.
"""

from typing import Iterable, List, Optional, Tuple, Union

Segment = Tuple[int, Union[int, str]]


def _segments(text: str) -> Tuple[Segment, ...]:
    return tuple((0, int(part)) if part.isdigit() else (1, part) for part in text.split("."))


def version_key(version: str) -> Tuple:  # type: ignore[type-arg]
    """Sort key implementing the version ordering."""
    release, _, prerelease = version.partition("-")
    if prerelease:
        return (_segments(release), 0, _segments(prerelease), version)
    return (_segments(release), 1, (), version)


def sort_versions(versions: Iterable[str]) -> List[str]:
    """Sort versions ascending."""
    return sorted(set(versions), key=version_key)


def latest(versions: Iterable[str]) -> Optional[str]:
    """Highest version, or None for an empty collection."""
    ordered = sort_versions(versions)
    return ordered[-1] if ordered else None


def is_newer(a: str, b: str) -> bool:
    """Check if version ``a`` orders after ``b``."""
    return version_key(a) > version_key(b)


def version_le(a: str, b: str) -> bool:
    """Check if version ``a`` orders before or equal to ``b``."""
    return version_key(a) <= version_key(b)

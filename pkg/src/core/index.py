"""Table indices: filewise, segmented and misc."""

from typing import Any, Iterator, List, Optional, Sequence, Tuple

import pandas as pd

from .errors import FormatError
from .scheme import DTYPES, check_dtype

FILEWISE = "filewise"
SEGMENTED = "segmented"
MISC = "misc"
INDEX_KINDS = (FILEWISE, SEGMENTED, MISC)

FILEWISE_LEVELS: Tuple[Tuple[str, str], ...] = (("file", "string"),)
SEGMENTED_LEVELS: Tuple[Tuple[str, str], ...] = (
    ("file", "string"),
    ("start", "time"),
    ("end", "time"),
)


def validate_file_path(path: Any) -> Optional[str]:
    """Return a violation message if ``path`` is not a clean relative media path."""
    if not isinstance(path, str) or not path:
        return "file path must be a non-empty string"
    if "\\" in path:
        return f"file path must use forward slashes: {path!r}"
    if path.startswith("/") or (len(path) > 1 and path[1] == ":"):
        return f"file path must be relative: {path!r}"
    parts = path.split("/")
    if any(part in ("", ".", "..") for part in parts):
        return f"file path contains empty, '.' or '..' components: {path!r}"
    return None


class Index:
    """Ordered, duplicate-free rows of a table index.

    Rows are tuples over ``levels``: ``(file,)`` for filewise,
    ``(file, start, end)`` for segmented (nanoseconds, ``end`` may be
    ``None`` for "until end of file") and the declared key columns for misc.
    """

    def __init__(
        self,
        kind: str,
        rows: Sequence[Tuple[Any, ...]],
        levels: Optional[Sequence[Tuple[str, str]]] = None,
        validate: bool = True,
    ):
        if kind not in INDEX_KINDS:
            raise FormatError(f"Unknown index kind '{kind}'")
        if kind == FILEWISE:
            levels = FILEWISE_LEVELS
        elif kind == SEGMENTED:
            levels = SEGMENTED_LEVELS
        elif not levels:
            raise FormatError("A misc index needs at least one level")

        self.kind = kind
        self.levels: Tuple[Tuple[str, str], ...] = tuple((str(n), str(d)) for n, d in levels)
        self.rows: List[Tuple[Any, ...]] = [tuple(row) for row in rows]

        if validate:
            self._validate()

    def _validate(self) -> None:
        names = [name for name, _ in self.levels]
        if len(set(names)) != len(names):
            raise FormatError(f"Duplicate index level names: {names}")
        for name, dtype in self.levels:
            if dtype not in DTYPES:
                raise FormatError(f"Index level '{name}' has malformed dtype '{dtype}'")

        seen = set()
        for i, row in enumerate(self.rows):
            if len(row) != len(self.levels):
                raise FormatError(f"Index row {i} has {len(row)} values, expected {len(self.levels)}")

            if self.kind == MISC:
                for value, (name, dtype) in zip(row, self.levels):
                    if value is None:
                        raise FormatError(f"Index row {i}: missing value for level '{name}'")
                    violation = check_dtype(value, dtype)
                    if violation:
                        raise FormatError(f"Index row {i}, level '{name}': {violation}")
            else:
                violation = validate_file_path(row[0])
                if violation:
                    raise FormatError(f"Index row {i}: {violation}")

            if self.kind == SEGMENTED:
                start, end = row[1], row[2]
                if check_dtype(start, "time") or start is None:
                    raise FormatError(f"Index row {i}: start must be a non-negative duration")
                if end is not None:
                    if check_dtype(end, "time"):
                        raise FormatError(f"Index row {i}: end must be a duration")
                    if end <= start:
                        raise FormatError(f"Index row {i}: end must be greater than start")

            if row in seen:
                raise FormatError(f"Duplicate index row: {row}")
            seen.add(row)

    @property
    def names(self) -> List[str]:
        """Names of the index levels."""
        return [name for name, _ in self.levels]

    @property
    def files(self) -> List[str]:
        """File of every row (filewise and segmented indices only)."""
        if self.kind == MISC:
            raise FormatError("A misc index does not reference files")
        return [row[0] for row in self.rows]

    def to_pandas(self) -> pd.Index:
        """Convert to a pandas index (durations as Timedelta, open ends as NaT)."""
        if self.kind == FILEWISE:
            return pd.Index([row[0] for row in self.rows], name="file", dtype="string")
        if self.kind == SEGMENTED:
            return pd.MultiIndex.from_arrays(
                [
                    pd.Index([row[0] for row in self.rows], dtype="string"),
                    pd.to_timedelta([row[1] for row in self.rows], unit="ns"),
                    pd.to_timedelta(
                        [pd.NaT if row[2] is None else row[2] for row in self.rows], unit="ns"
                    ),
                ],
                names=["file", "start", "end"],
            )
        if len(self.levels) == 1:
            return pd.Index([row[0] for row in self.rows], name=self.levels[0][0])
        return pd.MultiIndex.from_tuples(self.rows, names=self.names)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[Tuple[Any, ...]]:
        return iter(self.rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Index):
            return NotImplemented
        return self.kind == other.kind and self.levels == other.levels and self.rows == other.rows

    def __repr__(self) -> str:
        return f"Index(kind={self.kind!r}, rows={len(self.rows)})"


def filewise_index(files: Sequence[str]) -> Index:
    """Create a filewise index."""
    return Index(FILEWISE, [(f,) for f in files])


def segmented_index(
    files: Sequence[str],
    starts: Sequence[int],
    ends: Sequence[Optional[int]],
) -> Index:
    """Create a segmented index from parallel lists (durations in nanoseconds)."""
    if not len(files) == len(starts) == len(ends):
        raise FormatError("files, starts and ends must have equal length")
    return Index(SEGMENTED, list(zip(files, starts, ends)))

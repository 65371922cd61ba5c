"""Annotation tables and their CSV representation."""

import csv
import io
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Collection, Dict, List, Mapping, Optional, Sequence, Tuple

import pandas as pd

from .errors import FormatError, SchemeViolation
from .header import ColumnDecl, TableDecl
from .index import FILEWISE, FILEWISE_LEVELS, MISC, SEGMENTED, SEGMENTED_LEVELS, Index
from .scheme import Scheme, coerce, format_cell, parse_cell, validate_value

if TYPE_CHECKING:
    from .database import Database

logger = logging.getLogger(__name__)

PANDAS_DTYPES = {
    "bool": "boolean",
    "float": "float64",
    "integer": "Int64",
    "object": "object",
    "string": "string",
}


@dataclass
class Column:
    """Values of one table column, aligned to the index rows."""

    values: List[Any]
    scheme_id: Optional[str] = None
    rater_id: Optional[str] = None
    description: Optional[str] = None


def _column_dtype(column: Column, schemes: Mapping[str, Scheme]) -> str:
    if column.scheme_id is not None and column.scheme_id in schemes:
        return schemes[column.scheme_id].dtype
    return "object"


class Table:
    """Annotation columns bound to a filewise, segmented or misc index.

    Values are validated against their schemes on construction, so a Table
    never holds a value that violates its column's scheme.
    """

    def __init__(
        self,
        table_id: str,
        index: Index,
        columns: Optional[Dict[str, Column]] = None,
        schemes: Optional[Mapping[str, Scheme]] = None,
        misc_labels: Optional[Mapping[str, Collection[Any]]] = None,
        split_id: Optional[str] = None,
        description: Optional[str] = None,
        validate: bool = True,
    ):
        self.id = table_id
        self.index = index
        self.columns: Dict[str, Column] = dict(columns or {})
        self.schemes: Dict[str, Scheme] = dict(schemes or {})
        self.split_id = split_id
        self.description = description
        self.database: Optional["Database"] = None

        if validate:
            self._validate(misc_labels or {})

    def _validate(self, misc_labels: Mapping[str, Collection[Any]]) -> None:
        n = len(self.index)
        for column_id, column in self.columns.items():
            if len(column.values) != n:
                raise FormatError(
                    f"Column '{column_id}' of table '{self.id}' has {len(column.values)} "
                    f"values for {n} index rows"
                )
            if column.scheme_id is None:
                continue
            scheme = self.schemes.get(column.scheme_id)
            if scheme is None:
                raise FormatError(f"Column '{column_id}' references unknown scheme '{column.scheme_id}'")

            labels = misc_labels.get(scheme.misc_table) if scheme.misc_table else None
            for i, value in enumerate(column.values):
                violation = validate_value(value, scheme, labels)
                if violation:
                    raise SchemeViolation(
                        f"Table '{self.id}', column '{column_id}', row {i}: {violation}"
                    )
            column.values = [coerce(v, scheme.dtype) for v in column.values]

    @property
    def kind(self) -> str:
        """Index kind of the table."""
        return self.index.kind

    @property
    def files(self) -> List[str]:
        """Referenced media files, sorted and without duplicates."""
        if self.kind == MISC:
            return []
        return sorted(set(self.index.files))

    def dtype(self, column_id: str) -> str:
        """Dtype of a column (``object`` when it has no scheme)."""
        return _column_dtype(self.columns[column_id], self.schemes)

    def decl(self) -> TableDecl:
        """Declaration of this table as it appears in the header."""
        return TableDecl(
            type=self.kind,
            columns={
                cid: ColumnDecl(col.scheme_id, col.rater_id, col.description)
                for cid, col in self.columns.items()
            },
            levels=self.index.levels if self.kind == MISC else (),
            split_id=self.split_id,
            description=self.description,
        )

    def filter_files(self, keep: Collection[str]) -> "Table":
        """Return a copy with only the rows whose file is in ``keep``."""
        if self.kind == MISC:
            return self
        positions = [i for i, row in enumerate(self.index.rows) if row[0] in keep]
        return self._take(positions)

    def _take(self, positions: Sequence[int]) -> "Table":
        table = Table(
            self.id,
            Index(self.kind, [self.index.rows[i] for i in positions], self.index.levels, validate=False),
            {
                cid: Column([col.values[i] for i in positions], col.scheme_id, col.rater_id, col.description)
                for cid, col in self.columns.items()
            },
            self.schemes,
            split_id=self.split_id,
            description=self.description,
            validate=False,
        )
        table.database = self.database
        return table

    def get(self, index: Optional[Index] = None, map: Optional[str] = None) -> pd.DataFrame:
        """Return the values as a DataFrame, optionally re-indexed and mapped."""
        return table_get(self, index=index, map=map)

    def __getitem__(self, column_id: str) -> "ColumnView":
        if column_id not in self.columns:
            raise KeyError(f"Table '{self.id}' has no column '{column_id}'")
        return ColumnView(self, column_id)

    def __len__(self) -> int:
        return len(self.index)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Table):
            return NotImplemented
        return (
            self.id == other.id
            and self.index == other.index
            and self.columns == other.columns
            and self.split_id == other.split_id
        )

    def __repr__(self) -> str:
        return f"Table(id={self.id!r}, kind={self.kind!r}, rows={len(self)}, columns={list(self.columns)})"


class ColumnView:
    """A single column of a table, addressed as ``db[table][column]``."""

    def __init__(self, table: Table, column_id: str):
        self.table = table
        self.id = column_id

    def get(self, index: Optional[Index] = None, map: Optional[str] = None) -> pd.Series:
        """Return the column values as a Series, optionally re-indexed and mapped."""
        frame = table_get(self.table, index=index, map=map, columns=[self.id])
        return frame.iloc[:, 0]


# =============================================================================
# Re-indexing and mapping
# =============================================================================

def _series(values: List[Any], dtype: str, index: pd.Index, name: str) -> pd.Series:
    if dtype == "time":
        data = pd.to_timedelta([pd.NaT if v is None else v for v in values], unit="ns")
        return pd.Series(data, index=index, name=name)
    if dtype == "date":
        return pd.Series(pd.to_datetime(values), index=index, name=name)
    return pd.Series(values, index=index, name=name, dtype=PANDAS_DTYPES.get(dtype, "object"))


def table_get(
    table: Table,
    index: Optional[Index] = None,
    map: Optional[str] = None,
    columns: Optional[Sequence[str]] = None,
    misc_tables: Optional[Mapping[str, Table]] = None,
) -> pd.DataFrame:
    """
    Return table values re-indexed onto ``index``, optionally mapped.

    Filewise values are broadcast to every segment of the same file. Rows of
    ``index`` whose file does not appear in the table are dropped. With
    ``map``, every label of a misc-backed column is replaced by the value in
    column ``map`` of the misc table.

    Args:
        table: Source table
        index: Target filewise or segmented index (default: the table's own)
        map: Column of the misc table to map labels to
        columns: Restrict to these columns (default: all)
        misc_tables: Misc tables by ID (default: those of the table's database)

    Returns:
        DataFrame indexed like the target index

    Raises:
        FormatError: If the re-index or mapping is not possible
    """
    column_ids = list(columns) if columns is not None else list(table.columns)

    if index is None:
        index = table.index
        positions: List[Optional[int]] = list(range(len(index)))
        target_rows = index.rows
    else:
        if index.kind == MISC:
            raise FormatError("Values can only be re-indexed onto a filewise or segmented index")
        if table.kind == MISC:
            raise FormatError(f"Misc table '{table.id}' cannot be re-indexed onto a file index")
        if table.kind == SEGMENTED and index.kind == FILEWISE:
            raise FormatError(f"Segmented table '{table.id}' cannot be re-indexed onto a filewise index")

        if table.kind == FILEWISE:
            lookup = {row[0]: i for i, row in enumerate(table.index.rows)}
            found = [lookup.get(row[0]) for row in index.rows]
        else:
            lookup = {row: i for i, row in enumerate(table.index.rows)}
            found = [lookup.get(row) for row in index.rows]
        keep = [i for i, pos in enumerate(found) if pos is not None]
        dropped = len(index) - len(keep)
        if dropped:
            logger.debug(f"Dropped {dropped} rows of the target index not present in '{table.id}'")
        target_rows = [index.rows[i] for i in keep]
        positions = [found[i] for i in keep]
        index = Index(index.kind, target_rows, index.levels, validate=False)

    pandas_index = index.to_pandas()
    data: Dict[str, pd.Series] = {}
    mapped = []

    for column_id in column_ids:
        column = table.columns[column_id]
        values = [column.values[p] for p in positions]  # type: ignore[index]
        dtype = table.dtype(column_id)
        name = column_id

        if map is not None:
            scheme = table.schemes.get(column.scheme_id) if column.scheme_id else None
            misc_id = scheme.misc_table if scheme else None
            if misc_id is not None:
                misc = _misc_table(table, misc_id, misc_tables)
                if map not in misc.columns:
                    raise FormatError(f"Misc table '{misc_id}' has no column '{map}'")
                mapping = {row[0]: value for row, value in zip(misc.index.rows, misc.columns[map].values)}
                values = [None if v is None else mapping.get(v) for v in values]
                dtype = misc.dtype(map)
                name = map
                mapped.append(column_id)

        data[name] = _series(values, dtype, pandas_index, name)

    if map is not None:
        if not mapped:
            raise FormatError(
                f"No column of table '{table.id}' has a scheme backed by a misc table"
            )
        if len(mapped) > 1:
            raise FormatError(f"Mapping columns {mapped} to '{map}' is ambiguous")

    return pd.DataFrame(data, index=pandas_index)


def _misc_table(table: Table, misc_id: str, misc_tables: Optional[Mapping[str, Table]]) -> Table:
    if misc_tables is not None and misc_id in misc_tables:
        return misc_tables[misc_id]
    if table.database is not None and misc_id in table.database.tables:
        return table.database.tables[misc_id]
    raise FormatError(f"Misc table '{misc_id}' is not available")


# =============================================================================
# CSV
# =============================================================================

def index_levels(decl: TableDecl) -> Tuple[Tuple[str, str], ...]:
    """Index levels (name, dtype) of a declared table."""
    if decl.type == FILEWISE:
        return FILEWISE_LEVELS
    if decl.type == SEGMENTED:
        return SEGMENTED_LEVELS
    return decl.levels


def parse_table_csv(
    text: str,
    table_id: str,
    decl: TableDecl,
    schemes: Mapping[str, Scheme],
    misc_labels: Optional[Mapping[str, Collection[Any]]] = None,
) -> Table:
    """
    Parse a ``db.<table id>.csv`` document.

    Args:
        text: CSV document
        table_id: ID of the table
        decl: Table declaration from the header
        schemes: Schemes of the header
        misc_labels: Index values of misc tables, for misc-backed labels

    Returns:
        Validated Table

    Raises:
        FormatError: If the header row does not match, a cell cannot be parsed
            or an index row is duplicated
        SchemeViolation: If a value violates its scheme
    """
    levels = index_levels(decl)
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header_row = next(reader)
    except StopIteration:
        raise FormatError(f"Table '{table_id}' is empty, expected a header row")

    level_names = [name for name, _ in levels]
    n_levels = len(levels)
    if header_row[:n_levels] != level_names:
        raise FormatError(
            f"Table '{table_id}' must start with index columns {level_names}, got {header_row[:n_levels]}"
        )
    csv_columns = header_row[n_levels:]
    if sorted(csv_columns) != sorted(decl.columns) or len(set(csv_columns)) != len(csv_columns):
        raise FormatError(
            f"Table '{table_id}' columns {csv_columns} do not match declared columns {list(decl.columns)}"
        )

    column_dtypes = [
        schemes[decl.columns[c].scheme_id].dtype
        if decl.columns[c].scheme_id in schemes else "object"
        for c in csv_columns
    ]

    rows = []
    values: List[List[Any]] = [[] for _ in csv_columns]
    for line, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != len(header_row):
            raise FormatError(f"Table '{table_id}', line {line}: expected {len(header_row)} cells, got {len(record)}")
        try:
            row = []
            for cell, (name, dtype) in zip(record[:n_levels], levels):
                if decl.type == SEGMENTED and name == "end":
                    row.append(None if cell in ("", "NaT") else parse_cell(cell, dtype))
                else:
                    row.append(parse_cell(cell, dtype))
            for j, (cell, dtype) in enumerate(zip(record[n_levels:], column_dtypes)):
                values[j].append(parse_cell(cell, dtype))
        except FormatError as e:
            raise FormatError(f"Table '{table_id}', line {line}: {e}") from e
        rows.append(tuple(row))

    index = Index(decl.type, rows, levels)
    columns = {}
    for j, column_id in enumerate(csv_columns):
        column_decl = decl.columns[column_id]
        columns[column_id] = Column(values[j], column_decl.scheme_id, column_decl.rater_id, column_decl.description)
    ordered = {cid: columns[cid] for cid in decl.columns}

    return Table(
        table_id,
        index,
        ordered,
        schemes,
        misc_labels,
        split_id=decl.split_id,
        description=decl.description,
    )


def serialize_table_csv(table: Table) -> str:
    """Serialize a table to CSV: index columns first, then columns in declaration order."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(table.index.names + list(table.columns))

    level_dtypes = [dtype for _, dtype in table.index.levels]
    column_dtypes = [table.dtype(cid) for cid in table.columns]
    columns = [col.values for col in table.columns.values()]

    for i, row in enumerate(table.index.rows):
        cells = [format_cell(v, d) for v, d in zip(row, level_dtypes)]
        cells.extend(format_cell(values[i], d) for values, d in zip(columns, column_dtypes))
        writer.writerow(cells)

    return buffer.getvalue()

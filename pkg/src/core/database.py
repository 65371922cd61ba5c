"""A dataset in memory: header plus tables."""

import logging
from pathlib import Path
from typing import Any, Collection, Dict, List, Mapping, Optional, Union

from .errors import FormatError, HeaderError
from .header import Header, parse_header, serialize_header
from .index import MISC
from .table import Table, parse_table_csv, serialize_table_csv

logger = logging.getLogger(__name__)

HEADER_FILE = "db.yaml"


def table_file(table_id: str) -> str:
    """File name of a table inside a dataset root."""
    return f"db.{table_id}.csv"


def misc_labels(tables: Mapping[str, Table]) -> Dict[str, List[Any]]:
    """Label sets of misc tables: the values of their first index level."""
    return {
        table_id: [row[0] for row in table.index.rows]
        for table_id, table in tables.items()
        if table.kind == MISC
    }


class Database:
    """Header and tables of one dataset version.

    Tables are addressed by ID, ``db["emotion"].get()``. The header
    declarations are kept in sync with the tables on ``save``.
    """

    def __init__(self, header: Header, tables: Optional[Mapping[str, Table]] = None):
        self.header = header
        self.tables: Dict[str, Table] = {}
        for table in (tables or {}).values():
            self.add_table(table)

    def add_table(self, table: Table) -> None:
        """Add or replace a table and declare it in the header."""
        table.database = self
        self.tables[table.id] = table
        self.header.tables[table.id] = table.decl()

    @property
    def name(self) -> str:
        return self.header.name

    @property
    def schemes(self) -> Dict[str, Any]:
        return self.header.schemes

    @property
    def files(self) -> List[str]:
        """Media files referenced by any filewise or segmented table, sorted."""
        files = set()
        for table in self.tables.values():
            files.update(table.files)
        return sorted(files)

    def filter_files(self, keep: Collection[str]) -> "Database":
        """Return a copy whose filewise and segmented tables only reference ``keep``."""
        keep = set(keep)
        db = Database.__new__(Database)
        db.header = self.header
        db.tables = {}
        for table_id, table in self.tables.items():
            filtered = table.filter_files(keep)
            if filtered is table:
                db.tables[table_id] = table
            else:
                filtered.database = db
                db.tables[table_id] = filtered
        return db

    def __getitem__(self, table_id: str) -> Table:
        try:
            return self.tables[table_id]
        except KeyError:
            raise KeyError(f"Dataset '{self.name}' has no table '{table_id}'") from None

    def __contains__(self, table_id: object) -> bool:
        return table_id in self.tables

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Database):
            return NotImplemented
        return self.header == other.header and self.tables == other.tables

    def __repr__(self) -> str:
        return f"Database(name={self.name!r}, tables={list(self.tables)})"

    @classmethod
    def from_root(
        cls,
        root: Union[str, Path],
        tables: Optional[Collection[str]] = None,
    ) -> "Database":
        """
        Read a dataset folder.

        Args:
            root: Folder containing ``db.yaml`` and ``db.<table id>.csv`` files
            tables: Restrict to these table IDs (misc tables are always read)

        Returns:
            Database with validated tables

        Raises:
            HeaderError: If ``db.yaml`` is missing or invalid
            FormatError: If a table file is missing or malformed
        """
        root = Path(root)
        header_path = root / HEADER_FILE
        if not header_path.exists():
            raise HeaderError(f"No {HEADER_FILE} in {root}")
        header = parse_header(header_path.read_text(encoding="utf-8"))

        ordered = sorted(header.tables, key=lambda tid: header.tables[tid].type != MISC)
        loaded: Dict[str, Table] = {}
        for table_id in ordered:
            decl = header.tables[table_id]
            if tables is not None and decl.type != MISC and table_id not in tables:
                continue
            path = root / table_file(table_id)
            if not path.exists():
                raise FormatError(f"Table '{table_id}' declared in header but {path.name} is missing")
            loaded[table_id] = parse_table_csv(
                path.read_text(encoding="utf-8"),
                table_id,
                decl,
                header.schemes,
                misc_labels(loaded),
            )

        db = cls.__new__(cls)
        db.header = header
        db.tables = {tid: loaded[tid] for tid in header.tables if tid in loaded}
        for table in db.tables.values():
            table.database = db
        logger.debug(f"Read dataset '{header.name}' with tables {list(db.tables)} from {root}")
        return db

    def save(self, root: Union[str, Path]) -> None:
        """Write ``db.yaml`` and one CSV per table into ``root``."""
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        for table in self.tables.values():
            self.header.tables[table.id] = table.decl()
        (root / HEADER_FILE).write_text(serialize_header(self.header), encoding="utf-8")
        for table_id, table in self.tables.items():
            (root / table_file(table_id)).write_text(serialize_table_csv(table), encoding="utf-8")
        logger.debug(f"Saved dataset '{self.name}' to {root}")

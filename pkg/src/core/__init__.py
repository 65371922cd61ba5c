"""Dataset model: header, schemes, indices and tables."""

from .database import HEADER_FILE, Database, table_file
from .duration import format_duration, parse_duration
from .errors import FormatError, HeaderError, SchemeViolation
from .header import (
    ColumnDecl,
    Header,
    RaterDecl,
    SplitDecl,
    TableDecl,
    parse_header,
    serialize_header,
)
from .index import FILEWISE, MISC, SEGMENTED, Index, filewise_index, segmented_index
from .scheme import Scheme, validate_value
from .table import Column, Table, parse_table_csv, serialize_table_csv, table_get

__all__ = [
    "HEADER_FILE",
    "FILEWISE",
    "MISC",
    "SEGMENTED",
    "Column",
    "ColumnDecl",
    "Database",
    "FormatError",
    "Header",
    "HeaderError",
    "Index",
    "RaterDecl",
    "Scheme",
    "SchemeViolation",
    "SplitDecl",
    "Table",
    "TableDecl",
    "filewise_index",
    "format_duration",
    "parse_duration",
    "parse_header",
    "parse_table_csv",
    "segmented_index",
    "serialize_header",
    "serialize_table_csv",
    "table_file",
    "table_get",
    "validate_value",
]

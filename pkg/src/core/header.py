"""Dataset header: metadata plus scheme, table, split and rater declarations."""

import datetime
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import jsonschema
import yaml

from .errors import FormatError, HeaderError
from .index import FILEWISE, INDEX_KINDS, MISC
from .scheme import DTYPES, Scheme

logger = logging.getLogger(__name__)

MANDATORY_FIELDS = ("name", "source", "usage")
METADATA_FIELDS = (
    "name",
    "source",
    "usage",
    "author",
    "description",
    "expires",
    "languages",
    "license",
    "organisation",
)
DECLARATION_FIELDS = ("schemes", "tables", "splits", "raters", "attachments")
SPLIT_TYPES = ("train", "dev", "test", "other")
RATER_TYPES = ("human", "machine", "other")

_ID_MAP = {"type": "object", "propertyNames": {"type": "string", "minLength": 1}}

HEADER_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": list(MANDATORY_FIELDS),
    "properties": {
        "name": {"type": "string"},
        "source": {"type": "string"},
        "usage": {"type": "string"},
        "author": {"type": ["string", "null"]},
        "description": {"type": ["string", "null"]},
        "languages": {"type": "array", "items": {"type": "string"}},
        "license": {"type": ["string", "null"]},
        "organisation": {"type": ["string", "null"]},
        "schemes": {
            **_ID_MAP,
            "additionalProperties": {
                "type": "object",
                "required": ["dtype"],
                "properties": {
                    "dtype": {"type": "string"},
                    "labels": {"type": ["array", "string"]},
                    "minimum": {"type": "number"},
                    "maximum": {"type": "number"},
                    "description": {"type": "string"},
                },
                "additionalProperties": False,
            },
        },
        "tables": {
            **_ID_MAP,
            "additionalProperties": {
                "type": "object",
                "required": ["type"],
                "properties": {
                    "type": {"enum": list(INDEX_KINDS)},
                    "split_id": {"type": "string"},
                    "description": {"type": "string"},
                    "levels": {"type": "object", "additionalProperties": {"type": "string"}},
                    "columns": {
                        **_ID_MAP,
                        "additionalProperties": {
                            "type": ["object", "null"],
                            "properties": {
                                "scheme_id": {"type": "string"},
                                "rater_id": {"type": "string"},
                                "description": {"type": "string"},
                            },
                            "additionalProperties": False,
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
        "splits": {
            **_ID_MAP,
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "type": {"enum": list(SPLIT_TYPES)},
                    "description": {"type": "string"},
                },
                "additionalProperties": False,
            },
        },
        "raters": {
            **_ID_MAP,
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "type": {"enum": list(RATER_TYPES)},
                    "description": {"type": "string"},
                },
                "additionalProperties": False,
            },
        },
        "attachments": {**_ID_MAP, "additionalProperties": {"type": "string"}},
    },
}


# =============================================================================
# Declarations
# =============================================================================

@dataclass(frozen=True)
class ColumnDecl:
    """Column declaration of a table."""

    scheme_id: Optional[str] = None
    rater_id: Optional[str] = None
    description: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        out = {}
        if self.scheme_id is not None:
            out["scheme_id"] = self.scheme_id
        if self.rater_id is not None:
            out["rater_id"] = self.rater_id
        if self.description is not None:
            out["description"] = self.description
        return out


@dataclass(frozen=True)
class TableDecl:
    """Table declaration: index kind, misc levels, split and columns."""

    type: str = FILEWISE
    columns: Dict[str, ColumnDecl] = field(default_factory=dict)
    levels: Tuple[Tuple[str, str], ...] = ()
    split_id: Optional[str] = None
    description: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"type": self.type}
        if self.levels:
            out["levels"] = {name: dtype for name, dtype in self.levels}
        if self.split_id is not None:
            out["split_id"] = self.split_id
        if self.description is not None:
            out["description"] = self.description
        out["columns"] = {cid: col.to_dict() for cid, col in self.columns.items()}
        return out


@dataclass(frozen=True)
class SplitDecl:
    """Split declaration."""

    type: str = "other"
    description: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"type": self.type}
        if self.description is not None:
            out["description"] = self.description
        return out


@dataclass(frozen=True)
class RaterDecl:
    """Rater declaration."""

    type: str = "human"
    description: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"type": self.type}
        if self.description is not None:
            out["description"] = self.description
        return out


@dataclass
class Header:
    """Dataset identity, metadata and declarations (stored as ``db.yaml``)."""

    name: str
    source: str
    usage: str
    author: Optional[str] = None
    description: Optional[str] = None
    expires: Optional[datetime.date] = None
    languages: List[str] = field(default_factory=list)
    license: Optional[str] = None
    organisation: Optional[str] = None
    custom: Dict[str, Any] = field(default_factory=dict)
    schemes: Dict[str, Scheme] = field(default_factory=dict)
    tables: Dict[str, TableDecl] = field(default_factory=dict)
    splits: Dict[str, SplitDecl] = field(default_factory=dict)
    raters: Dict[str, RaterDecl] = field(default_factory=dict)
    attachments: Dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        """
        Check mandatory fields and cross references.

        Raises:
            HeaderError: If a mandatory field is empty or a reference dangles
        """
        for name in MANDATORY_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, str) or not value.strip():
                raise HeaderError(f"Missing mandatory field: {name}")

        if self.expires is not None and not isinstance(self.expires, datetime.date):
            raise HeaderError(f"expires must be a calendar date, got {self.expires!r}")

        for scheme_id, scheme in self.schemes.items():
            misc_id = scheme.misc_table
            if misc_id is None:
                continue
            decl = self.tables.get(misc_id)
            if decl is None or decl.type != MISC:
                raise HeaderError(
                    f"Scheme '{scheme_id}' references '{misc_id}', which is not a misc table"
                )

        for table_id, decl in self.tables.items():
            if decl.type not in INDEX_KINDS:
                raise HeaderError(f"Table '{table_id}' has unknown type '{decl.type}'")
            if decl.type == MISC:
                if not decl.levels:
                    raise HeaderError(f"Misc table '{table_id}' declares no levels")
                for level, dtype in decl.levels:
                    if dtype not in DTYPES:
                        raise HeaderError(
                            f"Misc table '{table_id}' level '{level}' has malformed dtype '{dtype}'"
                        )
            elif decl.levels:
                raise HeaderError(f"Table '{table_id}' is {decl.type} and cannot declare levels")
            if decl.split_id is not None and decl.split_id not in self.splits:
                raise HeaderError(f"Table '{table_id}' references unknown split '{decl.split_id}'")
            level_names = {name for name, _ in decl.levels}
            for column_id, column in decl.columns.items():
                if column_id in level_names or (decl.type != MISC and column_id in ("file", "start", "end")):
                    raise HeaderError(f"Column '{column_id}' of table '{table_id}' clashes with an index level")
                if column.scheme_id is not None and column.scheme_id not in self.schemes:
                    raise HeaderError(
                        f"Column '{column_id}' of table '{table_id}' references "
                        f"unknown scheme '{column.scheme_id}'"
                    )
                if column.rater_id is not None and column.rater_id not in self.raters:
                    raise HeaderError(
                        f"Column '{column_id}' of table '{table_id}' references "
                        f"unknown rater '{column.rater_id}'"
                    )

    def to_dict(self) -> Dict[str, Any]:
        """Convert header to an ordered mapping (deterministic key order)."""
        out: Dict[str, Any] = {}
        for name in METADATA_FIELDS:
            value = getattr(self, name)
            if value is None or (name == "languages" and not value):
                continue
            out[name] = list(value) if name == "languages" else value
        for key in sorted(self.custom):
            out[key] = self.custom[key]
        if self.schemes:
            out["schemes"] = {sid: s.to_dict() for sid, s in self.schemes.items()}
        if self.tables:
            out["tables"] = {tid: t.to_dict() for tid, t in self.tables.items()}
        if self.splits:
            out["splits"] = {sid: s.to_dict() for sid, s in self.splits.items()}
        if self.raters:
            out["raters"] = {rid: r.to_dict() for rid, r in self.raters.items()}
        if self.attachments:
            out["attachments"] = dict(self.attachments)
        return out


# =============================================================================
# YAML
# =============================================================================

class _UniqueKeyLoader(yaml.SafeLoader):
    """SafeLoader that rejects duplicate mapping keys."""

    def construct_mapping(self, node, deep=False):  # type: ignore[no-untyped-def]
        keys = set()
        for key_node, _ in node.value:
            key = self.construct_object(key_node, deep=deep)
            if key in keys:
                raise HeaderError(f"Duplicate ID '{key}' at line {key_node.start_mark.line + 1}")
            keys.add(key)
        return super().construct_mapping(node, deep=deep)


def parse_header(text: str) -> Header:
    """
    Parse and validate a ``db.yaml`` document.

    Args:
        text: YAML document

    Returns:
        Validated Header; unknown top-level keys end up in ``custom``

    Raises:
        FormatError: If the YAML is malformed
        HeaderError: If a mandatory field is missing, a reference dangles or a
            dtype is malformed
    """
    try:
        data = yaml.load(text, Loader=_UniqueKeyLoader)
    except yaml.YAMLError as e:
        raise FormatError(f"Malformed header YAML: {e}") from e

    if not isinstance(data, dict):
        raise HeaderError("Header must be a YAML mapping")

    for name in MANDATORY_FIELDS:
        if not data.get(name):
            raise HeaderError(f"Missing mandatory field: {name}")

    try:
        jsonschema.validate(data, HEADER_SCHEMA)
    except jsonschema.ValidationError as e:
        location = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise HeaderError(f"Invalid header at {location}: {e.message}") from e

    custom = {
        key: value
        for key, value in data.items()
        if key not in METADATA_FIELDS and key not in DECLARATION_FIELDS
    }
    if custom:
        logger.debug(f"Header carries custom fields: {sorted(custom)}")

    tables = {}
    for table_id, decl in (data.get("tables") or {}).items():
        columns = {
            column_id: ColumnDecl(**(column or {}))
            for column_id, column in (decl.get("columns") or {}).items()
        }
        tables[table_id] = TableDecl(
            type=decl["type"],
            columns=columns,
            levels=tuple((name, dtype) for name, dtype in (decl.get("levels") or {}).items()),
            split_id=decl.get("split_id"),
            description=decl.get("description"),
        )

    header = Header(
        name=data["name"],
        source=data["source"],
        usage=data["usage"],
        author=data.get("author"),
        description=data.get("description"),
        expires=data.get("expires"),
        languages=list(data.get("languages") or []),
        license=data.get("license"),
        organisation=data.get("organisation"),
        custom=custom,
        schemes={sid: Scheme.from_dict(s) for sid, s in (data.get("schemes") or {}).items()},
        tables=tables,
        splits={sid: SplitDecl(**(s or {})) for sid, s in (data.get("splits") or {}).items()},
        raters={rid: RaterDecl(**(r or {})) for rid, r in (data.get("raters") or {}).items()},
        attachments=dict(data.get("attachments") or {}),
    )
    header.validate()
    return header


def serialize_header(header: Header) -> str:
    """Serialize a header to a deterministic YAML document."""
    return yaml.safe_dump(
        header.to_dict(),
        sort_keys=False,
        allow_unicode=True,
        default_flow_style=False,
    )

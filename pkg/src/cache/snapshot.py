"""Binary table snapshots stored next to the cached CSV files."""

import logging
import os
import pickle
import tempfile
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from ..core.errors import FormatError
from ..core.index import Index
from ..core.scheme import Scheme
from ..core.table import Column, Table

logger = logging.getLogger(__name__)

SNAPSHOT_FORMAT = "audvault-table/1"
PICKLE_PROTOCOL = 4


class SnapshotError(Exception):
    """Raised internally when a snapshot is unusable; callers fall back to CSV."""
    pass


def snapshot_file(table_id: str) -> str:
    return f"db.{table_id}.snapshot"


def write_snapshot(table: Table, path: Union[str, Path], source_digest: Optional[str] = None) -> Path:
    """
    Pickle a validated table.

    Args:
        table: Table to store
        path: Snapshot file
        source_digest: Digest of the CSV the table was parsed from

    Returns:
        Path of the snapshot
    """
    path = Path(path)
    payload: Dict[str, Any] = {
        "format": SNAPSHOT_FORMAT,
        "source_digest": source_digest,
        "id": table.id,
        "kind": table.kind,
        "levels": table.index.levels,
        "rows": table.index.rows,
        "columns": [
            (cid, col.scheme_id, col.rater_id, col.description, col.values)
            for cid, col in table.columns.items()
        ],
        "split_id": table.split_id,
        "description": table.description,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as f:
            pickle.dump(payload, f, protocol=PICKLE_PROTOCOL)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_snapshot(
    path: Union[str, Path],
    schemes: Mapping[str, Scheme],
    source_digest: Optional[str] = None,
    format_tag: str = SNAPSHOT_FORMAT,
) -> Table:
    """
    Load a snapshot without re-validating its values.

    Raises:
        SnapshotError: If the file is missing or corrupt, has another format
            tag or was made from a different CSV
    """
    try:
        with open(path, "rb") as f:
            payload = pickle.load(f)
    except FileNotFoundError as e:
        raise SnapshotError(f"No snapshot at {path}") from e
    except (OSError, pickle.UnpicklingError, EOFError, AttributeError, ValueError, IndexError) as e:
        raise SnapshotError(f"Corrupt snapshot {path}: {e}") from e

    if not isinstance(payload, dict) or payload.get("format") != format_tag:
        raise SnapshotError(f"Snapshot {path} has format {payload.get('format') if isinstance(payload, dict) else None!r}")
    if source_digest is not None and payload.get("source_digest") != source_digest:
        raise SnapshotError(f"Snapshot {path} is out of date")

    try:
        index = Index(payload["kind"], payload["rows"], payload["levels"], validate=False)
        columns = {
            cid: Column(list(values), scheme_id, rater_id, description)
            for cid, scheme_id, rater_id, description, values in payload["columns"]
        }
        return Table(
            payload["id"],
            index,
            columns,
            schemes,
            split_id=payload["split_id"],
            description=payload["description"],
            validate=False,
        )
    except (KeyError, TypeError, ValueError, FormatError) as e:
        raise SnapshotError(f"Malformed snapshot {path}: {e}") from e

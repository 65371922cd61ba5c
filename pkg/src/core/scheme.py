"""Schemes: dtype, range and label constraints on column values."""

import datetime
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Union

from .duration import NS_PER_SECOND, format_duration, parse_duration
from .errors import FormatError, HeaderError

DTYPES = ("bool", "date", "float", "integer", "object", "string", "time")
NUMERIC_DTYPES = ("float", "integer", "time")


@dataclass(frozen=True)
class Scheme:
    """Constraint on the values of a table column.

    ``labels`` is either a list of permitted values or the ID of a misc
    table whose index values are the permitted labels. Bounds of ``time``
    schemes are given in seconds.
    """

    dtype: str
    labels: Optional[Union[List[Any], str]] = None
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    description: Optional[str] = None

    def __post_init__(self) -> None:
        if self.dtype not in DTYPES:
            raise HeaderError(
                f"Malformed dtype '{self.dtype}', must be one of: {', '.join(DTYPES)}"
            )

        has_bounds = self.minimum is not None or self.maximum is not None
        if has_bounds and self.dtype not in NUMERIC_DTYPES:
            raise HeaderError(f"Bounds are only allowed on numeric or time schemes, not '{self.dtype}'")
        if self.minimum is not None and self.maximum is not None and self.minimum > self.maximum:
            raise HeaderError(f"Scheme minimum {self.minimum} exceeds maximum {self.maximum}")

        if isinstance(self.labels, list):
            for label in self.labels:
                violation = check_dtype(label, self.dtype)
                if violation:
                    raise HeaderError(f"Label {label!r}: {violation}")
            if len(set(map(repr, self.labels))) != len(self.labels):
                raise HeaderError("Scheme labels must be unique")
        elif self.labels is not None and not isinstance(self.labels, str):
            raise HeaderError("Scheme labels must be a list or a misc table ID")

    @property
    def misc_table(self) -> Optional[str]:
        """ID of the misc table backing the labels, if any."""
        return self.labels if isinstance(self.labels, str) else None

    def to_dict(self) -> Dict[str, Any]:
        """Convert scheme to its header mapping."""
        out: Dict[str, Any] = {"dtype": self.dtype}
        if self.labels is not None:
            out["labels"] = list(self.labels) if isinstance(self.labels, list) else self.labels
        if self.minimum is not None:
            out["minimum"] = self.minimum
        if self.maximum is not None:
            out["maximum"] = self.maximum
        if self.description is not None:
            out["description"] = self.description
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Scheme":
        """Create scheme from its header mapping."""
        labels = data.get("labels")
        if isinstance(labels, tuple):
            labels = list(labels)
        return cls(
            dtype=data.get("dtype", ""),
            labels=labels,
            minimum=data.get("minimum"),
            maximum=data.get("maximum"),
            description=data.get("description"),
        )


def check_dtype(value: Any, dtype: str) -> Optional[str]:
    """Return a violation message if ``value`` is not of ``dtype``."""
    if dtype == "bool":
        ok = isinstance(value, bool)
    elif dtype == "date":
        ok = isinstance(value, datetime.date) and not isinstance(value, datetime.datetime)
    elif dtype == "float":
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif dtype == "integer":
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif dtype == "time":
        ok = isinstance(value, int) and not isinstance(value, bool) and value >= 0
    elif dtype == "string":
        ok = isinstance(value, str)
    else:
        ok = True
    if ok:
        return None
    return f"expected {dtype}, got {type(value).__name__}"


def validate_value(
    value: Any,
    scheme: Scheme,
    misc_labels: Optional[Sequence[Any]] = None,
) -> Optional[str]:
    """
    Check a single value against a scheme.

    Args:
        value: Value to check (``None`` means missing and always passes)
        scheme: Scheme to check against
        misc_labels: Index values of the misc table backing the scheme labels

    Returns:
        None if the value is ok, otherwise a description of the violation
    """
    if value is None:
        return None

    violation = check_dtype(value, scheme.dtype)
    if violation:
        return violation

    if scheme.minimum is not None or scheme.maximum is not None:
        number = value / NS_PER_SECOND if scheme.dtype == "time" else value
        if isinstance(number, float) and math.isnan(number):
            return "value is NaN but scheme has bounds"
        if scheme.minimum is not None and number < scheme.minimum:
            return f"{value!r} is below minimum {scheme.minimum}"
        if scheme.maximum is not None and number > scheme.maximum:
            return f"{value!r} is above maximum {scheme.maximum}"

    if isinstance(scheme.labels, list):
        if value not in scheme.labels:
            return f"{value!r} is not one of the labels {scheme.labels}"
    elif scheme.labels is not None and misc_labels is not None:
        if value not in misc_labels:
            return f"{value!r} is not a key of misc table '{scheme.labels}'"

    return None


# =============================================================================
# Cell Codec
# =============================================================================

_TRUE = {"True", "true", "1"}
_FALSE = {"False", "false", "0"}


def parse_cell(text: str, dtype: str) -> Any:
    """
    Parse a CSV cell into a typed value.

    Raises:
        FormatError: If the cell cannot be parsed as ``dtype``
    """
    if text == "":
        return None

    try:
        if dtype == "bool":
            if text in _TRUE:
                return True
            if text in _FALSE:
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if dtype == "date":
            return datetime.date.fromisoformat(text)
        if dtype == "float":
            return float(text)
        if dtype == "integer":
            return int(text)
        if dtype == "time":
            return parse_duration(text)
    except (ValueError, FormatError) as e:
        raise FormatError(f"Cannot parse {text!r} as {dtype}: {e}") from e

    return text


def format_cell(value: Any, dtype: str) -> str:
    """Format a typed value as a CSV cell (missing values become empty cells)."""
    if value is None:
        return ""
    if dtype == "bool":
        return "True" if value else "False"
    if dtype == "date":
        return value.isoformat()
    if dtype == "float":
        return repr(float(value))
    if dtype == "time":
        return format_duration(value)
    return str(value)


def coerce(value: Any, dtype: str) -> Any:
    """Normalize a value that already satisfies ``dtype`` (ints become floats)."""
    if dtype == "float" and value is not None and not isinstance(value, float):
        return float(value)
    return value

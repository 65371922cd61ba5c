"""Duration parsing and formatting.

Durations are integer nanoseconds. The text form is ``D days HH:MM:SS[.fffffffff]``;
plain decimal seconds (``"0"``, ``"1.5"``) are accepted on input.
"""

import re
from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation
from typing import Optional

from .errors import FormatError

NS_PER_SECOND = 1_000_000_000

_DAY_CLOCK = re.compile(
    r"^(?:(?P<days>\d+) days? )?(?P<hours>\d+):(?P<minutes>\d{2}):(?P<seconds>\d{2})"
    r"(?:\.(?P<fraction>\d{1,9}))?$"
)
_SECONDS = re.compile(r"^\d+(?:\.\d+)?$")


def parse_duration(text: str) -> int:
    """
    Parse a duration cell into nanoseconds.

    Args:
        text: Day-clock string or decimal seconds

    Returns:
        Duration in nanoseconds

    Raises:
        FormatError: If the text is not a valid duration
    """
    text = text.strip()

    match = _DAY_CLOCK.match(text)
    if match:
        days = int(match.group("days") or 0)
        hours = int(match.group("hours"))
        minutes = int(match.group("minutes"))
        seconds = int(match.group("seconds"))
        if minutes > 59 or seconds > 59:
            raise FormatError(f"Unparsable duration: {text!r}")
        fraction = (match.group("fraction") or "").ljust(9, "0")
        total_seconds = ((days * 24 + hours) * 60 + minutes) * 60 + seconds
        return total_seconds * NS_PER_SECOND + int(fraction or 0)

    if _SECONDS.match(text):
        try:
            value = Decimal(text) * NS_PER_SECOND
        except InvalidOperation as e:
            raise FormatError(f"Unparsable duration: {text!r}") from e
        return int(value.quantize(Decimal(1), rounding=ROUND_HALF_EVEN))

    raise FormatError(f"Unparsable duration: {text!r}")


def parse_optional_duration(text: str) -> Optional[int]:
    """Parse a duration cell where an empty cell (or NaT) means missing."""
    if text.strip() in ("", "NaT"):
        return None
    return parse_duration(text)


def format_duration(ns: int) -> str:
    """
    Format nanoseconds in day-clock form.

    The fraction is only written when non-zero and always has nine digits.
    """
    if ns < 0:
        raise FormatError(f"Negative duration: {ns}")

    total_seconds, fraction = divmod(ns, NS_PER_SECOND)
    days, rest = divmod(total_seconds, 86400)
    hours, rest = divmod(rest, 3600)
    minutes, seconds = divmod(rest, 60)

    text = f"{days} days {hours:02d}:{minutes:02d}:{seconds:02d}"
    if fraction:
        text += f".{fraction:09d}"
    return text


def seconds(ns: int) -> float:
    """Convert nanoseconds to float seconds."""
    return ns / NS_PER_SECOND


def from_seconds(value: float) -> int:
    """Convert seconds to nanoseconds, rounding to the nearest nanosecond."""
    return int(round(value * NS_PER_SECOND))

"""Markdown data cards built from a header and a dependency table."""

from typing import Any, Iterable, List, Optional

from ..core.duration import format_duration
from ..core.header import Header
from ..dependency.dependencies import DependencyTable

CARD_FIELDS = ("source", "usage", "author", "license", "organisation", "languages", "expires")


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return ", ".join(str(v) for v in value)
    return str(value).replace("|", "\\|").replace("\n", " ")


def _table(headings: List[str], rows: Iterable[List[Any]]) -> List[str]:
    lines = [
        "| " + " | ".join(headings) + " |",
        "| " + " | ".join("---" for _ in headings) + " |",
    ]
    for row in rows:
        lines.append("| " + " | ".join(_cell(v) for v in row) + " |")
    return lines


def _distinct(values: Iterable[Optional[int]]) -> str:
    found = sorted({v for v in values if v is not None})
    return ", ".join(str(v) for v in found) if found else "-"


def render_datacard(header: Header, deps: DependencyTable) -> str:
    """
    Render the data card of a dataset version.

    Media statistics come from the dependency table; removed media are
    counted separately. Output is deterministic for the same inputs.

    Args:
        header: Dataset header
        deps: Dependency table of the same version

    Returns:
        Markdown document
    """
    lines = [f"# {header.name}", ""]

    meta = [["version", deps.version]]
    for name in CARD_FIELDS:
        value = getattr(header, name)
        if value is None or value == []:
            continue
        meta.append([name, value.isoformat() if name == "expires" else value])
    lines += _table(["Field", "Value"], meta)
    lines.append("")

    lines += ["## Description", "", header.description or "No description.", ""]

    media = [p for p in deps.media() if not deps.is_removed(p)]
    removed = deps.removed()
    total = sum(deps.duration(p) or 0 for p in media)
    lines += ["## Media", ""]
    stats = [
        ["files", len(media)],
        ["duration", format_duration(total)],
        ["sampling rates", _distinct(deps.sampling_rate(p) for p in media)],
        ["channels", _distinct(deps.channels(p) for p in media)],
        ["bit depths", _distinct(deps.bit_depth(p) for p in media)],
    ]
    if removed:
        stats.append(["removed files", len(removed)])
    if media:
        stats.append(["example", sorted(media)[0]])
    lines += _table(["Statistic", "Value"], stats)
    lines.append("")

    lines += ["## Tables", ""]
    if header.tables:
        lines += _table(
            ["ID", "Type", "Columns"],
            ([tid, decl.type, list(decl.columns)] for tid, decl in header.tables.items()),
        )
    else:
        lines.append("No tables.")
    lines.append("")

    lines += ["## Schemes", ""]
    if header.schemes:
        lines += _table(
            ["ID", "Dtype", "Minimum", "Maximum", "Labels"],
            (
                [sid, s.dtype, s.minimum, s.maximum, s.labels]
                for sid, s in header.schemes.items()
            ),
        )
    else:
        lines.append("No schemes.")

    return "\n".join(lines) + "\n"

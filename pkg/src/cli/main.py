"""audvault command line: publish, load and inspect versioned audio datasets."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional, Sequence

from ..audio.flavour import Flavour
from ..backend.repository import Repository
from ..config import Config, ConfigError, load_config
from ..core.header import Header
from ..errors import AudvaultError
from ..load import info
from ..load.loader import load
from ..publish.publisher import LATEST, load_to, publish, remove_media, unlock
from .datacard import render_datacard

logger = logging.getLogger(__name__)

INFO_FIELDS = (
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


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 1 on usage errors."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _channels(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Channels must be comma separated integers, got '{text}'")


def _add_cache_option(cmd: argparse.ArgumentParser) -> None:
    """Accept ``--cache`` after the subcommand as well."""
    cmd.add_argument(
        "--cache",
        metavar="DIR",
        default=argparse.SUPPRESS,
        help="Cache root (overrides configuration)",
    )


def build_parser() -> CliParser:
    """Build the argument parser with all subcommands."""
    parser = CliParser(
        prog="audvault",
        description="Publish, load and inspect versioned audio datasets.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Publish a dataset folder as version 1.0.0
  %(prog)s publish ./emodb 1.0.0 --repo local

  # Load version 1.0.0 resampled to 8 kHz mono
  %(prog)s load emodb --version 1.0.0 --sampling-rate 8000 --mixdown

  # Load only the header and tables
  %(prog)s load emodb --only-metadata

  # List the newest version of every dataset as JSON
  %(prog)s --json available --only-latest
        """,
    )
    parser.add_argument("--config", metavar="FILE", help="Configuration file (default: audvault.yaml lookup)")
    parser.add_argument("--cache", metavar="DIR", help="Cache root (overrides configuration)")
    parser.add_argument("--json", action="store_true", help="Machine-readable output")
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose output for debugging")

    commands = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=CliParser)

    cmd = commands.add_parser("publish", help="Publish a dataset folder as a new version")
    cmd.add_argument("root", help="Dataset folder with db.yaml, tables and media")
    cmd.add_argument("version", help="Version to publish")
    cmd.add_argument("--repo", required=True, help="Target repository name")
    previous = cmd.add_mutually_exclusive_group()
    previous.add_argument(
        "--previous",
        "--previous-version",
        dest="previous_version",
        default=LATEST,
        metavar="VERSION",
        help="Version to compare against (default: latest)",
    )
    previous.add_argument(
        "--from-scratch",
        action="store_const",
        const=None,
        dest="previous_version",
        help="Publish without comparing against a previous version",
    )
    cmd.add_argument("--num-workers", type=int, metavar="N", help="Parallel uploads")

    cmd = commands.add_parser("load", help="Load a dataset version into the cache")
    cmd.add_argument("name", help="Dataset name")
    cmd.add_argument("--version", help="Version (default: latest)")
    flavour_group = cmd.add_argument_group("Flavour options")
    flavour_group.add_argument("--sampling-rate", type=int, metavar="HZ", help="Target sampling rate")
    flavour_group.add_argument("--bit-depth", type=int, choices=[16, 24, 32], help="Target bit depth")
    channel_group = flavour_group.add_mutually_exclusive_group()
    channel_group.add_argument("--channels", type=_channels, metavar="I,J", help="Channels to keep (0-based)")
    channel_group.add_argument("--mixdown", action="store_true", help="Mix all channels to mono")
    filter_group = cmd.add_argument_group("Filter options")
    filter_group.add_argument("--tables", nargs="+", metavar="TABLE", help="Table IDs or patterns to load")
    filter_group.add_argument("--media", nargs="+", metavar="FILE", help="Media paths or patterns to load")
    filter_group.add_argument("--only-metadata", action="store_true", help="Load header and tables only")
    cmd.add_argument("--num-workers", type=int, metavar="N", help="Parallel downloads")
    cmd.add_argument(
        "--revalidate",
        action="store_true",
        help="Check a cached version against the repository for media removed since",
    )
    _add_cache_option(cmd)

    cmd = commands.add_parser("load-to", help="Download a version in its original format into a folder")
    cmd.add_argument("root", help="Target folder")
    cmd.add_argument("name", help="Dataset name")
    cmd.add_argument("version", help="Version to download")
    cmd.add_argument("--num-workers", type=int, metavar="N", help="Parallel downloads")

    cmd = commands.add_parser("available", help="List published datasets")
    cmd.add_argument("--only-latest", action="store_true", help="Newest version per dataset only")

    cmd = commands.add_parser("info", help="Show the header of a dataset version")
    cmd.add_argument("name", help="Dataset name")
    cmd.add_argument("--version", help="Version (default: latest)")

    cmd = commands.add_parser("search", help="Find datasets declaring a scheme")
    cmd.add_argument("scheme", help="Scheme ID")

    cmd = commands.add_parser("remove-media", help="Remove media files from every version")
    cmd.add_argument("name", help="Dataset name")
    cmd.add_argument("files", nargs="+", help="Media paths to remove")
    cmd.add_argument("--repo", required=True, help="Repository name")

    cmd = commands.add_parser("unlock", help="Remove the writer lock left by a crashed publish or removal")
    cmd.add_argument("name", help="Dataset name")
    cmd.add_argument("--repo", required=True, help="Repository name")

    cmd = commands.add_parser("datacard", help="Render the data card of a dataset version")
    cmd.add_argument("name", help="Dataset name")
    cmd.add_argument("--version", help="Version (default: latest)")
    cmd.add_argument("--output", "-o", metavar="FILE", help="Write to file instead of stdout")

    cmd = commands.add_parser("cache-clear", help="Delete cached datasets")
    cmd.add_argument("name", nargs="?", help="Only this dataset (default: all)")
    _add_cache_option(cmd)

    return parser


# =============================================================================
# Helpers
# =============================================================================

def header_summary(header: Header) -> Dict[str, Any]:
    """Header as the stable ``info`` JSON document."""
    data: Dict[str, Any] = {}
    for name in INFO_FIELDS:
        value = getattr(header, name)
        if name == "expires" and value is not None:
            value = value.isoformat()
        data[name] = list(value) if name == "languages" else value
    data["schemes"] = {sid: s.to_dict() for sid, s in header.schemes.items()}
    data["tables"] = {tid: t.to_dict() for tid, t in header.tables.items()}
    data["splits"] = {sid: s.to_dict() for sid, s in header.splits.items()}
    data["raters"] = {rid: r.to_dict() for rid, r in header.raters.items()}
    return data


def _repositories(config: Config) -> List[Repository]:
    if not config.repositories:
        raise ConfigError("No repositories configured")
    return config.repositories


def _emit(args: argparse.Namespace, data: Any, text: str) -> None:
    if args.json:
        print(json.dumps(data, indent=2, default=str))
    else:
        print(text)


# =============================================================================
# Commands
# =============================================================================

def cmd_publish(args: argparse.Namespace, config: Config) -> int:
    _repositories(config)
    report = publish(
        args.root,
        args.version,
        config.repository(args.repo),
        previous_version=args.previous_version,
        num_workers=args.num_workers or config.num_workers,
        verbose=args.verbose,
    )
    text = (
        f"Published {report.name} {report.version} "
        f"(previous: {report.previous_version or 'none'}): "
        f"{report.uploaded} archives uploaded, {report.reused} files reused, "
        f"{report.deleted} deleted, {report.total_bytes_uploaded} bytes"
    )
    _emit(args, report.to_dict(), text)
    return 0


def cmd_load(args: argparse.Namespace, config: Config) -> int:
    flavour = Flavour(
        bit_depth=args.bit_depth,
        sampling_rate=args.sampling_rate,
        channels=tuple(args.channels) if args.channels is not None else None,
        mixdown=args.mixdown,
    )
    db = load(
        args.name,
        args.version,
        flavour=flavour,
        tables=args.tables,
        media=args.media,
        only_metadata=args.only_metadata,
        repositories=_repositories(config),
        cache_root=config.cache_root,
        num_workers=args.num_workers or config.num_workers,
        revalidate=args.revalidate,
        verbose=args.verbose,
    )
    data = {
        "name": db.name,
        "version": db.version,
        "repository": db.repository,
        "root": str(db.root),
        "tables": list(db.tables),
        "files": len(db.files),
        "removed_media": db.removed_media,
    }
    _emit(args, data, str(db.root))
    return 0


def cmd_load_to(args: argparse.Namespace, config: Config) -> int:
    root = load_to(
        args.root,
        args.name,
        args.version,
        _repositories(config),
        num_workers=args.num_workers or config.num_workers,
        verbose=args.verbose,
    )
    _emit(args, {"root": str(root)}, str(root))
    return 0


def cmd_available(args: argparse.Namespace, config: Config) -> int:
    frame = info.available(_repositories(config), only_latest=args.only_latest)
    text = frame.to_string(index=False) if len(frame) else "No datasets found."
    _emit(args, frame.to_dict(orient="records"), text)
    return 0


def cmd_info(args: argparse.Namespace, config: Config) -> int:
    header = info.info_header(args.name, args.version, _repositories(config))
    data = header_summary(header)
    lines = [f"{name}: {data[name]}" for name in INFO_FIELDS if data[name] not in (None, [])]
    lines.append(f"schemes: {', '.join(data['schemes']) or '-'}")
    lines.append(f"tables: {', '.join(data['tables']) or '-'}")
    lines.append(f"splits: {', '.join(data['splits']) or '-'}")
    lines.append(f"raters: {', '.join(data['raters']) or '-'}")
    _emit(args, data, "\n".join(lines))
    return 0


def cmd_search(args: argparse.Namespace, config: Config) -> int:
    names = info.search_by_scheme(args.scheme, _repositories(config))
    _emit(args, names, "\n".join(names) if names else f"No dataset declares scheme '{args.scheme}'.")
    return 0


def cmd_remove_media(args: argparse.Namespace, config: Config) -> int:
    _repositories(config)
    report = remove_media(args.name, args.files, config.repository(args.repo))
    if report.versions:
        text = f"Removed {len(report.files)} file(s) from versions {', '.join(report.versions)}"
    else:
        text = "Nothing to remove."
    _emit(args, report.to_dict(), text)
    return 0


def cmd_unlock(args: argparse.Namespace, config: Config) -> int:
    _repositories(config)
    holder = unlock(args.name, config.repository(args.repo))
    text = f"Removed lock held by {holder}." if holder else f"Dataset '{args.name}' is not locked."
    _emit(args, {"name": args.name, "holder": holder}, text)
    return 0


def cmd_datacard(args: argparse.Namespace, config: Config) -> int:
    repositories = _repositories(config)
    version = args.version or info.latest_version(args.name, repositories)
    header = info.info_header(args.name, version, repositories)
    deps = info.dependencies(args.name, version, repositories)
    card = render_datacard(header, deps)
    if args.output:
        Path(args.output).write_text(card, encoding="utf-8")
        logger.info(f"Data card written to {args.output}")
    else:
        sys.stdout.write(card)
    return 0


def cmd_cache_clear(args: argparse.Namespace, config: Config) -> int:
    count = info.clear_cache(config.cache_root, args.name)
    _emit(args, {"removed": count}, f"Removed {count} cached dataset folder(s).")
    return 0


COMMANDS = {
    "publish": cmd_publish,
    "load": cmd_load,
    "load-to": cmd_load_to,
    "available": cmd_available,
    "info": cmd_info,
    "search": cmd_search,
    "remove-media": cmd_remove_media,
    "unlock": cmd_unlock,
    "datacard": cmd_datacard,
    "cache-clear": cmd_cache_clear,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1

    log_level = logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    if args.command is None:
        parser.print_help(sys.stderr)
        return 1

    try:
        config = load_config(args.config)
        if args.cache:
            config.cache_root = Path(args.cache).expanduser()
        return COMMANDS[args.command](args, config)

    except KeyboardInterrupt:
        logger.info("\nOperation cancelled by user")
        return 130

    except AudvaultError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1

    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Configuration: repositories, cache root and worker count."""

import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import jsonschema
import yaml

from .backend.base import BackendError
from .backend.repository import Repository
from .cache.cache import CACHE_ROOT_ENV, default_cache_root
from .errors import AudvaultError

logger = logging.getLogger(__name__)

CONFIG_ENV = "AUDVAULT_CONFIG"
HOST_ENV_PREFIX = "AUDVAULT_HOST_"
LOCAL_CONFIG = Path("audvault.yaml")
USER_CONFIG = Path("~/.config/audvault/config.yaml")
DEFAULT_NUM_WORKERS = 4

CONFIG_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "properties": {
        "repositories": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "host"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "host": {"type": "string", "minLength": 1},
                    "backend": {"type": "string", "minLength": 1},
                },
                "additionalProperties": False,
            },
        },
        "cache_root": {"type": "string"},
        "num_workers": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}


class ConfigError(AudvaultError):
    """Raised when the configuration file is malformed."""
    pass


@dataclass
class Config:
    """Effective configuration after applying environment overrides."""

    repositories: List[Repository] = field(default_factory=list)
    cache_root: Path = field(default_factory=default_cache_root)
    num_workers: int = DEFAULT_NUM_WORKERS
    source: Optional[Path] = None

    def repository(self, name: str) -> Repository:
        """
        Configured repository by name.

        Raises:
            ConfigError: If no repository has that name
        """
        for repository in self.repositories:
            if repository.name == name:
                return repository
        known = ", ".join(r.name for r in self.repositories) or "none"
        raise ConfigError(f"Unknown repository '{name}' (configured: {known})")


def host_env_var(repository: str) -> str:
    """Environment variable overriding the host of a repository."""
    return HOST_ENV_PREFIX + re.sub(r"[^A-Za-z0-9]", "_", repository).upper()


def find_config_file() -> Optional[Path]:
    """First existing file of ``$AUDVAULT_CONFIG``, ``./audvault.yaml``, ``~/.config/audvault/config.yaml``."""
    env_path = os.environ.get(CONFIG_ENV)
    if env_path:
        return Path(env_path).expanduser()
    for candidate in (LOCAL_CONFIG, USER_CONFIG.expanduser()):
        if candidate.is_file():
            return candidate
    return None


def load_config(path: Optional[Union[str, Path]] = None) -> Config:
    """
    Load the configuration.

    Args:
        path: Configuration file (default: ``find_config_file()``)

    Returns:
        Config; empty when no configuration file exists

    Raises:
        ConfigError: If the file is unreadable, not valid YAML or does not
            match the configuration schema
    """
    config_path = Path(path).expanduser() if path is not None else find_config_file()

    data: Dict[str, Any] = {}
    if config_path is not None:
        try:
            data = yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}
        except OSError as e:
            raise ConfigError(f"Cannot read configuration {config_path}: {e}") from e
        except yaml.YAMLError as e:
            raise ConfigError(f"Malformed configuration {config_path}: {e}") from e
        try:
            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as e:
            location = "/".join(str(p) for p in e.absolute_path) or "<root>"
            raise ConfigError(f"Invalid configuration {config_path} at {location}: {e.message}") from e
        logger.debug(f"Loaded configuration from {config_path}")

    repositories = []
    for item in data.get("repositories", []):
        host = os.environ.get(host_env_var(item["name"]), item["host"])
        try:
            repositories.append(Repository(item["name"], host, item.get("backend", "file-system")))
        except BackendError as e:
            raise ConfigError(f"Invalid repository '{item['name']}': {e}") from e

    if os.environ.get(CACHE_ROOT_ENV):
        cache_root = default_cache_root()
    elif data.get("cache_root"):
        cache_root = Path(data["cache_root"]).expanduser()
    else:
        cache_root = default_cache_root()

    return Config(
        repositories=repositories,
        cache_root=cache_root,
        num_workers=data.get("num_workers", DEFAULT_NUM_WORKERS),
        source=config_path,
    )

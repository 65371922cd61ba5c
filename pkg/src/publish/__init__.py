"""Publishing versions, downloading editable copies and removing media."""

from .publisher import PublishError, PublishReport, RemovalReport, load_to, publish, remove_media, unlock

__all__ = ["PublishError", "PublishReport", "RemovalReport", "load_to", "publish", "remove_media", "unlock"]

"""WAV I/O and flavour conversion."""

from .flavour import Flavour, FlavourError, convert, flavour_id, remix, resample
from .wavio import AudioBuffer, AudioLoadError, MediaInfo, read_wav, scan_media, write_wav

__all__ = [
    "AudioBuffer",
    "AudioLoadError",
    "Flavour",
    "FlavourError",
    "MediaInfo",
    "convert",
    "flavour_id",
    "read_wav",
    "remix",
    "resample",
    "scan_media",
    "write_wav",
]

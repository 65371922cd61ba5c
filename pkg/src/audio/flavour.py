"""Flavours: conversion targets for media files."""

import hashlib
import json
import logging
import math
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal

from ..errors import AudvaultError
from .wavio import BIT_DEPTHS, AudioBuffer, MediaInfo, is_float_wav, read_wav, scan_media, write_wav

logger = logging.getLogger(__name__)

RAW_FLAVOUR_ID = "raw"

# Half-width of the resampling filter in zero crossings of the sinc.
FILTER_HALF_WIDTH = 16
KAISER_BETA = 8.6


class FlavourError(AudvaultError):
    """Raised when a flavour is invalid or cannot be applied to a file."""
    pass


@dataclass(frozen=True)
class Flavour:
    """Media conversion target. Unset fields keep the property of the source file."""

    bit_depth: Optional[int] = None
    sampling_rate: Optional[int] = None
    channels: Optional[Tuple[int, ...]] = None
    mixdown: bool = False
    format: str = "wav"

    def __post_init__(self) -> None:
        if self.channels is not None:
            object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))
            if not self.channels:
                raise FlavourError("Channel selection must not be empty")
            if any(c < 0 for c in self.channels):
                raise FlavourError(f"Channel indices must be non-negative: {self.channels}")
        if self.channels is not None and self.mixdown:
            raise FlavourError("Channel selection and mixdown are mutually exclusive")
        if self.bit_depth is not None and self.bit_depth not in BIT_DEPTHS:
            raise FlavourError(f"Unsupported bit depth {self.bit_depth}, expected one of {BIT_DEPTHS}")
        if self.sampling_rate is not None and self.sampling_rate <= 0:
            raise FlavourError(f"Sampling rate must be positive, got {self.sampling_rate}")
        if self.format != "wav":
            raise FlavourError(f"Unsupported format '{self.format}', only wav is supported")

    @property
    def is_raw(self) -> bool:
        return (
            self.bit_depth is None
            and self.sampling_rate is None
            and self.channels is None
            and not self.mixdown
        )

    @property
    def id(self) -> str:
        return flavour_id(self)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bit_depth": self.bit_depth,
            "sampling_rate": self.sampling_rate,
            "channels": list(self.channels) if self.channels is not None else None,
            "mixdown": self.mixdown,
            "format": self.format,
        }

    def matches(self, info: MediaInfo) -> bool:
        """Check whether a file with these properties already conforms."""
        if self.bit_depth is not None and info.bit_depth != self.bit_depth:
            return False
        if self.sampling_rate is not None and info.sampling_rate != self.sampling_rate:
            return False
        if self.channels is not None and self.channels != tuple(range(info.channels)):
            return False
        if self.mixdown and info.channels != 1:
            return False
        return True


def flavour_id(flavour: Flavour) -> str:
    """Short deterministic ID of a flavour; ``raw`` for the empty flavour."""
    if flavour.is_raw:
        return RAW_FLAVOUR_ID
    payload = json.dumps(flavour.to_dict(), sort_keys=True)
    return hashlib.md5(payload.encode("utf-8")).hexdigest()[:8]


def remix(
    buffer: AudioBuffer,
    channels: Optional[Sequence[int]] = None,
    mixdown: bool = False,
) -> AudioBuffer:
    """
    Select channels or mix them down to mono.

    Args:
        buffer: Input samples
        channels: Channel indices in output order (may repeat)
        mixdown: Average all channels into one

    Raises:
        FlavourError: If a channel index is out of range
    """
    samples = buffer.samples
    if channels is not None:
        out_of_range = [c for c in channels if c < 0 or c >= buffer.channels]
        if out_of_range:
            raise FlavourError(
                f"Channel index {out_of_range[0]} out of range for {buffer.channels} channel(s)"
            )
        samples = samples[list(channels)]
    if mixdown:
        samples = samples.mean(axis=0, keepdims=True)
    return AudioBuffer(samples, buffer.sampling_rate)


def resample(buffer: AudioBuffer, target_rate: int) -> AudioBuffer:
    """
    Polyphase resampling with a Kaiser-windowed sinc filter.

    The output has ``round(frames * target_rate / sampling_rate)`` frames;
    equal rates return the samples unchanged.
    """
    if target_rate <= 0:
        raise FlavourError(f"Sampling rate must be positive, got {target_rate}")
    if target_rate == buffer.sampling_rate:
        return AudioBuffer(buffer.samples.copy(), buffer.sampling_rate)

    g = math.gcd(target_rate, buffer.sampling_rate)
    up, down = target_rate // g, buffer.sampling_rate // g
    n_out = int(round(buffer.frames * up / down))
    if buffer.frames == 0:
        return AudioBuffer(np.zeros((buffer.channels, 0)), target_rate)

    max_rate = max(up, down)
    taps = signal.firwin(
        2 * FILTER_HALF_WIDTH * max_rate + 1,
        1.0 / max_rate,
        window=("kaiser", KAISER_BETA),
    )
    out = signal.resample_poly(buffer.samples, up, down, axis=1, window=taps, padtype="line")

    if out.shape[1] > n_out:
        out = out[:, :n_out]
    elif out.shape[1] < n_out:
        out = np.pad(out, ((0, 0), (0, n_out - out.shape[1])), mode="edge")
    return AudioBuffer(out, target_rate)


def convert(
    in_file: Union[str, Path],
    flavour: Flavour,
    out_file: Union[str, Path],
) -> MediaInfo:
    """
    Convert a WAV file to a flavour: remix, then resample, then write.

    Files that already conform are copied byte for byte.

    Args:
        in_file: Source WAV file
        flavour: Conversion target
        out_file: Destination file

    Returns:
        MediaInfo of the written file

    Raises:
        AudioLoadError: If the source cannot be read
        FlavourError: If the flavour cannot be applied
    """
    in_file, out_file = Path(in_file), Path(out_file)
    info = scan_media(in_file)
    out_file.parent.mkdir(parents=True, exist_ok=True)

    source_is_float = flavour.bit_depth is not None and is_float_wav(in_file)
    if flavour.matches(info) and not source_is_float:
        shutil.copyfile(in_file, out_file)
        return info

    buffer = read_wav(in_file)
    buffer = remix(buffer, flavour.channels, flavour.mixdown)
    if flavour.sampling_rate is not None:
        buffer = resample(buffer, flavour.sampling_rate)

    bit_depth = flavour.bit_depth or (32 if is_float_wav(in_file) else info.bit_depth)
    write_wav(buffer, out_file, bit_depth)
    logger.debug(f"Converted {in_file.name} to {flavour.id}")
    return scan_media(out_file)

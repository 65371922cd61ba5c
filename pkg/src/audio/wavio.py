"""WAV PCM reading, writing and probing."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, NamedTuple, Union

import numpy as np
import soundfile as sf

from ..core.duration import NS_PER_SECOND
from ..errors import AudvaultError

logger = logging.getLogger(__name__)

SUBTYPE_BITS = {"PCM_16": 16, "PCM_24": 24, "PCM_32": 32, "FLOAT": 32}
WRITE_SUBTYPES = {16: "PCM_16", 24: "PCM_24", 32: "PCM_32"}
BIT_DEPTHS = tuple(WRITE_SUBTYPES)


class AudioLoadError(AudvaultError):
    """Raised when audio file loading fails."""
    pass


class MediaInfo(NamedTuple):
    """Properties of a media file as recorded in the dependency table."""

    bit_depth: int
    channels: int
    sampling_rate: int
    duration: int


@dataclass(eq=False)
class AudioBuffer:
    """Samples in [-1, 1] with shape (channels, frames)."""

    samples: np.ndarray
    sampling_rate: int

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[np.newaxis, :]
        if samples.ndim != 2:
            raise ValueError(f"Samples must have shape (channels, frames), got {samples.shape}")
        self.samples = samples

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def frames(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> int:
        """Duration in nanoseconds."""
        return frames_to_ns(self.frames, self.sampling_rate)


def frames_to_ns(frames: int, sampling_rate: int) -> int:
    return (frames * NS_PER_SECOND + sampling_rate // 2) // sampling_rate


def _info(file_path: Path) -> Any:
    if not file_path.exists():
        raise AudioLoadError(f"Audio file not found: {file_path}")
    try:
        info = sf.info(str(file_path))
    except RuntimeError as e:
        raise AudioLoadError(f"Not a readable audio file {file_path}: {e}") from e
    if info.format != "WAV":
        raise AudioLoadError(f"Not a WAV file: {file_path} ({info.format})")
    if info.subtype not in SUBTYPE_BITS:
        raise AudioLoadError(f"Unsupported WAV encoding {info.subtype} in {file_path}")
    return info


def scan_media(file_path: Union[str, Path]) -> MediaInfo:
    """
    Read media properties from the WAV header.

    Args:
        file_path: Path to a RIFF/WAVE file

    Returns:
        MediaInfo with bit depth, channels, sampling rate and duration in ns

    Raises:
        AudioLoadError: If the file is not a WAV file or not PCM/float encoded
    """
    info = _info(Path(file_path))
    return MediaInfo(
        bit_depth=SUBTYPE_BITS[info.subtype],
        channels=info.channels,
        sampling_rate=info.samplerate,
        duration=frames_to_ns(info.frames, info.samplerate),
    )


def is_float_wav(file_path: Union[str, Path]) -> bool:
    """Check whether a WAV file stores 32-bit float samples."""
    return _info(Path(file_path)).subtype == "FLOAT"


def read_wav(file_path: Union[str, Path]) -> AudioBuffer:
    """
    Load a WAV file as float samples.

    Integer samples are divided by 2^(bits-1), so a full-scale 16-bit
    sample 32767 reads as 32767/32768.

    Raises:
        AudioLoadError: If the file is missing, not PCM or truncated
    """
    file_path = Path(file_path)
    info = _info(file_path)

    try:
        if info.subtype == "FLOAT":
            data, sampling_rate = sf.read(str(file_path), dtype="float32", always_2d=True)
            samples = data.astype(np.float64)
        elif info.subtype == "PCM_16":
            data, sampling_rate = sf.read(str(file_path), dtype="int16", always_2d=True)
            samples = data.astype(np.float64) / 2 ** 15
        else:
            data, sampling_rate = sf.read(str(file_path), dtype="int32", always_2d=True)
            if info.subtype == "PCM_24":
                samples = (data >> 8).astype(np.float64) / 2 ** 23
            else:
                samples = data.astype(np.float64) / 2 ** 31
    except RuntimeError as e:
        raise AudioLoadError(f"Failed to load audio file {file_path}: {e}") from e

    if data.shape[0] != info.frames:
        raise AudioLoadError(f"Truncated audio file {file_path}: {data.shape[0]} of {info.frames} frames")

    logger.debug(
        f"Loaded audio: {file_path.name}, channels: {info.channels}, "
        f"sample_rate: {sampling_rate}, frames: {info.frames}"
    )
    return AudioBuffer(samples.T, sampling_rate)


def write_wav(buffer: AudioBuffer, file_path: Union[str, Path], bit_depth: int = 16) -> Path:
    """
    Write samples as integer PCM.

    Samples are multiplied by 2^(bits-1), rounded and clipped to the
    representable range.

    Raises:
        AudioLoadError: If the bit depth is unsupported or writing fails
    """
    if bit_depth not in WRITE_SUBTYPES:
        raise AudioLoadError(f"Unsupported bit depth {bit_depth}, expected one of {BIT_DEPTHS}")

    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)

    scale = 2 ** (bit_depth - 1)
    ints = np.clip(np.round(buffer.samples * scale), -scale, scale - 1)
    if bit_depth == 16:
        data = ints.astype(np.int16)
    elif bit_depth == 24:
        data = ints.astype(np.int32) << 8
    else:
        data = ints.astype(np.int32)

    try:
        sf.write(
            str(file_path),
            data.T,
            buffer.sampling_rate,
            subtype=WRITE_SUBTYPES[bit_depth],
            format="WAV",
        )
    except RuntimeError as e:
        raise AudioLoadError(f"Failed to write audio file {file_path}: {e}") from e
    return file_path

"""Tests for WAV I/O and flavour conversion."""

import numpy as np
import pytest

from src.audio import (
    AudioBuffer,
    AudioLoadError,
    Flavour,
    FlavourError,
    convert,
    read_wav,
    remix,
    resample,
    scan_media,
    write_wav,
)
from src.audio.flavour import RAW_FLAVOUR_ID
from src.audio.wavio import frames_to_ns, is_float_wav


def dc_buffer(value=0.25, channels=2, frames=4000, sampling_rate=16000):
    return AudioBuffer(np.full((channels, frames), value), sampling_rate)


@pytest.mark.unit
class TestWavIO:
    """Tests for WAV reading, writing and probing."""

    def test_scan(self, make_wav):
        """Test properties come from the WAV header."""
        path = make_wav("a.wav", sampling_rate=16000, channels=2, seconds=0.5, bit_depth=24)
        info = scan_media(path)
        assert (info.bit_depth, info.channels, info.sampling_rate) == (24, 2, 16000)
        assert info.duration == 500_000_000

    @pytest.mark.parametrize("bit_depth", [16, 24, 32])
    def test_write_read(self, temp_dir, bit_depth):
        """Test samples survive writing at every supported depth."""
        values = np.array([[0.0, 0.5, -0.5, 0.25, -1.0]])
        path = write_wav(AudioBuffer(values, 8000), temp_dir / "x.wav", bit_depth)
        buffer = read_wav(path)
        assert buffer.sampling_rate == 8000
        np.testing.assert_allclose(buffer.samples, values, atol=2.0 ** -(bit_depth - 1))
        assert scan_media(path).bit_depth == bit_depth

    def test_full_scale_clipped(self, temp_dir):
        """Test +1.0 clips to the largest representable sample."""
        path = write_wav(AudioBuffer(np.array([[1.0]]), 8000), temp_dir / "x.wav", 16)
        assert read_wav(path).samples[0, 0] == 32767 / 32768

    def test_not_wav(self, temp_dir):
        """Test non-WAV files are rejected."""
        path = temp_dir / "x.wav"
        path.write_bytes(b"definitely not audio")
        with pytest.raises(AudioLoadError):
            scan_media(path)

    def test_missing(self, temp_dir):
        """Test missing files raise AudioLoadError."""
        with pytest.raises(AudioLoadError):
            read_wav(temp_dir / "none.wav")

    def test_unsupported_bit_depth(self, temp_dir):
        """Test only integer depths 16, 24 and 32 are written."""
        with pytest.raises(AudioLoadError):
            write_wav(dc_buffer(), temp_dir / "x.wav", 8)

    def test_frames_to_ns(self):
        """Test frame counts convert with rounding."""
        assert frames_to_ns(16000, 16000) == 1_000_000_000
        assert frames_to_ns(1, 3) == 333_333_333


@pytest.mark.unit
class TestFlavourId:
    """Tests for flavour validation and IDs."""

    def test_raw(self):
        """Test the empty flavour is raw."""
        assert Flavour().is_raw
        assert Flavour().id == RAW_FLAVOUR_ID

    def test_id_deterministic(self):
        """Test equal flavours share an ID and different ones do not."""
        a = Flavour(bit_depth=16, sampling_rate=8000, mixdown=True)
        b = Flavour(bit_depth=16, sampling_rate=8000, mixdown=True)
        c = Flavour(bit_depth=16, sampling_rate=16000, mixdown=True)
        assert a.id == b.id
        assert len(a.id) == 8
        assert a.id != c.id

    def test_channels_normalized(self):
        """Test channel lists become tuples."""
        assert Flavour(channels=[1, 0]).channels == (1, 0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"bit_depth": 8},
            {"sampling_rate": 0},
            {"channels": []},
            {"channels": [-1]},
            {"channels": [0], "mixdown": True},
            {"format": "flac"},
        ],
    )
    def test_invalid(self, kwargs):
        """Test invalid flavours are rejected."""
        with pytest.raises(FlavourError):
            Flavour(**kwargs)


@pytest.mark.unit
class TestConversion:
    """Tests for remixing, resampling and file conversion."""

    def test_remix_select(self):
        """Test channel selection reorders and repeats."""
        buffer = AudioBuffer(np.array([[1.0, 1.0], [2.0, 2.0]]), 8000)
        out = remix(buffer, channels=[1, 1, 0])
        np.testing.assert_array_equal(out.samples[:, 0], [2.0, 2.0, 1.0])

    def test_remix_out_of_range(self):
        """Test selecting a missing channel fails."""
        with pytest.raises(FlavourError):
            remix(dc_buffer(channels=1), channels=[1])

    def test_mixdown(self):
        """Test mixdown averages channels."""
        buffer = AudioBuffer(np.array([[0.2, 0.2], [0.4, 0.4]]), 8000)
        np.testing.assert_allclose(remix(buffer, mixdown=True).samples, [[0.3, 0.3]])

    @pytest.mark.parametrize("seed", range(20))
    def test_mixdown_bounded(self, seed):
        """Test a mixdown never exceeds the loudest input sample."""
        rng = np.random.default_rng(seed)
        channels = int(rng.integers(1, 7))
        scale = rng.uniform(0.01, 1.0, size=(channels, 1))
        buffer = AudioBuffer(rng.uniform(-1.0, 1.0, size=(channels, 2000)) * scale, 16000)
        out = remix(buffer, mixdown=True)
        assert out.channels == 1
        assert np.max(np.abs(out.samples)) <= np.max(np.abs(buffer.samples)) + 1e-12

    @pytest.mark.parametrize(
        "rate,target",
        [(16000, 8000), (8000, 16000), (44100, 16000), (16000, 22050), (48000, 44100)],
    )
    @pytest.mark.parametrize("seed", range(3))
    def test_resample_keeps_sine_rms(self, rate, target, seed):
        """Test a sine well below both Nyquist rates keeps its RMS."""
        rng = np.random.default_rng(seed)
        frequency = rng.uniform(100.0, 0.25 * min(rate, target))
        t = np.arange(rate) / rate
        buffer = AudioBuffer(0.5 * np.sin(2 * np.pi * frequency * t), rate)
        out = resample(buffer, target)

        def rms(samples, trim):
            return np.sqrt(np.mean(samples[0, trim:-trim] ** 2))

        whole = np.sqrt(np.mean(out.samples ** 2)) / np.sqrt(np.mean(buffer.samples ** 2))
        assert abs(whole - 1.0) < 0.05
        # edges carry filter transients
        interior = rms(out.samples, target // 10) / rms(buffer.samples, rate // 10)
        assert interior == pytest.approx(1.0, abs=0.01)

    @pytest.mark.parametrize("frames,rate,target", [(4000, 16000, 8000), (441, 44100, 16000), (1000, 8000, 22050)])
    def test_resample_length(self, frames, rate, target):
        """Test the output length is the rounded frame ratio."""
        out = resample(dc_buffer(frames=frames, sampling_rate=rate), target)
        assert out.frames == round(frames * target / rate)
        assert out.sampling_rate == target

    def test_resample_same_rate(self):
        """Test equal rates leave samples unchanged."""
        buffer = dc_buffer()
        np.testing.assert_array_equal(resample(buffer, 16000).samples, buffer.samples)

    def test_convert_copies_matching(self, make_wav, temp_dir):
        """Test conforming files are copied byte for byte."""
        source = make_wav("a.wav", sampling_rate=16000)
        out = temp_dir / "out" / "a.wav"
        convert(source, Flavour(bit_depth=16, sampling_rate=16000, channels=[0]), out)
        assert out.read_bytes() == source.read_bytes()

    def test_convert_bit_depth(self, make_wav, temp_dir):
        """Test only the bit depth changes when requested alone."""
        source = make_wav("a.wav", sampling_rate=16000, channels=2)
        info = convert(source, Flavour(bit_depth=24), temp_dir / "b.wav")
        assert (info.bit_depth, info.channels, info.sampling_rate) == (24, 2, 16000)

    def test_convert_float_source(self, temp_dir):
        """Test float files are written as 32-bit integers unless asked otherwise."""
        import soundfile as sf

        source = temp_dir / "f.wav"
        sf.write(str(source), np.full((800, 2), 0.1, dtype=np.float32), 8000, subtype="FLOAT")
        assert is_float_wav(source)
        info = convert(source, Flavour(mixdown=True), temp_dir / "m.wav")
        assert (info.bit_depth, info.channels) == (32, 1)

    def test_stereo_to_8k_mono(self, temp_dir):
        """Test 16 kHz stereo converts to 8 kHz mono 16-bit with DC and duration kept."""
        source = write_wav(dc_buffer(0.25, channels=2, frames=4000), temp_dir / "dc.wav", 16)
        flavour = Flavour(bit_depth=16, sampling_rate=8000, mixdown=True)
        info = convert(source, flavour, temp_dir / "out.wav")

        assert (info.bit_depth, info.channels, info.sampling_rate) == (16, 1, 8000)
        source_info = scan_media(source)
        assert abs(info.duration - source_info.duration) <= 1_000_000_000 / 8000

        samples = read_wav(temp_dir / "out.wav").samples[0]
        middle = samples[100:-100]
        assert np.max(np.abs(middle - 0.25)) < 1e-3
